#include "bsq5/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace bsq5 {

namespace {
double trap_weight(int j, int N, double h) { return (j == 0 || j == N) ? 0.5 * h : h; }
}  // namespace

double energy(const State& s, const Grid& g) {
  const int N = g.N;
  const double h = g.h();
  double acc = 0.0;
  for (int j = 0; j <= N; ++j)
    acc += trap_weight(j, N, h) * (s.eta[j] * s.eta[j] + s.u[j] * s.u[j]);
  return 0.5 * acc;
}

double inner_product(const State& a, const State& b, const Grid& g) {
  const int N = g.N;
  const double h = g.h();
  double acc = 0.0;
  for (int j = 0; j <= N; ++j)
    acc += trap_weight(j, N, h) * (a.eta[j] * b.eta[j] + a.u[j] * b.u[j]);
  return acc;
}

double norm_sq(const State& s, const Grid& g) { return inner_product(s, s, g); }

double h2_norm_sq(const State& s, const Grid& g) {
  const int N = g.N;
  const double h = g.h();
  auto d1 = [&](const std::vector<double>& v, int j) {
    if (j == 0) return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    if (j == N) return (3.0 * v[N] - 4.0 * v[N - 1] + v[N - 2]) / (2.0 * h);
    return (v[j + 1] - v[j - 1]) / (2.0 * h);
  };
  auto d2 = [&](const std::vector<double>& v, int j) {
    if (j == 0) return (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
    if (j == N) return (2.0 * v[N] - 5.0 * v[N - 1] + 4.0 * v[N - 2] - v[N - 3]) / (h * h);
    return (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h);
  };
  double acc = 0.0;
  for (int j = 0; j <= N; ++j) {
    const double w = trap_weight(j, N, h);
    const double e1 = d1(s.eta, j), e2 = d2(s.eta, j);
    const double v1 = d1(s.u, j), v2 = d2(s.u, j);
    acc += w * (s.eta[j] * s.eta[j] + e1 * e1 + e2 * e2 + s.u[j] * s.u[j] +
                v1 * v1 + v2 * v2);
  }
  return acc;
}

double dissipation_residual(const EnergyRecord& prev, const EnergyRecord& cur,
                            const ModelCoefficients& c, double dt) {
  const double rhs = -c.alpha1 * c.b * cur.eta_xx_0 * cur.eta_xx_0 -
                     c.alpha2 * c.b * cur.eta_xx_L * cur.eta_xx_L + cur.nl_flux;
  return (cur.E - prev.E) / dt - rhs;
}

double kato_ratio(const Trajectory& traj) {
  if (traj.snapshots.size() < 2)
    throw std::invalid_argument("kato_ratio: need at least two snapshots");
  const Grid& g = traj.grid;
  const double n0 = norm_sq(traj.snapshots.front(), g);
  if (n0 <= 0.0) throw std::invalid_argument("kato_ratio: zero initial data");
  double acc = 0.0;
  for (size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const double dt = traj.snapshots[k + 1].t - traj.snapshots[k].t;
    acc += 0.5 * dt * (h2_norm_sq(traj.snapshots[k], g) + h2_norm_sq(traj.snapshots[k + 1], g));
  }
  return std::sqrt(acc) / std::sqrt(n0);
}

double trace_ratio(const Trajectory& traj) {
  if (traj.records.size() < 2)
    throw std::invalid_argument("trace_ratio: need at least two records");
  const double h2n = h2_norm_sq(traj.snapshots.front(), traj.grid);
  if (h2n <= 0.0) throw std::invalid_argument("trace_ratio: zero initial data");
  double acc = 0.0;
  for (size_t k = 1; k < traj.records.size(); ++k) {
    const double dt = traj.records[k].t - traj.records[k - 1].t;
    const auto& r = traj.records[k];  // midpoint traces of step k
    acc += dt * (r.eta_xx_L * r.eta_xx_L + r.u_xx_0 * r.u_xx_0);
  }
  return acc / h2n;
}

namespace {
double boundary_trace_integral(const Trajectory& traj, double w0, double wL,
                               bool weight_by_remaining_time, double T) {
  double acc = 0.0;
  for (size_t k = 1; k < traj.records.size(); ++k) {
    const auto& r = traj.records[k];
    const double dt = r.t - traj.records[k - 1].t;
    const double tmid = 0.5 * (r.t + traj.records[k - 1].t);
    const double tw = weight_by_remaining_time ? (T - tmid) : 1.0;
    acc += dt * tw * (w0 * r.eta_xx_0 * r.eta_xx_0 + wL * r.eta_xx_L * r.eta_xx_L);
  }
  return acc;
}
}  // namespace

double observability_ratio(const Trajectory& traj) {
  const double num = norm_sq(traj.snapshots.front(), traj.grid);
  if (num <= 0.0) throw std::invalid_argument("observability_ratio: zero initial data");
  const double den = boundary_trace_integral(traj, 1.0, 1.0, false, 0.0);
  if (den < 1e-12 * num)
    throw std::runtime_error(
        "observability failure: boundary traces vanish for nonzero data");
  return num / den;
}

double flux_observability_constant(const Trajectory& traj, const ModelCoefficients& c) {
  const double num = norm_sq(traj.snapshots.front(), traj.grid);
  if (num <= 0.0)
    throw std::invalid_argument("flux_observability_constant: zero initial data");
  const double den =
      boundary_trace_integral(traj, c.alpha1 * c.b, c.alpha2 * c.b, false, 0.0);
  if (den < 1e-12 * num)
    throw std::runtime_error(
        "observability failure: boundary traces vanish for nonzero data");
  return num / den;
}

double weighted_identity_residual(const Trajectory& traj, const ModelCoefficients& c,
                                  double T) {
  if (traj.records.size() < 2)
    throw std::invalid_argument("weighted_identity_residual: empty trajectory");
  const double E0 = traj.records.front().E;
  double intE = 0.0;
  for (size_t k = 1; k < traj.records.size(); ++k) {
    const double dt = traj.records[k].t - traj.records[k - 1].t;
    intE += 0.5 * dt * (traj.records[k].E + traj.records[k - 1].E);
  }
  const double wflux =
      boundary_trace_integral(traj, c.alpha1 * c.b, c.alpha2 * c.b, true, T);
  return T * E0 - intE - wflux;
}

DecayFit fit_decay(std::span<const EnergyRecord> records, double t_start, double t_end) {
  if (!(t_end > t_start)) throw std::invalid_argument("fit_decay: empty window");
  double st = 0, st2 = 0, sy = 0, sty = 0;
  long n = 0;
  for (const auto& r : records) {
    if (r.t < t_start || r.t > t_end) continue;
    if (!(r.E > 0.0))
      throw std::invalid_argument("fit_decay: energy not strictly positive in window");
    const double y = std::log(r.E);
    st += r.t;
    st2 += r.t * r.t;
    sy += y;
    sty += r.t * y;
    ++n;
  }
  if (n < 10) throw std::invalid_argument("fit_decay: window holds fewer than 10 samples");
  const double det = n * st2 - st * st;
  const double slope = (n * sty - st * sy) / det;
  const double intercept = (sy * st2 - st * sty) / det;

  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / n;
  for (const auto& r : records) {
    if (r.t < t_start || r.t > t_end) continue;
    const double y = std::log(r.E);
    const double f = slope * r.t + intercept;
    ss_res += (y - f) * (y - f);
    ss_tot += (y - ybar) * (y - ybar);
  }
  DecayFit fit;
  fit.mu0 = -0.5 * slope;
  const double norm0 = std::sqrt(2.0 * records.front().E);
  fit.C0 = (norm0 > 0.0) ? std::exp(0.5 * intercept) / norm0 : 0.0;
  fit.t_start = t_start;
  fit.t_end = t_end;
  fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  fit.r2 = std::min(1.0, std::max(0.0, fit.r2));
  return fit;
}

}  // namespace bsq5
