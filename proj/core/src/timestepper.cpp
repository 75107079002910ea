#include "bsq5/timestepper.hpp"

#include <cmath>
#include <stdexcept>

#include "bsq5/diagnostics.hpp"
#include "bsq5/stencils.hpp"

namespace bsq5 {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Linear: return "linear";
    case Mode::Conservative: return "conservative";
    case Mode::Nonlinear: return "nonlinear";
  }
  return "?";
}

Mode mode_from_string(std::string_view s) {
  if (s == "linear") return Mode::Linear;
  if (s == "conservative") return Mode::Conservative;
  if (s == "nonlinear") return Mode::Nonlinear;
  throw std::invalid_argument("unknown mode: " + std::string(s));
}

void RunConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("run config: dt must be > 0");
  if (T < 0.0) throw std::invalid_argument("run config: T must be >= 0");
  if (T > 0.0 && dt > T) throw std::invalid_argument("run config: dt must not exceed T");
  if (smallness_threshold && !(*smallness_threshold > 0.0))
    throw std::invalid_argument("run config: smallness threshold must be positive");
  if (blowup_threshold && !(*blowup_threshold > 0.0))
    throw std::invalid_argument("run config: blow-up threshold must be positive");
  if (snapshot_stride < 1) throw std::invalid_argument("run config: stride must be >= 1");
  if (startup_be_steps < 0)
    throw std::invalid_argument("run config: startup step count must be >= 0");
}

namespace {

// (I - dt/2 A) s' = (I + dt/2 A) s
State cn_step(const DiscreteOperator& op, const State& s, double dt) {
  const int n = s.n_nodes();
  std::vector<double> xi(2 * n), rhs(2 * n);
  for (int j = 0; j < n; ++j) {
    xi[2 * j] = s.eta[j];
    xi[2 * j + 1] = s.u[j];
  }
  op.band().matvec(xi, rhs);
  for (int g = 0; g < 2 * n; ++g) rhs[g] = xi[g] + 0.5 * dt * rhs[g];
  op.factorization(0.5 * dt)->solve(rhs);
  State out;
  out.eta.resize(n);
  out.u.resize(n);
  out.t = s.t + dt;
  for (int j = 0; j < n; ++j) {
    out.eta[j] = rhs[2 * j];
    out.u[j] = rhs[2 * j + 1];
  }
  return out;
}

// backward Euler (I - dt A) s' = s, used for startup smoothing
State be_step(const DiscreteOperator& op, const State& s, double dt) {
  const int n = s.n_nodes();
  std::vector<double> rhs(2 * n);
  for (int j = 0; j < n; ++j) {
    rhs[2 * j] = s.eta[j];
    rhs[2 * j + 1] = s.u[j];
  }
  op.factorization(dt)->solve(rhs);
  State out;
  out.eta.resize(n);
  out.u.resize(n);
  out.t = s.t + dt;
  for (int j = 0; j < n; ++j) {
    out.eta[j] = rhs[2 * j];
    out.u[j] = rhs[2 * j + 1];
  }
  return out;
}

}  // namespace

State step_linear(const DiscreteOperator& op, const State& s, double dt) {
  if (s.n_nodes() != op.grid().n_nodes())
    throw std::invalid_argument("step_linear: state/operator size mismatch");
  return cn_step(op, s, dt);
}

State nonlinear_rhs(const ModelCoefficients& c, const State& s, const Grid& g) {
  const int N = g.N;
  const double h = g.h();
  if (s.n_nodes() != N + 1) throw std::invalid_argument("nonlinear_rhs: size mismatch");

  State out;
  out.eta.assign(N + 1, 0.0);
  out.u.assign(N + 1, 0.0);
  out.t = s.t;
  if (c.is_linear()) return out;

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

  // products first, outer derivative second
  std::vector<double> eta_u(N + 1), eta_uxx(N + 1), eta_etaxx(N + 1);
  for (int j = 0; j <= N; ++j) {
    eta_u[j] = s.eta[j] * s.u[j];
    eta_uxx[j] = s.eta[j] * d2(s.u, j);
    eta_etaxx[j] = s.eta[j] * d2(s.eta, j);
  }
  for (int j = 1; j < N; ++j) {
    const double ux = d1(s.u, j);
    out.eta[j] = -c.a1 * d1(eta_u, j) - c.a2 * d1(eta_uxx, j);
    out.u[j] = -c.a1 * s.u[j] * ux - c.a3 * d1(eta_etaxx, j) - c.a4 * ux * d2(s.u, j);
  }
  return out;
}

State step_nonlinear(const DiscreteOperator& op, const ModelCoefficients& c,
                     const State* s_prev, const State& s, double dt,
                     double blowup_threshold) {
  const int n = s.n_nodes();
  if (n != op.grid().n_nodes())
    throw std::invalid_argument("step_nonlinear: state/operator size mismatch");

  const State f_cur = nonlinear_rhs(c, s, op.grid());
  State f_mix = f_cur;
  if (s_prev != nullptr) {
    const State f_prev = nonlinear_rhs(c, *s_prev, op.grid());
    for (int j = 0; j < n; ++j) {
      f_mix.eta[j] = 1.5 * f_cur.eta[j] - 0.5 * f_prev.eta[j];
      f_mix.u[j] = 1.5 * f_cur.u[j] - 0.5 * f_prev.u[j];
    }
  }

  std::vector<double> xi(2 * n), rhs(2 * n);
  for (int j = 0; j < n; ++j) {
    xi[2 * j] = s.eta[j];
    xi[2 * j + 1] = s.u[j];
  }
  op.band().matvec(xi, rhs);
  for (int j = 0; j < n; ++j) {
    rhs[2 * j] = xi[2 * j] + 0.5 * dt * rhs[2 * j] + dt * f_mix.eta[j];
    rhs[2 * j + 1] = xi[2 * j + 1] + 0.5 * dt * rhs[2 * j + 1] + dt * f_mix.u[j];
  }
  op.factorization(0.5 * dt)->solve(rhs);

  State out;
  out.eta.resize(n);
  out.u.resize(n);
  out.t = s.t + dt;
  for (int j = 0; j < n; ++j) {
    out.eta[j] = rhs[2 * j];
    out.u[j] = rhs[2 * j + 1];
  }
  if (!out.finite() || out.max_abs() > blowup_threshold) throw BlowupError(out.t);
  return out;
}

namespace {

double nonlinear_flux(const ModelCoefficients& c, const State& s, const Grid& g) {
  if (c.is_linear()) return 0.0;
  const int N = g.N;
  const double h = g.h();
  const auto d3s = derivative_stencil(3, h);

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
  // interior third derivative with one-sided fallback near the ends
  auto d3 = [&](const std::vector<double>& v, int j) {
    if (j >= 2 && j <= N - 2) {
      double acc = 0.0;
      for (int i = 0; i < 5; ++i) acc += d3s[i] * v[j - 2 + i];
      return acc;
    }
    const int base = (j < 2) ? 0 : N - 4;
    // second-order one-sided from a cubic through five nodes
    double c5[5];
    const double sgn = (j < 2) ? 1.0 : -1.0;
    const double inv = 1.0 / (h * h * h);
    if ((j < 2 ? j : N - j) == 0) {
      c5[0] = -2.5; c5[1] = 9; c5[2] = -12; c5[3] = 7; c5[4] = -1.5;
    } else {
      c5[0] = -1.5; c5[1] = 5; c5[2] = -6; c5[3] = 3; c5[4] = -0.5;
    }
    double acc = 0.0;
    if (j < 2)
      for (int i = 0; i < 5; ++i) acc += c5[i] * v[base + i];
    else
      for (int i = 0; i < 5; ++i) acc += c5[i] * v[base + 4 - i];
    return sgn * acc * inv;
  };

  double I1 = 0.0, I2 = 0.0, I3 = 0.0, I4 = 0.0;  // trapezoids
  for (int j = 0; j <= N; ++j) {
    const double wq = (j == 0 || j == N) ? 0.5 * h : h;
    const double ux = d1(s.u, j);
    I1 += wq * s.eta[j] * s.eta[j] * ux;
    I2 += wq * s.eta[j] * s.eta[j] * d3(s.u, j);
    I3 += wq * s.eta[j] * d2(s.eta, j) * ux;
    I4 += wq * ux * ux * ux;
  }
  return -0.5 * c.a1 * I1 - 0.5 * c.a2 * I2 + c.a3 * I3 + 0.5 * c.a4 * I4;
}

EnergyRecord make_record(const DiscreteOperator& op, const ModelCoefficients& c,
                         const State& current, const State* previous, double dt,
                         double E_cur, double E_prev, bool nonlinear) {
  EnergyRecord r;
  r.t = current.t;
  r.E = E_cur;
  if (previous == nullptr) {
    const BoundaryTraces tr = op.second_derivative_traces(current);
    r.eta_xx_0 = tr.eta_xx_0;
    r.eta_xx_L = tr.eta_xx_L;
    r.u_xx_0 = tr.u_xx_0;
    r.u_xx_L = tr.u_xx_L;
    r.nl_flux = nonlinear ? nonlinear_flux(c, current, op.grid()) : 0.0;
    return r;
  }
  State mid;
  const int n = current.n_nodes();
  mid.eta.resize(n);
  mid.u.resize(n);
  mid.t = 0.5 * (previous->t + current.t);
  for (int j = 0; j < n; ++j) {
    mid.eta[j] = 0.5 * (previous->eta[j] + current.eta[j]);
    mid.u[j] = 0.5 * (previous->u[j] + current.u[j]);
  }
  const BoundaryTraces tr = op.second_derivative_traces(mid);
  r.eta_xx_0 = tr.eta_xx_0;
  r.eta_xx_L = tr.eta_xx_L;
  r.u_xx_0 = tr.u_xx_0;
  r.u_xx_L = tr.u_xx_L;
  r.nl_flux = nonlinear ? nonlinear_flux(c, mid, op.grid()) : 0.0;
  const double rhs = -c.alpha1 * c.b * r.eta_xx_0 * r.eta_xx_0 -
                     c.alpha2 * c.b * r.eta_xx_L * r.eta_xx_L + r.nl_flux;
  r.dis_residual = (E_cur - E_prev) / dt - rhs;
  return r;
}

}  // namespace

Trajectory run(const DiscreteOperator& op, const ModelCoefficients& c,
               const State& s0, const RunConfig& rc) {
  rc.validate();
  if (s0.n_nodes() != op.grid().n_nodes())
    throw std::invalid_argument("run: state/operator size mismatch");

  Trajectory traj;
  traj.grid = op.grid();

  const Grid& g = op.grid();
  const double norm0 = std::sqrt(norm_sq(s0, g));
  if (rc.smallness_threshold && norm0 > *rc.smallness_threshold)
    traj.warnings.push_back("initial data norm exceeds the smallness threshold");

  const bool nonlinear = (rc.mode == Mode::Nonlinear);
  const double blowup =
      rc.blowup_threshold.value_or(1e6 * std::max(s0.max_abs(), 1e-300));

  State cur = s0;
  double E_prev = energy(cur, g);
  traj.snapshots.push_back(cur);
  traj.records.push_back(make_record(op, c, cur, nullptr, rc.dt, E_prev, E_prev, nonlinear));

  const long nsteps = (rc.T <= 0.0) ? 0 : std::lround(rc.T / rc.dt);
  State prev_for_ab;  // previous state for the two-step nonlinear scheme
  bool have_prev = false;

  for (long k = 0; k < nsteps; ++k) {
    State next;
    try {
      if (k < rc.startup_be_steps) {
        next = be_step(op, cur, rc.dt);
        if (nonlinear) have_prev = false;  // restart the AB window after smoothing
      } else if (!nonlinear) {
        next = cn_step(op, cur, rc.dt);
      } else {
        next = step_nonlinear(op, c, have_prev ? &prev_for_ab : nullptr, cur,
                              rc.dt, blowup);
        prev_for_ab = cur;
        have_prev = true;
      }
    } catch (const BlowupError& e) {
      traj.blowup_time = e.t;
      return traj;
    }
    if (!next.finite()) {
      traj.blowup_time = next.t;
      return traj;
    }
    const double E_cur = energy(next, g);
    traj.records.push_back(make_record(op, c, next, &cur, rc.dt, E_cur, E_prev, nonlinear));
    cur = std::move(next);
    E_prev = E_cur;
    if ((k + 1) % rc.snapshot_stride == 0 || k + 1 == nsteps)
      traj.snapshots.push_back(cur);
  }
  return traj;
}

}  // namespace bsq5
