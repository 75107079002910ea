#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "bsq5/config.hpp"
#include "bsq5/diagnostics.hpp"
#include "bsq5/io.hpp"
#include "bsq5/model.hpp"
#include "bsq5/rng.hpp"
#include "bsq5/spectral.hpp"
#include "bsq5/timestepper.hpp"
#include "bsq5/version.hpp"

using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_path;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string command_line;
};

bsq5::Config load_config(const GlobalOpts& g) {
  if (g.config_path.empty()) return {};
  return bsq5::Config::parse_file(g.config_path);
}

// config value unless the CLI flag was given (flags win)
double pick(const CLI::Option* opt, double cli_value, const bsq5::Config& cfg,
            const std::string& key, double fallback) {
  if (opt != nullptr && opt->count() > 0) return cli_value;
  if (auto v = cfg.get_double(key)) return *v;
  return fallback;
}

struct CoefficientCli {
  double alpha = 1.0, beta = 1.0;
  double a = 0.0, b = 1.0, a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
  double alpha1 = 1.0, alpha2 = 1.0;
  double L = 1.0;
  CLI::Option *o_alpha = nullptr, *o_beta = nullptr;
  CLI::Option *o_a = nullptr, *o_b = nullptr, *o_a1 = nullptr, *o_a2 = nullptr,
              *o_a3 = nullptr, *o_a4 = nullptr;
  CLI::Option *o_alpha1 = nullptr, *o_alpha2 = nullptr, *o_L = nullptr;

  void attach(CLI::App* cmd) {
    o_alpha = cmd->add_option("--alpha", alpha, "amplitude ratio (derivation path)");
    o_beta = cmd->add_option("--beta", beta, "depth-squared ratio (derivation path)");
    o_a = cmd->add_option("--a", a, "third-order dispersion coefficient");
    o_b = cmd->add_option("--b", b, "fifth-order dispersion coefficient");
    o_a1 = cmd->add_option("--a1", a1, "nonlinear coefficient a1");
    o_a2 = cmd->add_option("--a2", a2, "nonlinear coefficient a2");
    o_a3 = cmd->add_option("--a3", a3, "nonlinear coefficient a3");
    o_a4 = cmd->add_option("--a4", a4, "nonlinear coefficient a4");
    o_alpha1 = cmd->add_option("--alpha1", alpha1, "left feedback gain");
    o_alpha2 = cmd->add_option("--alpha2", alpha2, "right feedback gain");
    o_L = cmd->add_option("--L", L, "domain length");
  }

  // Direct coefficients when --a/--b given (or in config); otherwise the
  // canonical derivation from (alpha, beta).
  bsq5::ModelCoefficients resolve(const bsq5::Config& cfg) const {
    const double gl = pick(o_alpha1, alpha1, cfg, "alpha1", 1.0);
    const double gr = pick(o_alpha2, alpha2, cfg, "alpha2", 1.0);
    const double len = pick(o_L, L, cfg, "L", 1.0);
    const bool direct = (o_a && o_a->count() > 0) || (o_b && o_b->count() > 0) ||
                        cfg.has("a") || cfg.has("b");
    if (direct) {
      bsq5::ModelCoefficients c;
      c.a = pick(o_a, a, cfg, "a", 0.0);
      c.b = pick(o_b, b, cfg, "b", 1.0);
      c.a1 = pick(o_a1, a1, cfg, "a1", 0.0);
      c.a2 = pick(o_a2, a2, cfg, "a2", 0.0);
      c.a3 = pick(o_a3, a3, cfg, "a3", 0.0);
      c.a4 = pick(o_a4, a4, cfg, "a4", 0.0);
      c.alpha1 = gl;
      c.alpha2 = gr;
      c.L = len;
      const auto rep = bsq5::validate_coefficients(c);
      if (!rep.all_pass()) {
        std::string msg = "invalid coefficients:";
        for (const auto& chk : rep.checks)
          if (!chk.pass) msg += " [" + chk.name + "]";
        throw std::invalid_argument(msg);
      }
      return c;
    }
    bsq5::PhysicalParameters p = bsq5::PhysicalParameters::canonical(
        pick(o_alpha, alpha, cfg, "alpha", 1.0), pick(o_beta, beta, cfg, "beta", 1.0));
    if (auto t = cfg.get_double("theta_sq")) p.theta_sq = *t;
    if (auto t = cfg.get_double("tau")) p.tau = *t;
    return bsq5::derive_coefficients(p, gl, gr, len);
  }
};

bsq5::State make_initial_condition(const std::string& kind, std::uint64_t seed,
                                   const bsq5::Grid& g, const std::string& file) {
  bsq5::State s(g);
  const int N = g.N;
  if (kind == "random") {
    bsq5::Rng rng(seed);
    const int kmax = std::max(3, N / 8);  // smooth spectral cutoff
    std::vector<double> ce(kmax + 1), cu(kmax + 1);
    for (int k = 1; k <= kmax; ++k) {
      ce[k] = rng.normal() / k;
      cu[k] = rng.normal() / k;
    }
    for (int j = 0; j <= N; ++j) {
      const double x = g.node(j);
      double e = 0.0, u = 0.0;
      for (int k = 1; k <= kmax; ++k) {
        const double sk = std::sin(k * M_PI * x / g.L);
        e += ce[k] * sk;
        u += cu[k] * sk;
      }
      s.eta[j] = e;
      s.u[j] = u;
    }
  } else if (kind == "gaussian-bump") {
    const double sigma = g.L / 12.0;
    for (int j = 0; j <= N; ++j) {
      const double x = g.node(j) - 0.5 * g.L;
      s.eta[j] = std::exp(-0.5 * x * x / (sigma * sigma));
      s.u[j] = 0.0;
    }
  } else if (kind == "sine-packet") {
    for (int j = 0; j <= N; ++j) {
      const double x = g.node(j);
      const double env = std::pow(std::sin(M_PI * x / g.L), 3);
      s.eta[j] = env * std::cos(6.0 * M_PI * x / g.L);
      s.u[j] = env * std::sin(4.0 * M_PI * x / g.L);
    }
  } else if (kind == "file") {
    auto [st, grid] = bsq5::read_checkpoint_file(file);
    if (grid.N != g.N || std::abs(grid.L - g.L) > 1e-12)
      throw std::invalid_argument("initial condition file does not match the grid");
    return st;
  } else {
    throw std::invalid_argument("unknown initial-condition kind: " + kind);
  }
  // project onto the boundary constraints: pinned rows are overwritten
  s.eta[0] = s.eta[N] = s.u[0] = s.u[N] = 0.0;
  return s;
}

void emit_json(const GlobalOpts& g, json j) {
  j["command"] = g.command_line;
  std::cout << j.dump(2) << "\n";
  if (!g.out_path.empty()) {
    std::ofstream os(g.out_path + ".json");
    if (!os) throw std::runtime_error("cannot write " + g.out_path + ".json");
    os << j.dump(2) << "\n";
  }
}

bsq5::Provenance make_provenance(const GlobalOpts& g,
                                 std::vector<std::pair<std::string, std::string>> params) {
  bsq5::Provenance p;
  p.command_line = g.command_line;
  p.version = bsq5::kVersion;
  p.parameters = std::move(params);
  return p;
}

json coefficients_json(const bsq5::ModelCoefficients& c) {
  return json{{"a", c.a},   {"b", c.b},   {"a1", c.a1},       {"a2", c.a2},
              {"a3", c.a3}, {"a4", c.a4}, {"alpha1", c.alpha1}, {"alpha2", c.alpha2},
              {"L", c.L}};
}

// fan out [0, n) to a pool of `jobs` workers; results merged by index
template <typename F>
void parallel_for(int n, int jobs, F&& f) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&]() {
      for (int i = next++; i < n; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------- commands

int cmd_derive(const GlobalOpts& g, const CoefficientCli& cc,
               const CLI::Option* o_theta, double theta_sq,
               const CLI::Option* o_tau, double tau) {
  const auto cfg = load_config(g);
  bsq5::PhysicalParameters p = bsq5::PhysicalParameters::canonical(
      pick(cc.o_alpha, cc.alpha, cfg, "alpha", 1.0),
      pick(cc.o_beta, cc.beta, cfg, "beta", 1.0));
  p.theta_sq = pick(o_theta, theta_sq, cfg, "theta_sq", p.theta_sq);
  p.tau = pick(o_tau, tau, cfg, "tau", p.tau);
  const double gl = pick(cc.o_alpha1, cc.alpha1, cfg, "alpha1", 1.0);
  const double gr = pick(cc.o_alpha2, cc.alpha2, cfg, "alpha2", 1.0);
  const double len = pick(cc.o_L, cc.L, cfg, "L", 1.0);
  const auto c = bsq5::derive_coefficients(p, gl, gr, len);
  const auto rep = bsq5::validate_coefficients(c);

  json jr = json::array();
  for (const auto& chk : rep.checks)
    jr.push_back({{"constraint", chk.name}, {"pass", chk.pass}, {"value", chk.value}});
  json out = {{"version", bsq5::kVersion},
              {"physical", {{"alpha", p.alpha}, {"beta", p.beta},
                            {"theta_sq", p.theta_sq}, {"tau", p.tau}}},
              {"coefficients", coefficients_json(c)},
              {"identity_residual", bsq5::coefficient_identity_residual(p.theta_sq, p.tau)},
              {"validation", jr},
              {"flags", rep.flags}};
  emit_json(g, out);
  return 0;
}

struct SimOpts {
  std::string mode = "linear";
  std::string bc = "dissipative";
  bool bc_given = false;
  int N = 128;
  double dt = 1e-3;
  double T = 1.0;
  std::string ic = "random";
  std::string ic_file;
  std::string format = "csv";
  int stride = 1;
  int startup_be = 0;
  double window_start = -1.0, window_end = -1.0;
  double blowup = 0.0;
  double rho_hat = 0.0;
};

json run_summary(const bsq5::Trajectory& traj, const bsq5::ModelCoefficients& c,
                 const SimOpts& so) {
  json out;
  out["version"] = bsq5::kVersion;
  out["coefficients"] = coefficients_json(c);
  out["mode"] = so.mode;
  out["bc"] = so.bc;
  out["N"] = so.N;
  out["dt"] = so.dt;
  out["T"] = so.T;
  out["steps"] = traj.records.size() - 1;
  out["E0"] = traj.records.front().E;
  out["ET"] = traj.records.back().E;
  double max_resid = 0.0;
  for (size_t k = 1; k < traj.records.size(); ++k)
    max_resid = std::max(max_resid, std::abs(traj.records[k].dis_residual));
  out["max_dis_residual"] = max_resid;
  out["warnings"] = traj.warnings;
  if (traj.blowup_time) out["blowup_time"] = *traj.blowup_time;

  const double T = traj.records.back().t;
  const double t0 = (so.window_start >= 0) ? so.window_start : 0.4 * T;
  const double t1 = (so.window_end >= 0) ? so.window_end : T;
  if (so.bc == "dissipative" && !traj.blowup_time) {
    try {
      const auto fit = bsq5::fit_decay(traj.records, t0, t1);
      out["decay"] = {{"mu0", fit.mu0}, {"C0", fit.C0}, {"r2", fit.r2},
                      {"window", {fit.t_start, fit.t_end}}};
      out["kato_ratio"] = bsq5::kato_ratio(traj);
      out["observability_ratio"] = bsq5::observability_ratio(traj);
      out["flux_observability_constant"] = bsq5::flux_observability_constant(traj, c);
      out["weighted_identity_residual"] = bsq5::weighted_identity_residual(traj, c, T);
    } catch (const std::exception& e) {
      out["diagnostics_error"] = e.what();
    }
  }
  if (so.bc == "conservative") {
    try {
      out["kato_ratio"] = bsq5::kato_ratio(traj);
      out["trace_ratio"] = bsq5::trace_ratio(traj);
    } catch (const std::exception& e) {
      out["diagnostics_error"] = e.what();
    }
  }
  return out;
}

int cmd_simulate(const GlobalOpts& g, const CoefficientCli& cc, SimOpts so) {
  const auto cfg = load_config(g);
  auto c = cc.resolve(cfg);
  if (so.mode == "conservative") {
    if (so.bc_given && so.bc != "conservative")
      throw std::invalid_argument(
          "conservative mode runs the conservative boundary conditions; "
          "conflicting --bc " + so.bc);
    so.bc = "conservative";
  }
  const auto grid = bsq5::make_grid(c.L, so.N);
  const auto family = bsq5::bc_family_from_string(so.bc);
  const auto op = bsq5::assemble_operator(c, grid, family);
  const auto s0 = make_initial_condition(so.ic, g.seed, grid, so.ic_file);

  bsq5::RunConfig rc;
  rc.dt = so.dt;
  rc.T = so.T;
  rc.mode = bsq5::mode_from_string(so.mode);
  rc.snapshot_stride = so.stride;
  rc.startup_be_steps = so.startup_be;
  if (so.blowup > 0) rc.blowup_threshold = so.blowup;
  if (so.rho_hat > 0) rc.smallness_threshold = so.rho_hat;
  if (rc.mode != bsq5::Mode::Nonlinear) {
    c.a1 = c.a2 = c.a3 = c.a4 = 0.0;  // linear paths ignore nonlinear terms
  }

  const auto traj = bsq5::run(op, c, s0, rc);

  auto prov = make_provenance(
      g, {{"mode", so.mode}, {"bc", so.bc}, {"N", std::to_string(so.N)},
          {"dt", std::to_string(so.dt)}, {"T", std::to_string(so.T)},
          {"seed", std::to_string(g.seed)}, {"L", std::to_string(c.L)}});
  if (!g.out_path.empty()) {
    std::ofstream e(g.out_path + "_energy.csv");
    bsq5::write_energy_csv(e, traj, prov);
    if (so.format == "bin") {
      std::ofstream t(g.out_path + "_trajectory.bin", std::ios::binary);
      bsq5::write_trajectory_bin(t, traj, so.dt, rc.mode);
    } else {
      std::ofstream t(g.out_path + "_trajectory.csv");
      bsq5::write_trajectory_csv(t, traj, prov);
    }
    bsq5::write_checkpoint_file(g.out_path + "_final.bin", traj.snapshots.back(),
                                grid);
  }
  emit_json(g, run_summary(traj, c, so));
  return traj.blowup_time ? 2 : 0;
}

int cmd_decay_fit(const GlobalOpts& g, const CoefficientCli& cc, SimOpts so) {
  so.bc = "dissipative";
  so.mode = "linear";
  if (so.startup_be == 0) so.startup_be = 8;
  return cmd_simulate(g, cc, so);
}

int cmd_identities(const GlobalOpts& g, const CoefficientCli& cc,
                   const std::vector<int>& Ns, double dt_over_h, double T,
                   const std::string& bc) {
  const auto cfg = load_config(g);
  const auto c = cc.resolve(cfg);
  const auto family = bsq5::bc_family_from_string(bc);

  json rows = json::array();
  std::vector<double> r1s, r2s, drifts;
  for (int N : Ns) {
    const auto grid = bsq5::make_grid(c.L, N);
    const auto op = bsq5::assemble_operator(c, grid, family);
    bsq5::State s0(grid);
    for (int j = 0; j <= N; ++j) {
      const double x = grid.node(j);
      const double sp = std::sin(M_PI * x / c.L);
      s0.eta[j] = sp * sp * sp * (1.0 + 0.3 * std::sin(2.0 * M_PI * x / c.L + 0.7));
      s0.u[j] = sp * sp * sp * (1.0 - 0.4 * std::cos(M_PI * x / c.L));
    }
    s0.eta[0] = s0.eta[N] = s0.u[0] = s0.u[N] = 0.0;
    const double n0 = std::sqrt(bsq5::norm_sq(s0, grid));
    for (auto& v : s0.eta) v /= n0;
    for (auto& v : s0.u) v /= n0;

    bsq5::RunConfig rc;
    rc.dt = dt_over_h * grid.h();
    rc.T = T;
    rc.mode = bsq5::Mode::Linear;
    rc.snapshot_stride = 1 << 20;  // identity runs only need records
    const auto traj = bsq5::run(op, c, s0, rc);

    double flux = 0.0, maxinc = 0.0;
    for (size_t k = 1; k < traj.records.size(); ++k) {
      const auto& r = traj.records[k];
      flux += rc.dt * (c.alpha1 * c.b * r.eta_xx_0 * r.eta_xx_0 +
                       c.alpha2 * c.b * r.eta_xx_L * r.eta_xx_L);
      maxinc = std::max(maxinc, traj.records[k].E - traj.records[k - 1].E);
    }
    const double E0 = traj.records.front().E, ET = traj.records.back().E;
    const double r1 = std::abs(E0 - ET - flux);
    const double r2 = std::abs(bsq5::weighted_identity_residual(traj, c, T));
    const double drift = std::abs(ET - E0) / E0;
    rows.push_back({{"N", N}, {"flux_identity_residual", r1},
                    {"weighted_identity_residual", r2},
                    {"max_energy_increase", maxinc}, {"relative_drift", drift}});
    r1s.push_back(r1);
    r2s.push_back(r2);
    drifts.push_back(drift);
  }
  json out = {{"version", bsq5::kVersion}, {"bc", bc},
              {"coefficients", coefficients_json(c)}, {"rows", rows}};
  if (Ns.size() >= 2) {
    const double span = std::log2(static_cast<double>(Ns.back()) / Ns.front());
    out["flux_identity_order"] = std::log2(r1s.front() / r1s.back()) / span;
    out["weighted_identity_order"] = std::log2(r2s.front() / r2s.back()) / span;
  }
  emit_json(g, out);
  return 0;
}

int cmd_spectrum(const GlobalOpts& g, const CoefficientCli& cc, const std::string& bc,
                 int N, const std::string& dump_path) {
  const auto cfg = load_config(g);
  const auto c = cc.resolve(cfg);
  const auto grid = bsq5::make_grid(c.L, N);
  const auto op = bsq5::assemble_operator(c, grid, bsq5::bc_family_from_string(bc));
  if (!dump_path.empty()) {
    std::ofstream os(dump_path);
    if (!os) throw std::runtime_error("cannot write " + dump_path);
    op.dump_triplets(os);
  }
  const auto lam = bsq5::discrete_spectrum(op);

  double absc = -1e300, maxmod = 0.0, maxre = 0.0;
  json arr = json::array();
  for (const auto& z : lam) {
    arr.push_back({z.real(), z.imag()});
    absc = std::max(absc, z.real());
    maxmod = std::max(maxmod, std::abs(z));
    maxre = std::max(maxre, std::abs(z.real()));
  }
  emit_json(g, {{"version", bsq5::kVersion}, {"bc", bc}, {"N", N},
                {"coefficients", coefficients_json(c)},
                {"abscissa", absc},
                {"max_relative_real_part", maxmod > 0 ? maxre / maxmod : 0.0},
                {"eigenvalues", arr}});
  return 0;
}

int cmd_qroots(const GlobalOpts& g, double a, double b, double r) {
  const bsq5::QPolynomial p{a, b, r};
  const auto rs = bsq5::q_roots(p);
  json jroots = json::array();
  for (const auto& z : rs.roots) jroots.push_back({z.real(), z.imag()});
  json jreal = json::array();
  for (const auto& z : rs.real_roots) jreal.push_back(z.real());
  json jpairs = json::array();
  for (const auto& [up, dn] : rs.conjugate_pairs)
    jpairs.push_back({{up.real(), up.imag()}, {dn.real(), dn.imag()}});
  emit_json(g, {{"version", bsq5::kVersion}, {"a", a}, {"b", b}, {"r", r},
                {"roots", jroots}, {"real_roots", jreal},
                {"conjugate_pairs", jpairs}, {"max_residual", rs.max_residual},
                {"claim", rs.matches_claim()}});
  return 0;
}

int cmd_mobius_scan(const GlobalOpts& g, double a, double b, double r, double Lmin,
                    double Lmax, int numL) {
  const bsq5::QPolynomial p{a, b, r};
  const auto rs = bsq5::q_roots(p);
  if (rs.conjugate_pairs.size() != 2)
    throw std::runtime_error("mobius-scan: polynomial does not have two conjugate pairs");
  const auto pts = rs.nonreal_ordered();

  std::vector<double> Ls(numL), mm(numL);
  for (int i = 0; i < numL; ++i)
    Ls[i] = Lmin * std::pow(Lmax / Lmin, numL == 1 ? 0.0 : double(i) / (numL - 1));
  parallel_for(numL, g.jobs, [&](int i) {
    const auto chk = bsq5::mobius_feasibility(std::span<const bsq5::Complex, 4>(pts), Ls[i]);
    mm[i] = chk.degenerate ? std::numeric_limits<double>::infinity() : chk.mismatch;
  });

  double best = 1e300;
  int arg = 0;
  for (int i = 0; i < numL; ++i)
    if (mm[i] < best) {
      best = mm[i];
      arg = i;
    }
  if (!g.out_path.empty()) {
    std::ofstream os(g.out_path + "_mismatch.csv");
    auto prov = make_provenance(g, {{"a", std::to_string(a)}, {"b", std::to_string(b)},
                                    {"r", std::to_string(r)}});
    prov.write(os);
    os << "L,mismatch\n";
    os.precision(17);
    for (int i = 0; i < numL; ++i) os << Ls[i] << "," << mm[i] << "\n";
  }
  const auto cr = bsq5::cross_ratio(pts[0], pts[1], pts[2], pts[3]);
  emit_json(g, {{"version", bsq5::kVersion}, {"a", a}, {"b", b}, {"r", r},
                {"cross_ratio", {cr.real(), cr.imag()}},
                {"min_mismatch", best}, {"argmin_L", Ls[arg]},
                {"samples", numL}});
  return 0;
}

int cmd_convergence(const GlobalOpts& g, const CoefficientCli& cc,
                    const std::vector<int>& Ns, double dt_over_h, double T,
                    const std::string& bc) {
  const auto cfg = load_config(g);
  const auto c = cc.resolve(cfg);
  const auto family = bsq5::bc_family_from_string(bc);

  std::vector<json> rows(Ns.size());
  parallel_for(static_cast<int>(Ns.size()), g.jobs, [&](int i) {
    const int N = Ns[i];
    const auto grid = bsq5::make_grid(c.L, N);
    const auto op = bsq5::assemble_operator(c, grid, family);
    bsq5::State s0(grid);
    for (int j = 0; j <= N; ++j) {
      const double sp = std::sin(M_PI * grid.node(j) / c.L);
      s0.eta[j] = sp * sp * sp * sp;
      s0.u[j] = 0.6 * sp * sp * sp * sp;
    }
    const double n0 = std::sqrt(bsq5::norm_sq(s0, grid));
    for (auto& v : s0.eta) v /= n0;
    for (auto& v : s0.u) v /= n0;
    bsq5::RunConfig rc;
    rc.dt = dt_over_h * grid.h();
    rc.T = T;
    rc.mode = bsq5::Mode::Linear;
    rc.snapshot_stride = 1 << 20;
    const auto traj = bsq5::run(op, c, s0, rc);
    double drift = 0.0;
    const double E0 = traj.records.front().E;
    for (const auto& rec : traj.records)
      drift = std::max(drift, std::abs(rec.E - E0) / E0);
    rows[i] = {{"N", N}, {"relative_drift", drift}};
  });
  json out = {{"version", bsq5::kVersion}, {"bc", bc},
              {"coefficients", coefficients_json(c)}, {"rows", rows}};
  if (Ns.size() >= 2) {
    const double d0 = rows.front()["relative_drift"].get<double>();
    const double d1 = rows.back()["relative_drift"].get<double>();
    out["drift_order"] =
        std::log2(d0 / d1) / std::log2(static_cast<double>(Ns.back()) / Ns.front());
  }
  emit_json(g, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOpts g;
  {
    std::ostringstream cl;
    for (int i = 0; i < argc; ++i) cl << (i ? " " : "") << argv[i];
    g.command_line = cl.str();
  }

  CLI::App app{"fifth-order Boussinesq boundary-feedback laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.add_option("--config", g.config_path, "flat key=value configuration file");
  app.add_option("--out", g.out_path, "output path prefix");
  app.add_option("--jobs", g.jobs, "worker pool size for sweep commands");
  app.add_option("--seed", g.seed, "seed for random initial data");

  auto* cder = app.add_subcommand("derive-coeffs", "derive model coefficients");
  CoefficientCli cc_der;
  cc_der.attach(cder);
  double der_theta = 0.0, der_tau = 0.0;
  auto* o_theta = cder->add_option("--theta-sq", der_theta,
                                   "velocity-potential height squared");
  auto* o_tau = cder->add_option("--tau", der_tau, "surface tension");

  auto* csim = app.add_subcommand("simulate", "advance the system in time");
  CoefficientCli cc_sim;
  cc_sim.attach(csim);
  SimOpts so;
  csim->add_option("--mode", so.mode, "linear|conservative|nonlinear");
  auto* o_simbc = csim->add_option("--bc", so.bc, "dissipative|conservative|clamped");
  csim->add_option("--format", so.format, "trajectory output: csv|bin");
  csim->add_option("--N", so.N, "cell count");
  csim->add_option("--dt", so.dt, "time step");
  csim->add_option("--T", so.T, "horizon");
  csim->add_option("--ic", so.ic, "random|gaussian-bump|sine-packet|file");
  csim->add_option("--ic-file", so.ic_file, "checkpoint path for --ic file");
  csim->add_option("--stride", so.stride, "snapshot stride");
  csim->add_option("--startup-be", so.startup_be, "backward-Euler startup steps");
  csim->add_option("--blowup-threshold", so.blowup, "max-norm abort threshold");
  csim->add_option("--smallness", so.rho_hat, "smallness bound on the initial norm");

  auto* cfit = app.add_subcommand("decay-fit", "dissipative run plus decay-rate fit");
  CoefficientCli cc_fit;
  cc_fit.attach(cfit);
  SimOpts sf;
  cfit->add_option("--N", sf.N, "cell count");
  cfit->add_option("--dt", sf.dt, "time step");
  cfit->add_option("--T", sf.T, "horizon");
  cfit->add_option("--ic", sf.ic, "random|gaussian-bump|sine-packet|file");
  cfit->add_option("--ic-file", sf.ic_file, "checkpoint path for --ic file");
  cfit->add_option("--startup-be", sf.startup_be, "backward-Euler startup steps (default 8)");
  cfit->add_option("--window-start", sf.window_start, "fit window start (default 0.4 T)");
  cfit->add_option("--window-end", sf.window_end, "fit window end (default T)");

  auto* cid = app.add_subcommand("identities", "energy-identity residual study");
  CoefficientCli cc_id;
  cc_id.attach(cid);
  std::vector<int> id_Ns{64, 128, 256};
  double id_doh = 0.25, id_T = 2.0;
  std::string id_bc = "dissipative";
  cid->add_option("--N-list", id_Ns, "grid sizes");
  cid->add_option("--dt-over-h", id_doh, "dt = c * h");
  cid->add_option("--T", id_T, "horizon");
  cid->add_option("--bc", id_bc, "boundary-condition family");

  auto* cspec = app.add_subcommand("spectrum", "discrete operator eigenvalues");
  CoefficientCli cc_spec;
  cc_spec.attach(cspec);
  std::string sp_bc = "dissipative";
  int sp_N = 128;
  std::string sp_dump;
  cspec->add_option("--bc", sp_bc, "boundary-condition family");
  cspec->add_option("--N", sp_N, "cell count");
  cspec->add_option("--dump-operator", sp_dump, "write the operator as triplets");

  auto* cq = app.add_subcommand("qroots", "roots of the characteristic quintic");
  double q_a = 1.0, q_b = 1.0, q_r = 0.0;
  cq->add_option("--a", q_a, "cubic coefficient")->required();
  cq->add_option("--b", q_b, "quintic coefficient")->required();
  cq->add_option("--r", q_r, "constant term (spectral parameter)");

  auto* cm = app.add_subcommand("mobius-scan", "cross-ratio mismatch over lengths");
  double m_a = 1.0, m_b = 1.0, m_r = 0.0, m_Lmin = 0.01, m_Lmax = 100.0;
  int m_num = 10000;
  cm->add_option("--a", m_a, "cubic coefficient")->required();
  cm->add_option("--b", m_b, "quintic coefficient")->required();
  cm->add_option("--r", m_r, "constant term");
  cm->add_option("--L-min", m_Lmin, "scan start");
  cm->add_option("--L-max", m_Lmax, "scan end");
  cm->add_option("--num-L", m_num, "number of lengths (log-spaced)");

  auto* cconv = app.add_subcommand("convergence", "refinement study of energy drift");
  CoefficientCli cc_conv;
  cc_conv.attach(cconv);
  std::vector<int> cv_Ns{128, 256, 512};
  double cv_doh = 0.25, cv_T = 1.0;
  std::string cv_bc = "conservative";
  cconv->add_option("--N-list", cv_Ns, "grid sizes");
  cconv->add_option("--dt-over-h", cv_doh, "dt = c * h");
  cconv->add_option("--T", cv_T, "horizon");
  cconv->add_option("--bc", cv_bc, "boundary-condition family");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (cder->parsed()) return cmd_derive(g, cc_der, o_theta, der_theta, o_tau, der_tau);
    if (csim->parsed()) {
      so.bc_given = o_simbc->count() > 0;
      return cmd_simulate(g, cc_sim, so);
    }
    if (cfit->parsed()) return cmd_decay_fit(g, cc_fit, sf);
    if (cid->parsed()) return cmd_identities(g, cc_id, id_Ns, id_doh, id_T, id_bc);
    if (cspec->parsed()) return cmd_spectrum(g, cc_spec, sp_bc, sp_N, sp_dump);
    if (cq->parsed()) return cmd_qroots(g, q_a, q_b, q_r);
    if (cm->parsed()) return cmd_mobius_scan(g, m_a, m_b, m_r, m_Lmin, m_Lmax, m_num);
    if (cconv->parsed()) return cmd_convergence(g, cc_conv, cv_Ns, cv_doh, cv_T, cv_bc);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const bsq5::BlowupError& e) {
    std::cerr << "numerical failure: " << e.what() << " at t = " << e.t << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
