#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsq5/operator.hpp"
#include "bsq5/state.hpp"

namespace bsq5 {

enum class Mode { Linear, Conservative, Nonlinear };
std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);

/// Per-step record: energy, boundary traces and the defect of the energy
/// identity. Traces and nonlinear fluxes are evaluated at the midpoint of
/// the step that produced this record (record 0 uses the initial state).
struct EnergyRecord {
  double t = 0.0;
  double E = 0.0;
  double eta_xx_0 = 0.0, eta_xx_L = 0.0;
  double u_xx_0 = 0.0, u_xx_L = 0.0;
  double nl_flux = 0.0;        // nonlinear part of dE/dt at the midpoint
  double dis_residual = 0.0;   // (E_n - E_{n-1})/dt - identity right-hand side
};

struct RunConfig {
  double dt = 1e-3;
  double T = 1.0;
  Mode mode = Mode::Linear;
  std::optional<double> smallness_threshold;  // rho-hat on ||s0||
  std::optional<double> blowup_threshold;     // default 1e6 * ||s0||_inf
  int snapshot_stride = 1;
  int startup_be_steps = 0;  // backward-Euler startup steps (Rannacher)

  void validate() const;
};

struct Trajectory {
  Grid grid;
  std::vector<State> snapshots;       // every snapshot_stride steps (incl. s0)
  std::vector<EnergyRecord> records;  // every step (incl. t=0)
  std::optional<double> blowup_time;
  std::vector<std::string> warnings;
};

struct BlowupError : std::runtime_error {
  double t;
  explicit BlowupError(double tt)
      : std::runtime_error("solution norm exceeded the blow-up threshold"), t(tt) {}
};

/// One Crank-Nicolson step (I - dt/2 A) s' = (I + dt/2 A) s.
/// The banded factorization is cached on the operator, keyed by dt.
State step_linear(const DiscreteOperator& op, const State& s, double dt);

/// Nonlinear terms of the system evaluated with centered stencils,
/// products formed pointwise before the outer derivative:
///   eta-component: -a1 (eta u)_x - a2 (eta u_xx)_x
///   u-component:   -a1 u u_x - a3 (eta eta_xx)_x - a4 u_x u_xx
State nonlinear_rhs(const ModelCoefficients& c, const State& s, const Grid& g);

/// IMEX step: Crank-Nicolson on the linear part, two-step Adams-Bashforth
/// on the nonlinear part (explicit Euler when s_prev is null).
/// Throws BlowupError when the new state exceeds blowup_threshold in max norm.
State step_nonlinear(const DiscreteOperator& op, const ModelCoefficients& c,
                     const State* s_prev, const State& s, double dt,
                     double blowup_threshold);

/// Advances s0 to time T, collecting energy records each step and snapshots
/// at the configured stride. On blow-up the partial trajectory is returned
/// with blowup_time set.
Trajectory run(const DiscreteOperator& op, const ModelCoefficients& c,
               const State& s0, const RunConfig& rc);

}  // namespace bsq5
