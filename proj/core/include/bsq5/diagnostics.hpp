#pragma once

#include <span>

#include "bsq5/grid.hpp"
#include "bsq5/model.hpp"
#include "bsq5/state.hpp"
#include "bsq5/timestepper.hpp"

namespace bsq5 {

/// E = (1/2) * trapezoid(eta^2 + u^2).
double energy(const State& s, const Grid& g);

/// Trapezoidal L2 inner product weights applied to a stacked pair.
double inner_product(const State& a, const State& b, const Grid& g);
double norm_sq(const State& s, const Grid& g);

/// Squared discrete H2 norm: f^2 + f_x^2 + f_xx^2 for both components,
/// centered differences inside, one-sided second-order at the ends.
double h2_norm_sq(const State& s, const Grid& g);

/// Defect of the energy identity between two consecutive records:
/// (E - E_prev)/dt - [ -alpha1 b tr0^2 - alpha2 b trL^2 + nl_flux ],
/// traces/fluxes taken from `cur` (midpoint values of the step).
double dissipation_residual(const EnergyRecord& prev, const EnergyRecord& cur,
                            const ModelCoefficients& c, double dt);

/// Ratio of the L2(0,T; H2) norm of the trajectory to the L2 norm of the
/// initial data. Uses the trajectory snapshots (trapezoid in t).
/// Throws std::invalid_argument on zero initial data.
double kato_ratio(const Trajectory& traj);

/// int_0^T (eta_xx(L)^2 + u_xx(0)^2) dt / ||s0||_{H2}^2 from the per-step
/// midpoint traces.
double trace_ratio(const Trajectory& traj);

/// ||s0||^2 / int_0^T (eta_xx(0)^2 + eta_xx(L)^2) dt.
/// Throws std::runtime_error (observability failure) when the denominator
/// is below 1e-12 times the numerator.
double observability_ratio(const Trajectory& traj);

/// ||s0||^2 / int_0^T (alpha1 b eta_xx(0)^2 + alpha2 b eta_xx(L)^2) dt —
/// the constant for which E(T) <= (C/(C+1)) E(0) is exact arithmetic up to
/// the scheme defect.
double flux_observability_constant(const Trajectory& traj, const ModelCoefficients& c);

/// Defect of the (T - t)-weighted identity:
/// T*E(0) - int_0^T E dt - int_0^T (T-t)(alpha1 b tr0^2 + alpha2 b trL^2) dt.
double weighted_identity_residual(const Trajectory& traj, const ModelCoefficients& c,
                                  double T);

struct DecayFit {
  double mu0 = 0.0;   // decay rate of the norm: -slope(log E)/2
  double C0 = 0.0;    // prefactor relative to ||s0||
  double t_start = 0.0, t_end = 0.0;
  double r2 = 0.0;
};

/// Least-squares line through (t, log E) on [t_start, t_end].
/// Throws std::invalid_argument when the window holds fewer than 10 samples
/// or E is not strictly positive on it.
DecayFit fit_decay(std::span<const EnergyRecord> records, double t_start, double t_end);

}  // namespace bsq5
