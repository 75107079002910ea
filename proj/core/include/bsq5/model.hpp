#pragma once

#include <string>
#include <vector>

namespace bsq5 {

/// theta^2 = 1/2 - 1/(2*sqrt(5)), the value at which the fifth-order
/// dispersion coefficient identity closes.
extern const double kCanonicalThetaSq;

/// Dimensionless inputs of the two-parameter wave model: amplitude ratio
/// alpha, depth-squared ratio beta, velocity-potential height theta
/// (stored as theta^2) and surface tension tau.
struct PhysicalParameters {
  double alpha = 1.0;
  double beta = 1.0;
  double theta_sq = 0.0;
  double tau = 0.0;

  /// Parameters on the canonical derivation path: theta^2 fixed at
  /// kCanonicalThetaSq and tau = 2/3 - theta^2.
  static PhysicalParameters canonical(double alpha, double beta);

  /// Throws std::invalid_argument when alpha/beta are not positive or
  /// theta_sq lies outside [0,1].
  void validate() const;
};

/// Coefficients of the fifth-order system plus boundary feedback gains and
/// domain length.
struct ModelCoefficients {
  double a = 0.0;
  double b = 1.0;
  double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0;
  double L = 1.0;

  bool is_linear() const {
    return a1 == 0.0 && a2 == 0.0 && a3 == 0.0 && a4 == 0.0;
  }
};

struct ConstraintCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
};

/// Outcome of validate_coefficients: hard constraints plus non-rejecting
/// observations (e.g. the sign of a).
struct ValidationReport {
  std::vector<ConstraintCheck> checks;
  std::vector<std::string> flags;
  bool all_pass() const;
};

/// Derives (a, b, a1..a4) from the physical parameters. Requires the
/// canonical theta^2 and tau = 2/3 - theta^2 (the b-identity does not close
/// elsewhere); throws std::invalid_argument otherwise or when a derived
/// constraint (b > 0, a != b, 4b > a^2) fails.
ModelCoefficients derive_coefficients(const PhysicalParameters& p,
                                      double alpha1, double alpha2, double L);

/// Checks b > 0, L > 0, alpha1 >= 0, alpha2 >= 0, a != b and 4b > a^2.
/// Never throws; a < 0 is flagged but not rejected.
ValidationReport validate_coefficients(const ModelCoefficients& c);

/// Residual of the quintic identity behind the b coefficient,
/// |(25 t^2 - 10 t + 1)/120 - (t^2 - 6t + 5)/24 - (tau/2)(t - 1)| at t = theta^2.
double coefficient_identity_residual(double theta_sq, double tau);

}  // namespace bsq5
