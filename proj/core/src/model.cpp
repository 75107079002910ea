#include "bsq5/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bsq5 {

const double kCanonicalThetaSq = 0.5 - 1.0 / (2.0 * std::sqrt(5.0));

namespace {
constexpr double kParamTol = 1e-12;
}

PhysicalParameters PhysicalParameters::canonical(double alpha, double beta) {
  PhysicalParameters p;
  p.alpha = alpha;
  p.beta = beta;
  p.theta_sq = kCanonicalThetaSq;
  p.tau = 2.0 / 3.0 - kCanonicalThetaSq;
  p.validate();
  return p;
}

void PhysicalParameters::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("physical parameters: alpha must be >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("physical parameters: beta must be > 0");
  if (!(theta_sq >= 0.0 && theta_sq <= 1.0))
    throw std::invalid_argument("physical parameters: theta^2 must lie in [0,1]");
  if (!std::isfinite(tau))
    throw std::invalid_argument("physical parameters: tau must be finite");
}

ModelCoefficients derive_coefficients(const PhysicalParameters& p,
                                      double alpha1, double alpha2, double L) {
  p.validate();
  if (std::abs(p.theta_sq - kCanonicalThetaSq) > kParamTol) {
    std::ostringstream os;
    os << "derive_coefficients: theta^2 must equal 1/2 - 1/(2 sqrt 5) = "
       << kCanonicalThetaSq << " (got " << p.theta_sq << ")";
    throw std::invalid_argument(os.str());
  }
  if (std::abs(p.tau - (2.0 / 3.0 - p.theta_sq)) > kParamTol)
    throw std::invalid_argument("derive_coefficients: tau must equal 2/3 - theta^2");
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0))
    throw std::invalid_argument("derive_coefficients: gains must be >= 0");
  if (!(L > 0.0))
    throw std::invalid_argument("derive_coefficients: L must be > 0");

  const double t = p.theta_sq;
  const double t2 = t * t;
  ModelCoefficients c;
  c.a = 0.5 * p.beta * (t - 1.0 / 3.0);
  c.b = p.beta * p.beta / 120.0 * (25.0 * t2 - 10.0 * t + 1.0);
  c.a1 = p.alpha;
  c.a2 = 0.5 * p.alpha * p.beta * (t - 1.0);
  c.a3 = p.alpha * p.beta;
  c.a4 = p.alpha * p.beta * (2.0 - t);
  c.alpha1 = alpha1;
  c.alpha2 = alpha2;
  c.L = L;

  const ValidationReport rep = validate_coefficients(c);
  if (!rep.all_pass()) {
    std::ostringstream os;
    os << "derive_coefficients: derived coefficients violate";
    for (const auto& chk : rep.checks)
      if (!chk.pass) os << " [" << chk.name << "]";
    throw std::invalid_argument(os.str());
  }
  return c;
}

bool ValidationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

ValidationReport validate_coefficients(const ModelCoefficients& c) {
  ValidationReport rep;
  rep.checks.push_back({"b > 0", c.b > 0.0, c.b});
  rep.checks.push_back({"L > 0", c.L > 0.0, c.L});
  rep.checks.push_back({"alpha1 >= 0", c.alpha1 >= 0.0, c.alpha1});
  rep.checks.push_back({"alpha2 >= 0", c.alpha2 >= 0.0, c.alpha2});
  rep.checks.push_back({"a != b", c.a != c.b, c.a - c.b});
  rep.checks.push_back({"4b > a^2", 4.0 * c.b > c.a * c.a, 4.0 * c.b - c.a * c.a});
  if (c.a < 0.0)
    rep.flags.push_back("a < 0 (canonical derivation sign; the main-text convention has a > 0)");
  if (c.a1 < 0.0 || c.a3 < 0.0 || c.a4 < 0.0 || c.a2 > 0.0)
    rep.flags.push_back("nonlinear coefficient signs differ from the a1>0, a2<0, a3>0, a4>0 convention");
  return rep;
}

double coefficient_identity_residual(double theta_sq, double tau) {
  const double t = theta_sq;
  const double t2 = t * t;
  const double lhs = (25.0 * t2 - 10.0 * t + 1.0) / 120.0;
  const double rhs = (t2 - 6.0 * t + 5.0) / 24.0 + 0.5 * tau * (t - 1.0);
  return std::abs(lhs - rhs);
}

}  // namespace bsq5
