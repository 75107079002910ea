#pragma once

#include <array>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "bsq5/operator.hpp"

namespace bsq5 {

using Complex = std::complex<double>;

/// q(xi) = b xi^5 + a xi^3 + xi + r with b > 0 and 4b > a^2.
struct QPolynomial {
  double a = 0.0;
  double b = 1.0;
  double r = 0.0;

  void validate() const;  // throws std::invalid_argument
  Complex eval(Complex xi) const;
  Complex deriv(Complex xi) const;
};

/// Roots of q with conjugate-pair bookkeeping. Roots are sorted by
/// (Re, Im); conjugate pairs are stored (upper, lower) sorted by real part.
struct RootStructure {
  std::array<Complex, 5> roots{};
  std::array<int, 5> multiplicity{};  // cluster size of each root
  std::vector<Complex> real_roots;
  std::vector<std::pair<Complex, Complex>> conjugate_pairs;
  double max_residual = 0.0;  // max |q(root)| over the returned roots

  bool matches_claim() const {
    return real_roots.size() == 1 && conjugate_pairs.size() == 2;
  }
  /// The four non-real roots ordered (xi1, xi2, conj(xi1), conj(xi2)) with
  /// xi1, xi2 the upper-half roots sorted by real part.
  std::array<Complex, 4> nonreal_ordered() const;
};

/// Companion-matrix eigenvalues polished by Newton steps.
RootStructure q_roots(const QPolynomial& p);

/// True iff q has exactly one simple real root and two conjugate pairs.
bool classify_claim(const QPolynomial& p);

/// Complex trace parameters (alpha1..alpha4).
struct AlphaVector {
  Complex a1, a2, a3, a4;
  bool all_zero() const;
};

/// N_alpha(xi, L) = alpha1 i xi - alpha2 i xi e^{-i xi L} + alpha3 - alpha4 e^{-i xi L}.
Complex n_alpha(Complex xi, double L, const AlphaVector& alpha);

/// d(alpha) = alpha1*alpha3 - alpha2*alpha4.
Complex discriminant(const AlphaVector& alpha);

/// alpha1*alpha4 - alpha2*alpha3: the determinant-type quantity that decides
/// whether xi -> (alpha1 i xi + alpha3)/(alpha2 i xi + alpha4) degenerates to
/// a constant, i.e. whether N_alpha factorizes into a linear term times
/// (c - e^{-i xi L}).
Complex mobius_determinant(const AlphaVector& alpha);

/// Fixed project-wide convention: ((z1-z3)(z2-z4)) / ((z1-z4)(z2-z3)).
/// Throws std::invalid_argument on coincident points.
Complex cross_ratio(Complex z1, Complex z2, Complex z3, Complex z4);

/// Mobius map z -> (p z + q)/(r z + s), p s - q r != 0.
struct MobiusMap {
  Complex p{1.0}, q{0.0}, r{0.0}, s{1.0};
  Complex det() const { return p * s - q * r; }
  Complex operator()(Complex z) const { return (p * z + q) / (r * z + s); }
};

struct MobiusCheck {
  bool feasible = false;
  double mismatch = 0.0;
  bool degenerate = false;  // coincident points or images
};

/// A Mobius map through the four point pairs exists iff the cross-ratios
/// agree; mismatch = |CR(points) - CR(images)|, feasible iff it is below
/// 1e-10 * (1 + |CR(points)|).
MobiusCheck mobius_interpolation_mismatch(std::span<const Complex, 4> points,
                                          std::span<const Complex, 4> images);

/// Feasibility of M(xi_i) = e^{-i L xi_i} for the four given points.
MobiusCheck mobius_feasibility(std::span<const Complex, 4> points, double L);

/// Imaginary parts of the zeros of N_alpha(., L) in the degenerate case
/// (alpha1, alpha3) parallel to (alpha2, alpha4); at most two values
/// (linear-factor zero and the e^{-i xi L} = c branch).
/// Throws std::invalid_argument when the factorization condition
/// alpha1*alpha4 = alpha2*alpha3 fails.
std::vector<double> n_alpha_zero_structure(const AlphaVector& alpha, double L);

/// Eigenvalues of the active part of the operator (pinned boundary dofs
/// removed), via a dense solver.
std::vector<Complex> discrete_spectrum(const DiscreteOperator& op);

/// Dense eigenvalues of an arbitrary real matrix (row-major n x n);
/// exposed for test oracles.
std::vector<Complex> dense_eigenvalues(std::span<const double> row_major, int n);

}  // namespace bsq5
