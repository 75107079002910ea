#include "bsq5/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bsq5 {

void QPolynomial::validate() const {
  if (!(b > 0.0)) throw std::invalid_argument("q polynomial: b must be > 0");
  if (!(4.0 * b > a * a))
    throw std::invalid_argument("q polynomial: requires 4b > a^2");
  if (!std::isfinite(r)) throw std::invalid_argument("q polynomial: r must be finite");
}

Complex QPolynomial::eval(Complex xi) const {
  const Complex xi2 = xi * xi;
  return ((b * xi2 + a) * xi2 + 1.0) * xi + r;
}

Complex QPolynomial::deriv(Complex xi) const {
  const Complex xi2 = xi * xi;
  return (5.0 * b * xi2 + 3.0 * a) * xi2 + 1.0;
}

std::array<Complex, 4> RootStructure::nonreal_ordered() const {
  if (conjugate_pairs.size() != 2)
    throw std::logic_error("nonreal_ordered: need exactly two conjugate pairs");
  return {conjugate_pairs[0].first, conjugate_pairs[1].first,
          conjugate_pairs[0].second, conjugate_pairs[1].second};
}

RootStructure q_roots(const QPolynomial& p) {
  p.validate();
  // companion matrix of the monic polynomial x^5 + (a/b) x^3 + (1/b) x + r/b
  Eigen::Matrix<double, 5, 5> C = Eigen::Matrix<double, 5, 5>::Zero();
  const double c0 = p.r / p.b, c1 = 1.0 / p.b, c3 = p.a / p.b;
  C(0, 4) = -c0;
  C(1, 4) = -c1;
  C(3, 4) = -c3;
  for (int i = 1; i < 5; ++i) C(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(C, false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("q_roots: companion eigensolver failed");

  std::array<Complex, 5> roots;
  for (int i = 0; i < 5; ++i) {
    Complex xi = es.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {  // Newton polish
      const Complex d = p.deriv(xi);
      if (std::abs(d) < 1e-30) break;
      const Complex step = p.eval(xi) / d;
      xi -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(xi))) break;
    }
    roots[i] = xi;
  }

  double scale = 0.0;
  for (const Complex& z : roots) scale = std::max(scale, std::abs(z));
  const double imag_tol = 1e-9 * std::max(1.0, scale);

  RootStructure rs;
  std::vector<Complex> upper, lower;
  std::vector<Complex> cleaned;
  for (Complex z : roots) {
    if (std::abs(z.imag()) <= imag_tol) {
      z.imag(0.0);
      rs.real_roots.push_back(z);
      cleaned.push_back(z);
    } else if (z.imag() > 0.0) {
      upper.push_back(z);
    } else {
      lower.push_back(z);
    }
  }
  std::sort(upper.begin(), upper.end(),
            [](const Complex& a2, const Complex& b2) { return a2.real() < b2.real(); });
  // pair each upper root with the nearest conjugate below the axis
  for (const Complex& zu : upper) {
    size_t best = 0;
    double bd = 1e300;
    for (size_t i = 0; i < lower.size(); ++i) {
      const double d = std::abs(std::conj(zu) - lower[i]);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    Complex zl = lower.empty() ? std::conj(zu) : lower[best];
    if (!lower.empty()) lower.erase(lower.begin() + best);
    const Complex z = 0.5 * (zu + std::conj(zl));  // exact conjugate pair
    rs.conjugate_pairs.emplace_back(z, std::conj(z));
    cleaned.push_back(z);
    cleaned.push_back(std::conj(z));
  }
  for (const Complex& z : lower) {  // unpaired leftovers (defensively kept)
    rs.conjugate_pairs.emplace_back(std::conj(z), z);
    cleaned.push_back(std::conj(z));
    cleaned.push_back(z);
  }
  std::sort(rs.conjugate_pairs.begin(), rs.conjugate_pairs.end(),
            [](const auto& x, const auto& y) { return x.first.real() < y.first.real(); });
  std::sort(rs.real_roots.begin(), rs.real_roots.end(),
            [](const Complex& a2, const Complex& b2) { return a2.real() < b2.real(); });
  std::sort(cleaned.begin(), cleaned.end(), [](const Complex& a2, const Complex& b2) {
    return a2.real() != b2.real() ? a2.real() < b2.real() : a2.imag() < b2.imag();
  });
  for (size_t i = 0; i < 5 && i < cleaned.size(); ++i) rs.roots[i] = cleaned[i];

  const double cluster_tol = 1e-7 * std::max(1.0, scale);
  for (int i = 0; i < 5; ++i) {
    int m = 0;
    for (int j = 0; j < 5; ++j)
      if (std::abs(rs.roots[i] - rs.roots[j]) <= cluster_tol) ++m;
    rs.multiplicity[i] = m;
  }

  rs.max_residual = 0.0;
  for (const Complex& z : rs.roots)
    rs.max_residual = std::max(rs.max_residual, std::abs(p.eval(z)));
  return rs;
}

bool classify_claim(const QPolynomial& p) {
  const RootStructure rs = q_roots(p);
  if (!rs.matches_claim()) return false;
  // the single real root must be simple: clusters of roots would show up as
  // a near-zero derivative
  const Complex xr = rs.real_roots.front();
  double scale = 0.0;
  for (const Complex& z : rs.roots) scale = std::max(scale, std::abs(z));
  const double dscale =
      5.0 * p.b * std::pow(scale, 4) + 3.0 * std::abs(p.a) * scale * scale + 1.0;
  return std::abs(p.deriv(xr)) > 1e-8 * dscale;
}

bool AlphaVector::all_zero() const {
  return a1 == Complex{} && a2 == Complex{} && a3 == Complex{} && a4 == Complex{};
}

Complex n_alpha(Complex xi, double L, const AlphaVector& alpha) {
  if (!(L > 0.0)) throw std::invalid_argument("n_alpha: L must be > 0");
  const Complex i(0.0, 1.0);
  const Complex e = std::exp(-i * xi * L);
  return alpha.a1 * i * xi - alpha.a2 * i * xi * e + alpha.a3 - alpha.a4 * e;
}

Complex discriminant(const AlphaVector& alpha) {
  return alpha.a1 * alpha.a3 - alpha.a2 * alpha.a4;
}

Complex mobius_determinant(const AlphaVector& alpha) {
  return alpha.a1 * alpha.a4 - alpha.a2 * alpha.a3;
}

Complex cross_ratio(Complex z1, Complex z2, Complex z3, Complex z4) {
  const Complex d13 = z1 - z3, d24 = z2 - z4, d14 = z1 - z4, d23 = z2 - z3;
  if (d13 == Complex{} || d24 == Complex{} || d14 == Complex{} || d23 == Complex{} ||
      z1 == z2 || z3 == z4)
    throw std::invalid_argument("cross_ratio: coincident points");
  return (d13 * d24) / (d14 * d23);
}

MobiusCheck mobius_interpolation_mismatch(std::span<const Complex, 4> points,
                                          std::span<const Complex, 4> images) {
  MobiusCheck out;
  auto distinct = [](std::span<const Complex, 4> z) {
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (z[i] == z[j]) return false;
    return true;
  };
  if (!distinct(points) || !distinct(images)) {
    out.degenerate = true;
    return out;
  }
  const Complex crp = cross_ratio(points[0], points[1], points[2], points[3]);
  const Complex cri = cross_ratio(images[0], images[1], images[2], images[3]);
  out.mismatch = std::abs(crp - cri);
  out.feasible = out.mismatch < 1e-10 * (1.0 + std::abs(crp));
  return out;
}

MobiusCheck mobius_feasibility(std::span<const Complex, 4> points, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("mobius_feasibility: L must be > 0");
  const Complex i(0.0, 1.0);
  std::array<Complex, 4> images;
  for (int k = 0; k < 4; ++k) images[k] = std::exp(-i * L * points[k]);
  return mobius_interpolation_mismatch(points, images);
}

std::vector<double> n_alpha_zero_structure(const AlphaVector& alpha, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("n_alpha_zero_structure: L must be > 0");
  if (alpha.all_zero())
    throw std::invalid_argument("n_alpha_zero_structure: alpha must be nonzero");
  const double n1 = std::norm(alpha.a1) + std::norm(alpha.a3);
  const double n2 = std::norm(alpha.a2) + std::norm(alpha.a4);
  const double det = std::abs(mobius_determinant(alpha));
  if (det > 1e-10 * (std::sqrt(n1 * n2) + 1e-300))
    throw std::invalid_argument(
        "n_alpha_zero_structure: requires the degenerate case alpha1*alpha4 = alpha2*alpha3");

  std::vector<double> ims;
  auto push = [&](double v) {
    for (double w : ims)
      if (std::abs(v - w) < 1e-9 * (1.0 + std::abs(v))) return;
    ims.push_back(v);
  };

  const Complex i(0.0, 1.0);
  if (n2 >= n1) {
    // N = (alpha2 i xi + alpha4)(c - e^{-i xi L}), c = alpha1/alpha2 = alpha3/alpha4
    const Complex c = (std::abs(alpha.a2) > 0.0) ? alpha.a1 / alpha.a2
                                                 : alpha.a3 / alpha.a4;
    if (std::abs(alpha.a2) > 0.0) push((i * (alpha.a4 / alpha.a2)).imag());
    if (std::abs(c) > 0.0) push(-std::log(std::abs(c)) / L);
  } else {
    // N = (alpha1 i xi + alpha3)(1 - c e^{-i xi L}), c = alpha2/alpha1 = alpha4/alpha3
    const Complex c = (std::abs(alpha.a1) > 0.0) ? alpha.a2 / alpha.a1
                                                 : alpha.a4 / alpha.a3;
    if (std::abs(alpha.a1) > 0.0) push((i * (alpha.a3 / alpha.a1)).imag());
    if (std::abs(c) > 0.0) push(std::log(std::abs(c)) / L);
  }
  std::sort(ims.begin(), ims.end());
  return ims;
}

std::vector<Complex> dense_eigenvalues(std::span<const double> row_major, int n) {
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = row_major[static_cast<size_t>(i) * n + j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense eigensolver failed");
  std::vector<Complex> out(n);
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()(i);
  return out;
}

std::vector<Complex> discrete_spectrum(const DiscreteOperator& op) {
  const int n = op.grid().n_nodes();
  const int N = op.grid().N;
  const int d = 2 * n;
  const auto M = op.dense_stacked();
  // drop the pinned boundary dofs (eta and u at nodes 0 and N)
  std::vector<int> keep;
  keep.reserve(d - 4);
  for (int idx = 0; idx < d; ++idx) {
    const int node = idx % n;
    if (node == 0 || node == N) continue;
    keep.push_back(idx);
  }
  const int m = static_cast<int>(keep.size());
  std::vector<double> sub(static_cast<size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      sub[static_cast<size_t>(i) * m + j] =
          M[static_cast<size_t>(keep[i]) * d + keep[j]];
  return dense_eigenvalues(sub, m);
}

}  // namespace bsq5
