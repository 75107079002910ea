#include "bsq5/operator.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "bsq5/stencils.hpp"

namespace bsq5 {

std::string_view to_string(BcFamily f) {
  switch (f) {
    case BcFamily::Dissipative: return "dissipative";
    case BcFamily::Conservative: return "conservative";
    case BcFamily::Clamped: return "clamped";
  }
  return "?";
}

BcFamily bc_family_from_string(std::string_view s) {
  if (s == "dissipative") return BcFamily::Dissipative;
  if (s == "conservative") return BcFamily::Conservative;
  if (s == "clamped") return BcFamily::Clamped;
  throw std::invalid_argument("unknown boundary-condition family: " + std::string(s));
}

void BandMatrix::matvec(std::span<const double> x, std::span<double> y) const {
  for (int g = 0; g < dim; ++g) {
    const double* row = &a[static_cast<size_t>(g) * 15];
    double acc = 0.0;
    const int lo = std::max(-kHalfBand, -g);
    const int hi = std::min(kHalfBand, dim - 1 - g);
    for (int off = lo; off <= hi; ++off) acc += row[off + kHalfBand] * x[g + off];
    y[g] = acc;
  }
}

BandFactor::BandFactor(const BandMatrix& A, double c) {
  n_ = A.dim;
  constexpr int kl = BandMatrix::kHalfBand;
  constexpr int ku = BandMatrix::kHalfBand;
  const int ldab = 2 * kl + ku + 1;
  ab_.assign(static_cast<size_t>(ldab) * n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    const int ilo = std::max(0, j - ku);
    const int ihi = std::min(n_ - 1, j + kl);
    for (int i = ilo; i <= ihi; ++i) {
      double m = -c * A.get(i, j - i);
      if (i == j) m += 1.0;
      ab_[static_cast<size_t>(j) * ldab + (kl + ku + i - j)] = m;
    }
  }
  ipiv_.resize(n_);
  const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl, ku,
                                         ab_.data(), ldab, ipiv_.data());
  if (info != 0)
    throw std::runtime_error("banded factorization of (I - c A) failed at c = " +
                             std::to_string(c) + " (singular pivot " +
                             std::to_string(info) + ")");
  // smallest |pivot| relative to the largest, as a cheap conditioning proxy
  double pmin = 1e300, pmax = 0.0;
  for (int j = 0; j < n_; ++j) {
    const double p = std::abs(ab_[static_cast<size_t>(j) * ldab + kl + ku]);
    pmin = std::min(pmin, p);
    pmax = std::max(pmax, p);
  }
  rcond_proxy_ = pmax > 0.0 ? pmin / pmax : 0.0;
}

void BandFactor::solve(std::span<double> x) const {
  constexpr int kl = BandMatrix::kHalfBand;
  constexpr int ku = BandMatrix::kHalfBand;
  const int ldab = 2 * kl + ku + 1;
  const lapack_int info =
      LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl, ku, 1, ab_.data(), ldab,
                     ipiv_.data(), x.data(), n_);
  if (info != 0) throw std::runtime_error("banded solve failed");
}

namespace {

// Ghost-extension rows in the scaled variable xi = x/h. A polynomial with
// nbc built-in boundary conditions (p ~ xi^nbc * (...)) is fitted through
// the first four interior values; rows give the ghost values at xi = -1, -2
// and, for nbc = 2, the leading coefficient c2 (so v''(0) = 2 c2 / h^2).
struct FitRows {
  double ghost[2][4];
  double c2[4];
};

FitRows fit_rows(int nbc) {
  double A[4][4];
  for (int j = 0; j < 4; ++j)
    for (int m = 0; m < 4; ++m)
      A[j][m] = std::pow(static_cast<double>(j + 1), nbc + m);
  // invert 4x4 by Gauss-Jordan with partial pivoting
  double inv[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    std::swap(inv[col], inv[piv]);
    const double d = A[col][col];
    for (int k = 0; k < 4; ++k) {
      A[col][k] /= d;
      inv[col][k] /= d;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = A[r][col];
      for (int k = 0; k < 4; ++k) {
        A[r][k] -= f * A[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  FitRows out{};
  for (int k = 0; k < 2; ++k) {
    const double xi = -static_cast<double>(k + 1);
    for (int m = 0; m < 4; ++m) {
      double acc = 0.0;
      for (int p = 0; p < 4; ++p) acc += std::pow(xi, nbc + p) * inv[p][m];
      out.ghost[k][m] = acc;
    }
  }
  for (int m = 0; m < 4; ++m) out.c2[m] = (nbc == 2) ? inv[0][m] : 0.0;
  return out;
}

// ghost(var)[-k] = own[k] @ var[1..4] + cross[k] @ other[1..4] per side
struct SideClosure {
  double eta_own[2][4]{}, eta_cross[2][4]{};
  double u_own[2][4]{}, u_cross[2][4]{};
  double tr_eta_e[4]{}, tr_eta_u[4]{};  // eta_xx trace row
  double tr_u_e[4]{}, tr_u_u[4]{};      // u_xx trace row
};

SideClosure make_side(BcFamily family, int side, double alpha1, double alpha2,
                      double h) {
  static const FitRows f2 = fit_rows(2);
  static const FitRows f3 = fit_rows(3);
  const double inv_h2 = 1.0 / (h * h);
  double q2[4];
  for (int m = 0; m < 4; ++m) q2[m] = 2.0 * f2.c2[m] * inv_h2;

  SideClosure sc;
  auto copy = [](double dst[2][4], const double src[2][4]) {
    for (int k = 0; k < 2; ++k)
      for (int m = 0; m < 4; ++m) dst[k][m] = src[k][m];
  };

  if (family == BcFamily::Clamped) {
    copy(sc.eta_own, f3.ghost);
    copy(sc.u_own, f3.ghost);
    return sc;  // traces identically zero
  }
  if (family == BcFamily::Conservative) {
    if (side == 0) {  // eta_xx(0) = 0
      copy(sc.eta_own, f3.ghost);
      copy(sc.u_own, f2.ghost);
      for (int m = 0; m < 4; ++m) sc.tr_u_u[m] = q2[m];
    } else {  // u_xx(L) = 0
      copy(sc.eta_own, f2.ghost);
      copy(sc.u_own, f3.ghost);
      for (int m = 0; m < 4; ++m) sc.tr_eta_e[m] = q2[m];
    }
    return sc;
  }

  // Dissipative. The constrained combination P = u + s*al*eta has
  // P_xx = 0 at this side (s = +1 left, -1 right); Q = u - s*al*eta is free.
  const double al = (side == 0) ? alpha1 : alpha2;
  const double s = (side == 0) ? 1.0 : -1.0;
  if (al == 0.0) {  // u_xx = 0 alone
    copy(sc.eta_own, f2.ghost);
    copy(sc.u_own, f3.ghost);
    for (int m = 0; m < 4; ++m) sc.tr_eta_e[m] = q2[m];
    return sc;
  }
  const double sal = s * al;
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 4; ++m) {
      const double g3 = f3.ghost[k][m], g2 = f2.ghost[k][m];
      sc.eta_own[k][m] = 0.5 * (g3 + g2);
      sc.eta_cross[k][m] = (g3 - g2) / (2.0 * sal);
      sc.u_own[k][m] = 0.5 * (g3 + g2);
      sc.u_cross[k][m] = 0.5 * sal * (g3 - g2);
    }
  // Q_xx = q2@u - sal*q2@eta; eta_xx = -Q_xx/(2 sal), u_xx = Q_xx/2.
  for (int m = 0; m < 4; ++m) {
    sc.tr_eta_e[m] = 0.5 * q2[m];
    sc.tr_eta_u[m] = -q2[m] / (2.0 * sal);
    sc.tr_u_e[m] = -0.5 * sal * q2[m];
    sc.tr_u_u[m] = 0.5 * q2[m];
  }
  return sc;
}

}  // namespace

DiscreteOperator::DiscreteOperator(const ModelCoefficients& c, const Grid& g,
                                   BcFamily family)
    : coeffs_(c), grid_(g), family_(family), band_(2 * g.n_nodes()) {
  const ValidationReport rep = validate_coefficients(c);
  if (!rep.all_pass()) {
    std::string msg = "assemble_operator: invalid coefficients:";
    for (const auto& chk : rep.checks)
      if (!chk.pass) msg += " [" + chk.name + "]";
    throw std::invalid_argument(msg);
  }
  if (std::abs(c.L - g.L) > 1e-12 * std::max(1.0, std::abs(c.L)))
    throw std::invalid_argument("assemble_operator: grid length differs from coefficients.L");
  assemble();
}

void DiscreteOperator::assemble() {
  const int N = grid_.N;
  const double h = grid_.h();

  // stacked stencil of the scalar generator -d/dx + a d3/dx3 - b d5/dx5,
  // offsets -3..3
  double w[7] = {0, 0, 0, 0, 0, 0, 0};
  {
    const auto d1 = derivative_stencil(1, h);
    const auto d3 = derivative_stencil(3, h);
    const auto d5 = derivative_stencil(5, h);
    for (int i = 0; i < 3; ++i) w[i + 2] += -d1[i];
    for (int i = 0; i < 5; ++i) w[i + 1] += coeffs_.a * d3[i];
    for (int i = 0; i < 7; ++i) w[i] += -coeffs_.b * d5[i];
  }

  const SideClosure left = make_side(family_, 0, coeffs_.alpha1, coeffs_.alpha2, h);
  const SideClosure right = make_side(family_, 1, coeffs_.alpha1, coeffs_.alpha2, h);

  // row for d/dt of `var_out` at node j applies w to the other variable
  auto add_row = [&](int j, int var_out) {
    const int g_out = 2 * j + var_out;
    const int var_in = 1 - var_out;
    const SideClosure& sc = (j <= 3) ? left : right;
    const bool at_left = (j <= 3);
    const double(*own)[4] = (var_in == 0) ? sc.eta_own : sc.u_own;
    const double(*cross)[4] = (var_in == 0) ? sc.eta_cross : sc.u_cross;
    for (int off = -3; off <= 3; ++off) {
      const double wgt = w[off + 3];
      if (wgt == 0.0) continue;
      const int k = j + off;
      if (k >= 0 && k <= N) {
        const int g_in = 2 * k + var_in;
        band_.at(g_out, g_in - g_out) += wgt;
        continue;
      }
      const int gi = (k < 0) ? (-k - 1) : (k - N - 1);
      for (int m = 0; m < 4; ++m) {
        const int node = at_left ? (1 + m) : (N - 1 - m);
        const int g_own = 2 * node + var_in;
        const int g_cross = 2 * node + var_out;
        band_.at(g_out, g_own - g_out) += wgt * own[gi][m];
        if (cross[gi][m] != 0.0)
          band_.at(g_out, g_cross - g_out) += wgt * cross[gi][m];
      }
    }
  };

  for (int j = 1; j < N; ++j) {
    add_row(j, 0);
    add_row(j, 1);
  }
  // nodes 0 and N stay pinned (zero rows)

  auto set_trace = [&](TraceRow& tr, const double we[4], const double wu[4]) {
    for (int m = 0; m < 4; ++m) {
      tr.w_eta[m] = we[m];
      tr.w_u[m] = wu[m];
    }
  };
  set_trace(tr_e0_, left.tr_eta_e, left.tr_eta_u);
  set_trace(tr_u0_, left.tr_u_e, left.tr_u_u);
  set_trace(tr_eL_, right.tr_eta_e, right.tr_eta_u);
  set_trace(tr_uL_, right.tr_u_e, right.tr_u_u);
}

void DiscreteOperator::apply(std::span<const double> x, std::span<double> y) const {
  const int n = grid_.n_nodes();
  if (static_cast<int>(x.size()) != 2 * n || static_cast<int>(y.size()) != 2 * n)
    throw std::invalid_argument("apply: dimension mismatch");
  // stacked [eta; u] -> interleaved
  std::vector<double> xi(2 * n), yi(2 * n);
  for (int j = 0; j < n; ++j) {
    xi[2 * j] = x[j];
    xi[2 * j + 1] = x[n + j];
  }
  band_.matvec(xi, yi);
  for (int j = 0; j < n; ++j) {
    y[j] = yi[2 * j];
    y[n + j] = yi[2 * j + 1];
  }
}

State DiscreteOperator::apply(const State& s) const {
  const int n = grid_.n_nodes();
  if (s.n_nodes() != n) throw std::invalid_argument("apply: state size mismatch");
  std::vector<double> x = stacked(s), y(2 * n);
  apply(x, y);
  return unstacked(y, s.t);
}

BoundaryTraces DiscreteOperator::second_derivative_traces(const State& s) const {
  const int N = grid_.N;
  auto eval = [&](const TraceRow& tr, bool at_left) {
    double acc = 0.0;
    for (int m = 0; m < 4; ++m) {
      const int node = at_left ? (1 + m) : (N - 1 - m);
      acc += tr.w_eta[m] * s.eta[node] + tr.w_u[m] * s.u[node];
    }
    return acc;
  };
  BoundaryTraces t;
  t.eta_xx_0 = eval(tr_e0_, true);
  t.u_xx_0 = eval(tr_u0_, true);
  t.eta_xx_L = eval(tr_eL_, false);
  t.u_xx_L = eval(tr_uL_, false);
  return t;
}

std::vector<double> DiscreteOperator::dense_stacked() const {
  const int n = grid_.n_nodes();
  const int d = 2 * n;
  std::vector<double> M(static_cast<size_t>(d) * d, 0.0);
  auto stacked_index = [n](int g) {
    const int node = g / 2, var = g % 2;
    return var * n + node;
  };
  for (int g = 0; g < d; ++g)
    for (int off = -BandMatrix::kHalfBand; off <= BandMatrix::kHalfBand; ++off) {
      const int gc = g + off;
      if (gc < 0 || gc >= d) continue;
      const double v = band_.get(g, off);
      if (v != 0.0) M[static_cast<size_t>(stacked_index(g)) * d + stacked_index(gc)] = v;
    }
  return M;
}

void DiscreteOperator::dump_triplets(std::ostream& os) const {
  const int n = grid_.n_nodes();
  const int d = 2 * n;
  const auto M = dense_stacked();
  size_t nnz = 0;
  for (double v : M)
    if (v != 0.0) ++nnz;
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << d << " " << d << " " << nnz << "\n";
  os.precision(17);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double v = M[static_cast<size_t>(i) * d + j];
      if (v != 0.0) os << i + 1 << " " << j + 1 << " " << v << "\n";
    }
}

std::shared_ptr<const BandFactor> DiscreteOperator::factorization(double c) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = factor_cache_.find(c);
  if (it != factor_cache_.end()) return it->second;
  auto f = std::make_shared<const BandFactor>(band_, c);
  factor_cache_[c] = f;
  return f;
}

DiscreteOperator assemble_operator(const ModelCoefficients& c, const Grid& g,
                                   BcFamily family) {
  return DiscreteOperator(c, g, family);
}

std::vector<double> apply_operator(const DiscreteOperator& op, const State& s) {
  std::vector<double> x = stacked(s), y(x.size());
  op.apply(x, y);
  return y;
}

}  // namespace bsq5
