#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string_view>
#include <vector>

#include "bsq5/grid.hpp"
#include "bsq5/model.hpp"
#include "bsq5/state.hpp"

namespace bsq5 {

/// Boundary-condition family at both ends of the interval.
///  - Dissipative: eta, eta_x, u, u_x = 0 plus the feedback couplings
///    u_xx(0) + alpha1*eta_xx(0) = 0 and u_xx(L) - alpha2*eta_xx(L) = 0.
///  - Conservative: eta, eta_x, u, u_x = 0 plus eta_xx(0) = 0, u_xx(L) = 0.
///  - Clamped: eta, eta_x, eta_xx, u, u_x, u_xx = 0 at both ends.
enum class BcFamily { Dissipative, Conservative, Clamped };

std::string_view to_string(BcFamily f);
BcFamily bc_family_from_string(std::string_view s);

/// Banded matrix on interleaved dofs g = 2*node + var (var: 0 eta, 1 u),
/// half-bandwidth 7; per-variable block bandwidth stays <= 7 as well.
struct BandMatrix {
  static constexpr int kHalfBand = 7;
  int dim = 0;
  std::vector<double> a;  // dim rows x 15 diagonals, row-major

  explicit BandMatrix(int d) : dim(d), a(static_cast<size_t>(d) * (2 * kHalfBand + 1), 0.0) {}
  double& at(int g, int off) { return a[static_cast<size_t>(g) * 15 + off + kHalfBand]; }
  double get(int g, int off) const { return a[static_cast<size_t>(g) * 15 + off + kHalfBand]; }
  void matvec(std::span<const double> x, std::span<double> y) const;
};

/// LU factors of a banded matrix (LAPACK dgbtrf layout).
class BandFactor {
 public:
  /// Factors (I - c*A) for the interleaved band matrix A.
  BandFactor(const BandMatrix& A, double c);
  void solve(std::span<double> x) const;  // in place
  double reciprocal_pivot_floor() const { return rcond_proxy_; }

 private:
  int n_ = 0;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
  double rcond_proxy_ = 0.0;
};

struct BoundaryTraces {
  double eta_xx_0 = 0.0;
  double eta_xx_L = 0.0;
  double u_xx_0 = 0.0;
  double u_xx_L = 0.0;
};

/// Discrete spatial generator: interior rows are the centered second-order
/// discretization of (eta_t, u_t) = (-u_x + a u_xxx - b u_xxxxx,
/// -eta_x + a eta_xxx - b eta_xxxxx); boundary nodes are pinned and the
/// near-boundary rows eliminate ghost values through polynomial extensions
/// that carry the family's boundary conditions.
class DiscreteOperator {
 public:
  DiscreteOperator(const ModelCoefficients& c, const Grid& g, BcFamily family);

  const Grid& grid() const { return grid_; }
  BcFamily family() const { return family_; }
  const ModelCoefficients& coefficients() const { return coeffs_; }
  int dim() const { return band_.dim; }
  int consistency_order() const { return 2; }
  const BandMatrix& band() const { return band_; }

  /// y = A x on stacked [eta; u] vectors.
  void apply(std::span<const double> x, std::span<double> y) const;
  State apply(const State& s) const;

  /// Boundary second-derivative traces evaluated with the same one-sided
  /// extensions the ghost closure uses.
  BoundaryTraces second_derivative_traces(const State& s) const;

  /// Dense row-major copy (stacked block layout: [eta; u]), for eigensolvers.
  std::vector<double> dense_stacked() const;

  /// Triplet dump "row col value" with a MatrixMarket header, stacked layout.
  void dump_triplets(std::ostream& os) const;

  /// Cached banded LU of (I - c*A); shared across threads.
  std::shared_ptr<const BandFactor> factorization(double c) const;

 private:
  ModelCoefficients coeffs_;
  Grid grid_;
  BcFamily family_;
  BandMatrix band_;

  // trace functionals: weights on the first / last four interior values
  struct TraceRow {
    std::array<double, 4> w_eta{};  // on eta[1..4] (left) or eta[N-1..N-4] (right)
    std::array<double, 4> w_u{};
  };
  TraceRow tr_e0_, tr_eL_, tr_u0_, tr_uL_;

  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const BandFactor>> factor_cache_;

  void assemble();
  friend DiscreteOperator assemble_operator(const ModelCoefficients&, const Grid&, BcFamily);
};

DiscreteOperator assemble_operator(const ModelCoefficients& c, const Grid& g, BcFamily family);

/// A_h s as a stacked vector (matrix-vector product).
std::vector<double> apply_operator(const DiscreteOperator& op, const State& s);

}  // namespace bsq5
