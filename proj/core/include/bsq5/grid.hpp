#pragma once

#include <stdexcept>

namespace bsq5 {

/// Uniform grid on [0, L] with N cells, nodes x_j = j*L/N, j = 0..N.
struct Grid {
  double L = 1.0;
  int N = 32;

  double h() const { return L / N; }
  int n_nodes() const { return N + 1; }
  double node(int j) const { return L * static_cast<double>(j) / N; }
};

inline Grid make_grid(double L, int N) {
  if (!(L > 0.0)) throw std::invalid_argument("grid: L must be positive");
  if (N < 32) throw std::invalid_argument("grid: N must be at least 32");
  return Grid{L, N};
}

}  // namespace bsq5
