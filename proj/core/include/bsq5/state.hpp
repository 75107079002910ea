#pragma once

#include <vector>

#include "bsq5/grid.hpp"

namespace bsq5 {

/// Discrete pair (eta, u) on the nodes of a grid at time t.
/// Layout: eta[0..N], u[0..N].
struct State {
  std::vector<double> eta;
  std::vector<double> u;
  double t = 0.0;

  State() = default;
  explicit State(const Grid& g) : eta(g.n_nodes(), 0.0), u(g.n_nodes(), 0.0) {}

  int n_nodes() const { return static_cast<int>(eta.size()); }
  bool finite() const;
  double max_abs() const;
};

/// Stacked copy [eta; u], size 2*(N+1).
std::vector<double> stacked(const State& s);
State unstacked(const std::vector<double>& v, double t);

}  // namespace bsq5
