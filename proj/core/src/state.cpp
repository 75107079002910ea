#include "bsq5/state.hpp"

#include <cmath>
#include <stdexcept>

namespace bsq5 {

bool State::finite() const {
  for (double v : eta)
    if (!std::isfinite(v)) return false;
  for (double v : u)
    if (!std::isfinite(v)) return false;
  return true;
}

double State::max_abs() const {
  double m = 0.0;
  for (double v : eta) m = std::max(m, std::abs(v));
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> stacked(const State& s) {
  std::vector<double> v;
  v.reserve(s.eta.size() + s.u.size());
  v.insert(v.end(), s.eta.begin(), s.eta.end());
  v.insert(v.end(), s.u.begin(), s.u.end());
  return v;
}

State unstacked(const std::vector<double>& v, double t) {
  if (v.size() % 2 != 0) throw std::invalid_argument("unstacked: odd length");
  const size_t n = v.size() / 2;
  State s;
  s.eta.assign(v.begin(), v.begin() + n);
  s.u.assign(v.begin() + n, v.end());
  s.t = t;
  return s;
}

}  // namespace bsq5
