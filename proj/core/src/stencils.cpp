#include "bsq5/stencils.hpp"

#include <stdexcept>

namespace bsq5 {

std::vector<double> derivative_stencil(int order, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("derivative_stencil: h must be > 0");
  switch (order) {
    case 1: {
      const double s = 1.0 / (2.0 * h);
      return {-s, 0.0, s};
    }
    case 2: {
      const double s = 1.0 / (h * h);
      return {s, -2.0 * s, s};
    }
    case 3: {
      const double s = 1.0 / (2.0 * h * h * h);
      return {-s, 2.0 * s, 0.0, -2.0 * s, s};
    }
    case 5: {
      const double h5 = h * h * h * h * h;
      const double s = 1.0 / (2.0 * h5);
      return {-s, 4.0 * s, -5.0 * s, 0.0, 5.0 * s, -4.0 * s, s};
    }
    default:
      throw std::invalid_argument("derivative_stencil: unsupported order");
  }
}

}  // namespace bsq5
