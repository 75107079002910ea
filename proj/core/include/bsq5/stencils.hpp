#pragma once

#include <vector>

namespace bsq5 {

/// Centered second-order interior stencil for d^order/dx^order.
/// Supported orders: 1, 2, 3, 5 with widths 3, 3, 5, 7. Coefficients are
/// antisymmetric for odd orders and symmetric for order 2.
/// Throws std::invalid_argument for other orders or h <= 0.
std::vector<double> derivative_stencil(int order, double h);

}  // namespace bsq5
