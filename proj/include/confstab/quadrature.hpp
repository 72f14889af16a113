// Gauss-Legendre rules for chart-coordinate integration.
#pragma once

#include <vector>

namespace confstab {

struct Quad1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Rule with `count` points on [-1, 1]; nodes ascending, all interior.
Quad1D gauss_legendre(int count);

// Affinely mapped rule on [lo, hi].
Quad1D gauss_legendre(int count, double lo, double hi);

}  // namespace confstab
