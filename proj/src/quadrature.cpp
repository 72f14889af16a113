#include "confstab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace confstab {

namespace {

// Legendre P_n and P_n' by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

Quad1D gauss_legendre(int count) {
  if (count < 1) throw std::invalid_argument("gauss_legendre: count must be >= 1");
  Quad1D rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, then Newton.
    double x = std::cos(M_PI * (i + 0.75) / (count + 0.5));
    double p = 0.0, dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      legendre(count, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre(count, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[count - 1 - i] = x;
    rule.weights[count - 1 - i] = w;
  }
  return rule;
}

Quad1D gauss_legendre(int count, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("gauss_legendre: need hi > lo");
  Quad1D base = gauss_legendre(count);
  const double mid = 0.5 * (lo + hi);
  const double halfw = 0.5 * (hi - lo);
  for (int i = 0; i < count; ++i) {
    base.nodes[i] = mid + halfw * base.nodes[i];
    base.weights[i] *= halfw;
  }
  return base;
}

}  // namespace confstab
