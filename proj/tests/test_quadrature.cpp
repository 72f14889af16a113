#include <doctest.h>

#include <cmath>

#include "confstab/quadrature.hpp"

using namespace confstab;

TEST_CASE("gauss_legendre integrates polynomials exactly") {
  const Quad1D q = gauss_legendre(8);
  double wsum = 0.0, x2 = 0.0, x7 = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    wsum += q.weights[i];
    x2 += q.weights[i] * q.nodes[i] * q.nodes[i];
    x7 += q.weights[i] * std::pow(q.nodes[i], 7);
  }
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(x7) < 1e-14);  // odd power
}

TEST_CASE("gauss_legendre nodes are interior and mapped rules rescale") {
  for (int count : {5, 32, 33}) {
    const Quad1D q = gauss_legendre(count, 0.0, M_PI);
    for (double x : q.nodes) {
      CHECK(x > 0.0);
      CHECK(x < M_PI);
    }
    double integral = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
      integral += q.weights[i] * std::sin(q.nodes[i]);
    // Spectral accuracy: already ~1e-7 at five nodes, round-off at 32.
    CHECK(integral == doctest::Approx(2.0).epsilon(count < 8 ? 1e-6 : 1e-13));
  }
}
