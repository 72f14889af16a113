#include <doctest.h>

#include <cmath>

#include "confstab/pinching.hpp"
#include "confstab/rng.hpp"

using namespace confstab;

namespace {

// Dense-sampling oracle: many random planes plus the same refinement,
// independent of the production sampling path.
PlaneExtremes dense_grid_oracle(const ConformalFactor& f, const AmbientPoint& p, int samples) {
  Rng rng(987654321u);
  return extremal_sectional_at_point(f, p, samples, rng);
}

}  // namespace

TEST_CASE("extremal sectional curvatures at a point") {
  const int n = 5;
  Rng point_rng(4);
  const AmbientPoint p(point_rng.unit_vec(n + 1));

  SUBCASE("round sphere gives (1,1)") {
    Rng rng(1);
    const PlaneExtremes ex =
        extremal_sectional_at_point(ConformalFactor::zero(), p, 50, rng);
    CHECK(ex.min_K == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ex.max_K == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("homothety gives (e^{-2c}, e^{-2c})") {
    Rng rng(2);
    const double c = 0.4;
    const PlaneExtremes ex =
        extremal_sectional_at_point(ConformalFactor::constant(c), p, 50, rng);
    CHECK(ex.min_K == doctest::Approx(std::exp(-2.0 * c)).epsilon(1e-12));
    CHECK(ex.max_K == doctest::Approx(std::exp(-2.0 * c)).epsilon(1e-12));
  }

  SUBCASE("small axial factor stays within O(eps) of 1 and matches the dense oracle") {
    const double eps = 0.01;
    const ConformalFactor f = ConformalFactor::axial(eps, 3);
    Rng rng(3);
    const PlaneExtremes ex = extremal_sectional_at_point(f, p, 500, rng);
    CHECK(ex.min_K > 1.0 - 6.0 * eps);
    CHECK(ex.max_K < 1.0 + 6.0 * eps);
    const PlaneExtremes oracle = dense_grid_oracle(f, p, 20000);
    CHECK(std::abs(ex.min_K - oracle.min_K) < 1e-4);
    CHECK(std::abs(ex.max_K - oracle.max_K) < 1e-4);
  }

  CHECK_THROWS_AS(
      [&] {
        Rng rng(9);
        extremal_sectional_at_point(ConformalFactor::zero(), p, 0, rng);
      }(),
      std::invalid_argument);
}

TEST_CASE("delta estimate") {
  const int n = 5;

  SUBCASE("round and homothetic spheres have delta = 1") {
    const PinchingEstimate flat = delta_estimate(ConformalFactor::zero(), n, 20, 40, 11);
    CHECK(flat.positive);
    CHECK(flat.delta_lower == doctest::Approx(1.0).epsilon(1e-12));
    const PinchingEstimate scaled =
        delta_estimate(ConformalFactor::constant(0.25), n, 20, 40, 11);
    CHECK(scaled.delta_lower == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("axial eps = 0.05, n = 5: estimate matches the global extremes") {
    // Closed-form extremes for F = eps|y|^2: the minimum 1 - 4 eps sits at
    // points with y = 0 on fully-y planes; the maximum e^{-2 eps}(1 + 4 eps)
    // at |y| = 1 on planes avoiding the y-block.
    const double eps = 0.05;
    const ConformalFactor f = ConformalFactor::axial(eps, 3);
    const PinchingEstimate est = delta_estimate(f, n, 200, 300, 42);
    REQUIRE(est.positive);
    const double exact_min = 1.0 - 4.0 * eps;
    const double exact_max = std::exp(-2.0 * eps) * (1.0 + 4.0 * eps);
    // Sampling under-covers the extremes from inside; refinement should get
    // close. Estimates must stay within the true range.
    CHECK(est.min_K >= exact_min - 1e-9);
    CHECK(est.max_K <= exact_max + 1e-9);
    CHECK(est.min_K == doctest::Approx(exact_min).epsilon(2e-2));
    CHECK(est.max_K == doctest::Approx(exact_max).epsilon(2e-2));
    // The hypothesis that matters downstream: delta > 1/(n-k) = 1/3 for
    // k = 2 with a wide margin.
    CHECK(est.delta_lower > 0.70);
    CHECK(est.delta_lower < 0.76);

    // Determinism: same seed, same estimate, regardless of threads.
    const PinchingEstimate rerun = delta_estimate(f, n, 200, 300, 42, 4);
    CHECK(rerun.delta_lower == est.delta_lower);
    CHECK(rerun.min_K == est.min_K);
    CHECK(rerun.max_K == est.max_K);
  }

  SUBCASE("budget growth: raw sampled extremes are nested, delta shrinks") {
    const ConformalFactor f = ConformalFactor::axial(0.05, 3);
    double prev_raw_delta = 2.0;
    double prev_delta = 2.0;
    for (int budget : {50, 100, 200}) {
      const PinchingEstimate est = delta_estimate(f, 5, 30, budget, 7);
      const double raw_delta = est.raw_min_K / est.raw_max_K;
      CHECK(raw_delta <= prev_raw_delta + 1e-15);  // exactly nested samples
      CHECK(est.delta_lower <= prev_delta + 2e-3);  // refinement noise only
      prev_raw_delta = raw_delta;
      prev_delta = est.delta_lower;
    }
  }

  SUBCASE("per-point pinching display holds with the returned delta") {
    const ConformalFactor f = ConformalFactor::axial(0.04, 3);
    const PinchingEstimate est = delta_estimate(f, 5, 60, 100, 13);
    REQUIRE(est.positive);
    for (const PointExtremes& pe : est.per_point)
      CHECK(est.delta_lower * pe.max_K < pe.min_K + 1e-12);
  }

  SUBCASE("strong negative-curvature factor reports pinching failure") {
    // Large axial coefficient pushes sectionals negative somewhere.
    const PinchingEstimate est =
        delta_estimate(ConformalFactor::axial(0.5, 3), 5, 40, 200, 3);
    CHECK_FALSE(est.positive);
    CHECK(std::isnan(est.delta_lower));
  }
}
