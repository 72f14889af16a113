// Sampling-based estimation of the pinching constant delta of (S^n, gt):
// random two-planes refined by projected gradient steps on the Grassmannian.
// Results are estimates, not certified bounds.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "confstab/ambient.hpp"
#include "confstab/rng.hpp"

namespace confstab {

struct RefineOptions {
  int steps = 50;
  double step_size = 1e-2;
  double fd_step = 1e-4;
};

struct PlaneExtremes {
  double min_K, max_K;
  double raw_min_K, raw_max_K;  // sampled extremes before refinement
  long evals;
};

// Extreme sectional curvatures over `plane_budget` random planes in T_p S^n,
// each extremal candidate refined by gradient ascent/descent. Optional seed
// planes (pairs of orthonormal tangent vectors) join the candidate set.
PlaneExtremes extremal_sectional_at_point(
    const ConformalFactor& f, const AmbientPoint& p, int plane_budget, Rng& rng,
    const RefineOptions& opts = {},
    const std::vector<std::pair<Vec, Vec>>* seed_planes = nullptr);

struct PointExtremes {
  int index;
  double min_K, max_K;
};

struct PinchingEstimate {
  double delta_lower = 0.0;  // min over points of min_K / max over points of max_K
  double min_K = 0.0;
  double max_K = 0.0;
  double raw_min_K = 0.0;  // pre-refinement sampled extremes (nested in budget)
  double raw_max_K = 0.0;
  long samples = 0;  // total sectional evaluations
  int refine_iters = 0;
  std::uint64_t seed = 0;
  int point_budget = 0;
  int plane_budget = 0;
  bool positive = false;  // min_K > 0; delta is undefined otherwise
  std::vector<PointExtremes> per_point;
};

// Deterministic given (f, n, budgets, seed); per-point RNG streams derive
// from seed + point index so thread count cannot change the result.
PinchingEstimate delta_estimate(const ConformalFactor& f, int n, int point_budget,
                                int plane_budget, std::uint64_t seed, int threads = 1,
                                const RefineOptions& opts = {});

}  // namespace confstab
