// Randomized verification suites: ambient tensor identities (curvature
// symmetries, Bianchi, metricity, sectional contraction) and the pointwise
// transformation lemmas behind the conformal second-variation formula.
#pragma once

#include <cstdint>

#include "confstab/rng.hpp"
#include "confstab/stability.hpp"

namespace confstab {

struct IdentitySuiteResult {
  int instances = 0;
  // Ambient invariants.
  double max_antisym_xy = 0.0;
  double max_antisym_zw = 0.0;
  double max_pair_symmetry = 0.0;
  double max_bianchi = 0.0;
  double max_metricity = 0.0;        // finite-difference check
  double max_sectional_contract = 0.0;
  double max_frame_orthonormality = 0.0;
  double max_rescaled_inner_product = 0.0;
  // Pointwise transformation lemmas.
  double max_lemma_grad = 0.0;
  double max_lemma_curv = 0.0;
  double max_lemma_shape = 0.0;
  double max_prop = 0.0;
  double max_corollary = 0.0;
};

// Runs `instances` randomized (point, frame, field, factor) instances in
// dimension n with submanifold germs of dimension k (k = 0 lets each
// instance draw k in [2, n-1]).
IdentitySuiteResult run_identity_suite(int n, int k, int instances, std::uint64_t seed);

// One synthetic pointwise instance, exposed so tests can drive the pieces.
struct SyntheticInstance {
  SigmaGerm germ;
  FieldSample field;       // normal field 1-jet at the point
  ConformalFactor factor;
  bool gt_minimal;         // germ trace adjusted so Ht = 0 at the point
};

SyntheticInstance make_synthetic_instance(int n, int k, Rng& rng, bool force_gt_minimal);

}  // namespace confstab
