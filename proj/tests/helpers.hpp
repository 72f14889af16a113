// Shared test helpers.
#pragma once

#include <cmath>

#include "confstab/ambient.hpp"
#include "confstab/linalg.hpp"

namespace confstab::testing {

inline AmbientPoint axis_point(int dim, int index) {
  return AmbientPoint(basis_vector(dim, index));
}

// First variation of round k-volume along a field's flow, by central
// differences; an independent oracle for minimality and for |H|.
template <typename VolumeFn>
double central_first_difference(const VolumeFn& vol, double t) {
  return (vol(t) - vol(-t)) / (2.0 * t);
}

}  // namespace confstab::testing
