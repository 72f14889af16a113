// Canonical submanifold library: great subspheres, geodesic spheres,
// Clifford-type product spheres, and products of circles. All charts carry
// analytic first and second derivatives.
#pragma once

#include <string>
#include <vector>

#include "confstab/immersion.hpp"

namespace confstab {

// Standard S^k in the first k+1 coordinates of R^{n+1}.
Immersion make_great_subsphere(int k, int n, int res = 32);

// Geodesic sphere of radius theta inside a great S^{k+1}:
// x = (sin(theta) w, cos(theta), 0, ...), w in S^k. Totally geodesic at
// theta = pi/2, where it coincides pointwise with the great subsphere.
Immersion make_geodesic_sphere(int k, int n, double theta, int res = 32);

// S^p(sqrt(p/(p+q))) x S^q(sqrt(q/(p+q))) in S^{p+q+1} (minimal), embedded
// in S^n. Requires p + q <= n - 1.
Immersion make_clifford_torus(int p, int q, int n, int res = 32);

// Product of circles S^1(r_1) x ... x S^1(r_m) with sum r_i^2 = 1; minimal
// only when all radii are equal.
Immersion make_product_torus(const std::vector<double>& radii, int n, int res = 32);

struct CanonicalSpec {
  std::string type;  // great_subsphere | geodesic_sphere | clifford_torus | product_torus
  int k = 0, n = 0;
  int p = 0, q = 0;
  double theta = 0.0;
  std::vector<double> radii;
};

Immersion make_canonical(const CanonicalSpec& spec, int res = 32);

// Round k-volume of the unit k-sphere.
double unit_sphere_volume(int k);

}  // namespace confstab
