#include "confstab/shapes.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace confstab {

namespace {

// Polyspherical parametrization of S^d by angles t_0..t_{d-1}:
//   x_m = sin(t_0)...sin(t_{m-1}) cos(t_m)   for m < d,
//   x_d = sin(t_0)...sin(t_{d-1}).
// Every coordinate is a product of single-angle factors, so first and
// second derivatives follow by differentiating one or two factors.
enum class Fac { one, sine, cosine };

Fac factor_of(int d, int m, int i) {
  if (m == d) return Fac::sine;
  if (i < m) return Fac::sine;
  if (i == m) return Fac::cosine;
  return Fac::one;
}

double eval_factor(Fac f, double t, int deriv) {
  switch (f) {
    case Fac::one:
      return deriv == 0 ? 1.0 : 0.0;
    case Fac::sine:
      return deriv == 0 ? std::sin(t) : (deriv == 1 ? std::cos(t) : -std::sin(t));
    case Fac::cosine:
      return deriv == 0 ? std::cos(t) : (deriv == 1 ? -std::sin(t) : -std::cos(t));
  }
  return 0.0;
}

double coord_derivative(int d, int m, const Vec& t, int da, int db) {
  // Product over all angles with up to two factors differentiated; da/db
  // are angle indices or -1.
  double prod = 1.0;
  for (int i = 0; i < d; ++i) {
    int deriv = 0;
    if (i == da) ++deriv;
    if (i == db) ++deriv;
    prod *= eval_factor(factor_of(d, m, i), t[i], deriv);
  }
  return prod;
}

// One factor sphere of a product embedding: dimension d, radius r, written
// into ambient coordinates [offset, offset + d].
struct SphereBlock {
  int d;
  double r;
  int offset;        // first ambient coordinate
  int angle_offset;  // first angle index in the concatenated chart
};

Chart product_sphere_chart(std::vector<SphereBlock> blocks, int ambient_dim, int k,
                           Vec fixed_part) {
  ChartDomain dom;
  dom.lo = Vec(k);
  dom.hi = Vec(k);
  dom.periodic.assign(k, false);
  for (const SphereBlock& b : blocks) {
    for (int i = 0; i < b.d; ++i) {
      const bool last = (i == b.d - 1);
      dom.lo[b.angle_offset + i] = 0.0;
      dom.hi[b.angle_offset + i] = last ? 2.0 * M_PI : M_PI;
      dom.periodic[b.angle_offset + i] = last;
    }
  }
  auto map = [blocks, ambient_dim, fixed_part](const Vec& u) {
    Vec x = fixed_part;
    for (const SphereBlock& b : blocks) {
      const Vec t = u.segment(b.angle_offset, b.d);
      for (int m = 0; m <= b.d; ++m)
        x[b.offset + m] = b.r * coord_derivative(b.d, m, t, -1, -1);
    }
    return x;
  };
  auto jac = [blocks, ambient_dim, k](const Vec& u) {
    Mat j = Mat::Zero(ambient_dim, k);
    for (const SphereBlock& b : blocks) {
      const Vec t = u.segment(b.angle_offset, b.d);
      for (int m = 0; m <= b.d; ++m)
        for (int a = 0; a < b.d; ++a)
          j(b.offset + m, b.angle_offset + a) = b.r * coord_derivative(b.d, m, t, a, -1);
    }
    return j;
  };
  auto hess = [blocks, ambient_dim, k](const Vec& u) {
    std::vector<Mat> h(ambient_dim, Mat::Zero(k, k));
    for (const SphereBlock& b : blocks) {
      const Vec t = u.segment(b.angle_offset, b.d);
      for (int m = 0; m <= b.d; ++m)
        for (int a = 0; a < b.d; ++a)
          for (int bidx = a; bidx < b.d; ++bidx) {
            const double v = b.r * coord_derivative(b.d, m, t, a, bidx);
            h[b.offset + m](b.angle_offset + a, b.angle_offset + bidx) = v;
            h[b.offset + m](b.angle_offset + bidx, b.angle_offset + a) = v;
          }
    }
    return h;
  };
  return Chart(std::move(dom), std::move(map), std::move(jac), std::move(hess),
               DerivativeKind::analytic);
}

}  // namespace

Immersion make_great_subsphere(int k, int n, int res) {
  if (k < 1 || k > n - 1) throw std::invalid_argument("great_subsphere: need 1 <= k <= n-1");
  std::vector<SphereBlock> blocks{{k, 1.0, 0, 0}};
  Chart chart = product_sphere_chart(blocks, n + 1, k, Vec::Zero(n + 1));
  return Immersion({std::move(chart)}, k, n,
                   "great_subsphere(k=" + std::to_string(k) + ",n=" + std::to_string(n) + ")",
                   res);
}

Immersion make_geodesic_sphere(int k, int n, double theta, int res) {
  if (k < 1 || k > n - 1) throw std::invalid_argument("geodesic_sphere: need 1 <= k <= n-1");
  if (!(theta > 0.0) || !(theta < M_PI))
    throw std::invalid_argument("geodesic_sphere: theta in {0, pi} is degenerate");
  Vec fixed = Vec::Zero(n + 1);
  fixed[k + 1] = std::cos(theta);
  std::vector<SphereBlock> blocks{{k, std::sin(theta), 0, 0}};
  Chart chart = product_sphere_chart(blocks, n + 1, k, std::move(fixed));
  return Immersion({std::move(chart)}, k, n,
                   "geodesic_sphere(k=" + std::to_string(k) + ",n=" + std::to_string(n) +
                       ",theta=" + std::to_string(theta) + ")",
                   res);
}

Immersion make_clifford_torus(int p, int q, int n, int res) {
  if (p < 1 || q < 1) throw std::invalid_argument("clifford_torus: need p, q >= 1");
  if (p + q >= n) throw std::invalid_argument("clifford_torus: need p + q <= n - 1");
  const double total = static_cast<double>(p + q);
  std::vector<SphereBlock> blocks{{p, std::sqrt(p / total), 0, 0},
                                  {q, std::sqrt(q / total), p + 1, p}};
  Chart chart = product_sphere_chart(blocks, n + 1, p + q, Vec::Zero(n + 1));
  return Immersion({std::move(chart)}, p + q, n,
                   "clifford_torus(p=" + std::to_string(p) + ",q=" + std::to_string(q) +
                       ",n=" + std::to_string(n) + ")",
                   res);
}

Immersion make_product_torus(const std::vector<double>& radii, int n, int res) {
  const int m = static_cast<int>(radii.size());
  if (m < 1) throw std::invalid_argument("product_torus: need at least one circle");
  if (2 * m > n + 1) throw std::invalid_argument("product_torus: ambient dimension too small");
  double sumsq = 0.0;
  for (double r : radii) {
    if (!(r > 0)) throw std::invalid_argument("product_torus: radii must be positive");
    sumsq += r * r;
  }
  if (std::abs(sumsq - 1.0) > 1e-9)
    throw std::invalid_argument("product_torus: radii must satisfy sum r_i^2 = 1");
  std::vector<SphereBlock> blocks;
  for (int b = 0; b < m; ++b) blocks.push_back({1, radii[b], 2 * b, b});
  Chart chart = product_sphere_chart(std::move(blocks), n + 1, m, Vec::Zero(n + 1));
  std::string label = "product_torus(r=";
  for (int b = 0; b < m; ++b) label += (b ? "," : "") + std::to_string(radii[b]);
  label += ",n=" + std::to_string(n) + ")";
  return Immersion({std::move(chart)}, m, n, std::move(label), res);
}

Immersion make_canonical(const CanonicalSpec& spec, int res) {
  if (spec.type == "great_subsphere") return make_great_subsphere(spec.k, spec.n, res);
  if (spec.type == "geodesic_sphere") return make_geodesic_sphere(spec.k, spec.n, spec.theta, res);
  if (spec.type == "clifford_torus") return make_clifford_torus(spec.p, spec.q, spec.n, res);
  if (spec.type == "product_torus") return make_product_torus(spec.radii, spec.n, res);
  throw std::invalid_argument("make_canonical: unknown shape type '" + spec.type + "'");
}

double unit_sphere_volume(int k) {
  if (k < 0) throw std::invalid_argument("unit_sphere_volume: k >= 0");
  return 2.0 * std::pow(M_PI, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

}  // namespace confstab
