#include <doctest.h>

#include <cmath>

#include "confstab/errors.hpp"
#include "confstab/immersion.hpp"
#include "confstab/oracle.hpp"
#include "confstab/shapes.hpp"
#include "confstab/stability.hpp"
#include "helpers.hpp"

using namespace confstab;

namespace {

double max_frame_defect(const Immersion& imm) {
  double worst = 0.0;
  for (int idx = 0; idx < imm.node_count(); idx += 37) {
    const NodeGeometry g = node_geometry(imm, idx);
    std::vector<Vec> all;
    for (const auto& e : g.frame.tangent) all.push_back(e.vec());
    for (const auto& e : g.frame.normal) all.push_back(e.vec());
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = 0; b < all.size(); ++b) {
        const double want = a == b ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(all[a].dot(all[b]) - want));
      }
    // Normal vectors orthogonal to every Jacobian column.
    for (const auto& e : g.frame.normal)
      for (int c = 0; c < g.jac.cols(); ++c)
        worst = std::max(worst, std::abs(e.vec().dot(g.jac.col(c))));
    // Tangent block spans the Jacobian columns.
    for (int c = 0; c < g.jac.cols(); ++c) {
      Vec r = g.jac.col(c);
      r -= r.dot(g.point.coords()) * g.point.coords();
      for (const auto& e : g.frame.tangent) r -= r.dot(e.vec()) * e.vec();
      worst = std::max(worst, r.norm());
    }
  }
  return worst;
}

double max_shape_defect(const Immersion& imm) {
  // A-symmetry, normality of A entries, and H = sum A_ii.
  double worst = 0.0;
  for (int idx = 0; idx < imm.node_count(); idx += 53) {
    const NodeGeometry g = node_geometry(imm, idx);
    const int k = imm.k();
    Vec h = Vec::Zero(imm.n() + 1);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        worst = std::max(worst, (g.shape.a(i, j).vec() - g.shape.a(j, i).vec()).norm());
        const Vec& a = g.shape.a(i, j).vec();
        worst = std::max(worst, std::abs(a.dot(g.point.coords())));
        for (const auto& e : g.frame.tangent) worst = std::max(worst, std::abs(a.dot(e.vec())));
      }
      h += g.shape.a(i, i).vec();
    }
    worst = std::max(worst, (h - g.shape.H.vec()).norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("adapted_frame on the great subsphere") {
  const Immersion imm = make_great_subsphere(2, 4, 16);
  const Immersion::Node nd = imm.node(77);
  const AdaptedFrame frame = adapted_frame(imm, nd.chart, nd.u);
  REQUIRE(frame.k() == 2);
  REQUIRE(frame.codim() == 2);
  // Tangents live in the first k+1 coordinates; normals fill the rest.
  for (const auto& e : frame.tangent) {
    CHECK(std::abs(e.vec()[3]) < 1e-12);
    CHECK(std::abs(e.vec()[4]) < 1e-12);
  }
  for (const auto& e : frame.normal) {
    CHECK(std::abs(e.vec()[0]) < 1e-12);
    CHECK(std::abs(e.vec()[1]) < 1e-12);
    CHECK(std::abs(e.vec()[2]) < 1e-12);
  }

  // Codimension one: exactly one normal vector.
  const Immersion hyper = make_great_subsphere(3, 4, 8);
  const Immersion::Node nh = hyper.node(3);
  CHECK(adapted_frame(hyper, nh.chart, nh.u).codim() == 1);

  // Determinism: identical inputs give bitwise-identical frames.
  const AdaptedFrame again = adapted_frame(imm, nd.chart, nd.u);
  for (int i = 0; i < frame.k(); ++i)
    CHECK((frame.tangent[i].vec().array() == again.tangent[i].vec().array()).all());
  for (int r = 0; r < frame.codim(); ++r)
    CHECK((frame.normal[r].vec().array() == again.normal[r].vec().array()).all());
}

TEST_CASE("frame and shape invariants across the library") {
  for (const Immersion& imm :
       {make_great_subsphere(2, 4, 16), make_geodesic_sphere(2, 4, M_PI / 3, 16),
        make_clifford_torus(1, 1, 3, 16), make_product_torus({0.6, 0.8}, 3, 16)}) {
    CAPTURE(imm.label());
    CHECK(max_frame_defect(imm) < 1e-9);
    CHECK(max_shape_defect(imm) < 1e-8);
  }
}

TEST_CASE("second fundamental form of canonical shapes") {
  SUBCASE("great subsphere is totally geodesic") {
    const Immersion imm = make_great_subsphere(2, 4, 16);
    for (int idx : {0, 100, 200}) {
      const NodeGeometry g = node_geometry(imm, idx);
      for (const auto& a : g.shape.A) CHECK(a.norm() < 1e-10);
      CHECK(g.shape.H.norm() < 1e-10);
    }
  }

  SUBCASE("geodesic sphere has |H| = k cot(theta)") {
    const Immersion imm = make_geodesic_sphere(2, 4, M_PI / 3, 16);
    const double expected = 2.0 / std::tan(M_PI / 3.0);  // ~1.154700538
    for (int idx : {0, 33, 180}) {
      const NodeGeometry g = node_geometry(imm, idx);
      CHECK(g.shape.H.norm() == doctest::Approx(expected).epsilon(1e-8));
    }
  }

  SUBCASE("Clifford torus is minimal") {
    const Immersion imm = make_clifford_torus(1, 1, 3, 16);
    for (int idx : {0, 57, 255}) {
      const NodeGeometry g = node_geometry(imm, idx);
      CHECK(g.shape.H.norm() < 1e-8);
    }
  }

  SUBCASE("missing second derivatives raise the unsupported-chart error") {
    const Immersion imm = make_great_subsphere(2, 4, 8);
    const ConstantProjectionField field{basis_vector(5, 4)};
    const Immersion deformed = VariationPath(imm, field).deformed(0.1);
    const Immersion::Node nd = deformed.node(0);
    const AdaptedFrame frame = adapted_frame(deformed, nd.chart, nd.u);
    CHECK_THROWS_AS(second_fundamental_form(deformed.chart(nd.chart), nd.u, frame),
                    UnsupportedChartError);
  }
}

TEST_CASE("conformal mean curvature") {
  SUBCASE("f = 0 leaves H unchanged") {
    const Immersion imm = make_geodesic_sphere(2, 4, M_PI / 3, 16);
    const NodeGeometry g = node_geometry(imm, 12);
    const TangentVector ht =
        conformal_mean_curvature(g.shape, ConformalFactor::zero(), g.frame);
    CHECK((ht.vec() - g.shape.H.vec()).norm() < 1e-12);
  }

  SUBCASE("axial factor keeps the great subsphere gt-minimal") {
    const Immersion imm = make_great_subsphere(2, 5, 16);
    const ConformalFactor f = ConformalFactor::axial(0.05, 3);
    for (int idx : {0, 99, 222}) {
      const NodeGeometry g = node_geometry(imm, idx);
      CHECK(conformal_mean_curvature(g.shape, f, g.frame).norm() < 1e-8);
    }
  }

  SUBCASE("constant factor preserves minimality") {
    const Immersion imm = make_clifford_torus(1, 1, 3, 16);
    const ConformalFactor f = ConformalFactor::constant(0.7);
    const NodeGeometry g = node_geometry(imm, 5);
    CHECK(conformal_mean_curvature(g.shape, f, g.frame).norm() < 1e-8);
  }
}

TEST_CASE("k_volume of library shapes") {
  SUBCASE("great S^2 has area 4 pi") {
    const Immersion imm = make_great_subsphere(2, 4, 32);
    CHECK(k_volume(imm) == doctest::Approx(4.0 * M_PI).epsilon(1e-6));
  }

  SUBCASE("Clifford torus in S^3 has area 2 pi^2, Richardson-checked") {
    const Immersion imm = make_clifford_torus(1, 1, 3, 32);
    const double coarse = k_volume(imm);
    const double fine = k_volume(imm.with_resolution(64));
    CHECK(coarse == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-6));
    CHECK(std::abs(fine - coarse) < 1e-6 * std::abs(coarse));
  }

  SUBCASE("constant factor scales volume by e^{kc}") {
    const Immersion imm = make_great_subsphere(2, 4, 24);
    const double base = k_volume(imm);
    const ConformalFactor f = ConformalFactor::constant(0.31);
    CHECK(k_volume(imm, &f) == doctest::Approx(std::exp(2 * 0.31) * base).epsilon(1e-12));
  }

  SUBCASE("volumes match closed forms across the library") {
    const double s2 = unit_sphere_volume(2);
    struct Case {
      Immersion imm;
      double expected;
    };
    const double r1 = std::sqrt(1.0 / 3.0), r2 = std::sqrt(2.0 / 3.0);
    Case cases[] = {
        {make_great_subsphere(2, 5, 32), s2},
        {make_geodesic_sphere(2, 4, M_PI / 3, 32), std::pow(std::sin(M_PI / 3), 2) * s2},
        {make_clifford_torus(1, 2, 4, 24),
         2.0 * M_PI * r1 * (r2 * r2 * s2)},
        {make_product_torus({0.6, 0.8}, 3, 32), 2.0 * M_PI * 0.6 * 2.0 * M_PI * 0.8},
    };
    for (const Case& c : cases) {
      CAPTURE(c.imm.label());
      CHECK(k_volume(c.imm) == doctest::Approx(c.expected).epsilon(1e-6));
    }
  }

  SUBCASE("quadrature convergence: doubling nodes moves volumes < 1e-6 relative") {
    for (const Immersion& imm :
         {make_great_subsphere(2, 4, 32), make_geodesic_sphere(2, 4, M_PI / 3, 32),
          make_clifford_torus(1, 1, 3, 32)}) {
      const double v1 = k_volume(imm);
      const double v2 = k_volume(imm.with_resolution(64));
      CHECK(std::abs(v2 - v1) < 1e-6 * std::abs(v1));
    }
  }
}

TEST_CASE("make_canonical dispatch and edge cases") {
  CHECK(make_canonical({"great_subsphere", 2, 4}).label() == "great_subsphere(k=2,n=4)");
  CHECK_THROWS_AS(make_geodesic_sphere(2, 4, 0.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_geodesic_sphere(2, 4, M_PI, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_clifford_torus(2, 2, 4, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_product_torus({0.9, 0.9}, 3, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_canonical({"moebius", 2, 4}), std::invalid_argument);

  SUBCASE("geodesic sphere at pi/2 coincides with the great subsphere") {
    const Immersion geo = make_geodesic_sphere(2, 4, M_PI / 2, 12);
    const Immersion great = make_great_subsphere(2, 4, 12);
    for (int idx : {0, 40, 90}) {
      const Immersion::Node a = geo.node(idx);
      const Immersion::Node b = great.node(idx);
      CHECK((geo.chart(a.chart).map(a.u) - great.chart(b.chart).map(b.u)).norm() < 1e-14);
    }
  }
}

TEST_CASE("first-variation oracle: minimal shapes are critical points") {
  // d/dt vol(phi_t(Sigma)) at 0 vanishes for minimal shapes under constant
  // vector field flows.
  const double t = 1e-4;
  for (const Immersion& imm :
       {make_great_subsphere(2, 4, 16), make_clifford_torus(1, 1, 3, 16),
        make_clifford_torus(1, 2, 4, 12)}) {
    CAPTURE(imm.label());
    const ConstantProjectionField field{basis_vector(imm.ambient_dim(), imm.n())};
    const VariationPath path(imm, field);
    const double deriv = confstab::testing::central_first_difference(
        [&](double s) { return k_volume(path.deformed(s)); }, t);
    CHECK(std::abs(deriv) < 1e-5);
  }

  // And the same oracle detects non-minimality via <H, V>: d/dt vol =
  // -int <H, V> dg.
  const Immersion geo = make_geodesic_sphere(2, 4, M_PI / 3, 16);
  const ConstantProjectionField field{basis_vector(5, 3)};
  const VariationPath path(geo, field);
  const double deriv = confstab::testing::central_first_difference(
      [&](double s) { return k_volume(path.deformed(s)); }, t);
  const std::vector<NodeGeometry> nodes = all_node_geometry(geo);
  const double expected = -integrate_nodes(
      geo, nodes,
      [&](const NodeGeometry& nd) {
        return nd.shape.H.vec().dot(field.ambient_value(nd.point.coords()));
      },
      nullptr);
  CHECK(deriv == doctest::Approx(expected).epsilon(1e-6));
}
