// Parametrized closed k-submanifolds of S^n: chart atlases with tensor
// Gauss-Legendre quadrature, adapted orthonormal frames, second fundamental
// form, and both mean curvatures.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "confstab/ambient.hpp"
#include "confstab/linalg.hpp"

namespace confstab {

struct ChartDomain {
  Vec lo, hi;
  std::vector<bool> periodic;
  int dim() const { return static_cast<int>(lo.size()); }
};

// One chart of the atlas. `map` sends chart coordinates to a unit vector in
// R^{n+1}; `jac` is the (n+1) x k matrix of first derivatives; `hess`
// returns n+1 matrices of size k x k (one per ambient coordinate). A chart
// without second derivatives still supports volume and first-order work.
class Chart {
 public:
  using MapFn = std::function<Vec(const Vec&)>;
  using JacFn = std::function<Mat(const Vec&)>;
  using HessFn = std::function<std::vector<Mat>(const Vec&)>;

  Chart(ChartDomain domain, MapFn map, JacFn jac, HessFn hess, DerivativeKind kind);

  // Derivatives by central differences of `map` in chart coordinates; the
  // mapped point is re-projected to the sphere before differencing.
  static Chart with_finite_differences(ChartDomain domain, MapFn map, double step = 1e-5);

  const ChartDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  Vec map(const Vec& u) const { return map_(u); }
  Mat jacobian(const Vec& u) const { return jac_(u); }
  bool has_hessian() const { return static_cast<bool>(hess_); }
  std::vector<Mat> hessian(const Vec& u) const;
  DerivativeKind derivative_kind() const { return kind_; }

 private:
  ChartDomain domain_;
  MapFn map_;
  JacFn jac_;
  HessFn hess_;
  DerivativeKind kind_;
};

// Closed immersed k-submanifold with per-chart tensor-product quadrature.
class Immersion {
 public:
  Immersion(std::vector<Chart> charts, int k, int n, std::string label, int nodes_per_axis = 32);

  int k() const { return k_; }
  int n() const { return n_; }
  int ambient_dim() const { return n_ + 1; }
  const std::string& label() const { return label_; }
  int nodes_per_axis() const { return nodes_per_axis_; }
  int chart_count() const { return static_cast<int>(charts_.size()); }
  const Chart& chart(int c) const { return charts_[c]; }
  int node_count() const { return total_nodes_; }

  struct Node {
    int chart;
    Vec u;
    double weight;  // chart-coordinate weight (no metric density)
  };
  Node node(int global_index) const;

  Immersion with_resolution(int nodes_per_axis) const;

 private:
  std::vector<Chart> charts_;
  int k_, n_;
  std::string label_;
  int nodes_per_axis_;
  // Per chart and axis: 1D nodes/weights; node decode is chart-major with
  // the last axis fastest.
  std::vector<std::vector<std::vector<double>>> axis_nodes_, axis_weights_;
  std::vector<int> chart_node_counts_;
  int total_nodes_;
};

// Orthonormal basis of T_p S^n adapted to Sigma: first k vectors span the
// chart's tangent space, the rest its normal complement inside T_p S^n.
struct AdaptedFrame {
  AmbientPoint point;
  std::vector<TangentVector> tangent;
  std::vector<TangentVector> normal;
  int k() const { return static_cast<int>(tangent.size()); }
  int codim() const { return static_cast<int>(normal.size()); }

  // Components of an ambient vector against the tangent / normal blocks.
  Vec tangent_components(const Vec& v) const;
  Vec normal_components(const Vec& v) const;
  // Projection onto the normal bundle of Sigma inside T S^n.
  TangentVector project_normal(const Vec& v) const;
  TangentVector project_sigma_tangent(const Vec& v) const;
};

AdaptedFrame adapted_frame(const Chart& chart, const Vec& u);
AdaptedFrame adapted_frame(const Immersion& imm, int chart, const Vec& u);

// e^{-f}-rescaled frame, orthonormal for gt = e^{2f} g. Tangent/normal split
// is preserved; the returned vectors are no longer g-orthonormal.
AdaptedFrame conformal_frame(const AdaptedFrame& frame, const ConformalFactor& f);

// Second fundamental form A(E_i,E_j) (normal-valued, k x k, symmetric) and
// its trace H, in the given adapted frame.
struct ShapeData {
  std::vector<TangentVector> A;  // row-major k x k
  TangentVector H;
  Mat tangent_coeffs;  // chart coefficients c_i with E_i = jac * c_i, k x k

  int k() const { return static_cast<int>(tangent_coeffs.rows()); }
  const TangentVector& a(int i, int j) const { return A[i * k() + j]; }
};

ShapeData second_fundamental_form(const Chart& chart, const Vec& u, const AdaptedFrame& frame);

// Ht = e^{-2f} (H - k grad_perp f), from the conformal mean-curvature law
// H = e^{2f} Ht + k grad_perp f.
TangentVector conformal_mean_curvature(const ShapeData& shape, const ConformalFactor& f,
                                       const AdaptedFrame& frame);

// Integral of the metric density sqrt(det J^T J) times e^{k f} (factor 1
// when f is null). Deterministic pairwise reduction in node order.
double k_volume(const Immersion& imm, const ConformalFactor* f = nullptr, int threads = 1);

// Everything pointwise computations need at one quadrature node.
struct NodeGeometry {
  int chart;
  Vec u;
  double weight;
  AmbientPoint point;
  Mat jac;
  double density;  // sqrt(det J^T J)
  AdaptedFrame frame;
  ShapeData shape;
  const Chart* chart_ref = nullptr;  // owned by the Immersion
};

NodeGeometry node_geometry(const Immersion& imm, int global_index);
std::vector<NodeGeometry> all_node_geometry(const Immersion& imm, int threads = 1);

}  // namespace confstab
