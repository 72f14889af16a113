#include "confstab/immersion.hpp"

#include <cmath>
#include <stdexcept>

#include "confstab/errors.hpp"
#include "confstab/parallel.hpp"
#include "confstab/quadrature.hpp"

namespace confstab {

namespace {
constexpr double kRankTol = 1e-10;
constexpr double kComplementTol = 1e-8;
}  // namespace

Chart::Chart(ChartDomain domain, MapFn map, JacFn jac, HessFn hess, DerivativeKind kind)
    : domain_(std::move(domain)),
      map_(std::move(map)),
      jac_(std::move(jac)),
      hess_(std::move(hess)),
      kind_(kind) {
  if (domain_.lo.size() != domain_.hi.size() ||
      static_cast<int>(domain_.periodic.size()) != domain_.dim())
    throw std::invalid_argument("Chart: inconsistent domain description");
}

std::vector<Mat> Chart::hessian(const Vec& u) const {
  if (!hess_) throw UnsupportedChartError("Chart: second derivatives are not available");
  return hess_(u);
}

Chart Chart::with_finite_differences(ChartDomain domain, MapFn map, double step) {
  auto on_sphere = [map](const Vec& u) {
    Vec x = map(u);
    return Vec(x / x.norm());
  };
  JacFn jac = [on_sphere, step](const Vec& u) {
    const int k = static_cast<int>(u.size());
    Vec up = u, um = u;
    Mat j;
    for (int a = 0; a < k; ++a) {
      up[a] = u[a] + step;
      um[a] = u[a] - step;
      const Vec col = (on_sphere(up) - on_sphere(um)) / (2.0 * step);
      if (a == 0) j = Mat(col.size(), k);
      j.col(a) = col;
      up[a] = u[a];
      um[a] = u[a];
    }
    return j;
  };
  HessFn hess = [on_sphere, step](const Vec& u) {
    const int k = static_cast<int>(u.size());
    const Vec x0 = on_sphere(u);
    const int dim = static_cast<int>(x0.size());
    std::vector<Mat> h(dim, Mat::Zero(k, k));
    Vec ut = u;
    for (int a = 0; a < k; ++a) {
      ut[a] = u[a] + step;
      const Vec xp = on_sphere(ut);
      ut[a] = u[a] - step;
      const Vec xm = on_sphere(ut);
      ut[a] = u[a];
      const Vec dd = (xp - 2.0 * x0 + xm) / (step * step);
      for (int m = 0; m < dim; ++m) h[m](a, a) = dd[m];
    }
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        ut[a] = u[a] + step;
        ut[b] = u[b] + step;
        const Vec xpp = on_sphere(ut);
        ut[b] = u[b] - step;
        const Vec xpm = on_sphere(ut);
        ut[a] = u[a] - step;
        const Vec xmm = on_sphere(ut);
        ut[b] = u[b] + step;
        const Vec xmp = on_sphere(ut);
        ut[a] = u[a];
        ut[b] = u[b];
        const Vec dd = (xpp - xpm - xmp + xmm) / (4.0 * step * step);
        for (int m = 0; m < dim; ++m) {
          h[m](a, b) = dd[m];
          h[m](b, a) = dd[m];
        }
      }
    }
    return h;
  };
  return Chart(std::move(domain), std::move(map), std::move(jac), std::move(hess),
               DerivativeKind::finite_difference);
}

Immersion::Immersion(std::vector<Chart> charts, int k, int n, std::string label,
                     int nodes_per_axis)
    : charts_(std::move(charts)),
      k_(k),
      n_(n),
      label_(std::move(label)),
      nodes_per_axis_(nodes_per_axis) {
  if (k_ < 1 || k_ > n_ - 1)
    throw std::invalid_argument("Immersion: need 1 <= k <= n-1");
  if (charts_.empty()) throw std::invalid_argument("Immersion: at least one chart required");
  if (nodes_per_axis_ < 2) throw std::invalid_argument("Immersion: nodes_per_axis too small");
  total_nodes_ = 0;
  for (const Chart& c : charts_) {
    if (c.dim() != k_) throw std::invalid_argument("Immersion: chart dimension != k");
    std::vector<std::vector<double>> nodes(k_), weights(k_);
    for (int a = 0; a < k_; ++a) {
      Quad1D q = gauss_legendre(nodes_per_axis_, c.domain().lo[a], c.domain().hi[a]);
      nodes[a] = std::move(q.nodes);
      weights[a] = std::move(q.weights);
    }
    axis_nodes_.push_back(std::move(nodes));
    axis_weights_.push_back(std::move(weights));
    int count = 1;
    for (int a = 0; a < k_; ++a) count *= nodes_per_axis_;
    chart_node_counts_.push_back(count);
    total_nodes_ += count;
  }
  // Spot-check the sphere invariant at the first node of each chart.
  for (int c = 0; c < chart_count(); ++c) {
    Vec u(k_);
    for (int a = 0; a < k_; ++a) u[a] = axis_nodes_[c][a][0];
    const Vec x = charts_[c].map(u);
    if (std::abs(x.norm() - 1.0) > 1e-10)
      throw std::invalid_argument("Immersion: chart map does not land on the unit sphere");
    if (static_cast<int>(x.size()) != n_ + 1)
      throw std::invalid_argument("Immersion: chart map has wrong ambient dimension");
  }
}

Immersion::Node Immersion::node(int global_index) const {
  if (global_index < 0 || global_index >= total_nodes_)
    throw std::out_of_range("Immersion::node: index out of range");
  int c = 0;
  while (global_index >= chart_node_counts_[c]) {
    global_index -= chart_node_counts_[c];
    ++c;
  }
  Node out;
  out.chart = c;
  out.u = Vec(k_);
  out.weight = 1.0;
  // Mixed-radix decode, last axis fastest.
  int rem = global_index;
  for (int a = k_ - 1; a >= 0; --a) {
    const int idx = rem % nodes_per_axis_;
    rem /= nodes_per_axis_;
    out.u[a] = axis_nodes_[c][a][idx];
    out.weight *= axis_weights_[c][a][idx];
  }
  return out;
}

Immersion Immersion::with_resolution(int nodes_per_axis) const {
  return Immersion(charts_, k_, n_, label_, nodes_per_axis);
}

Vec AdaptedFrame::tangent_components(const Vec& v) const {
  Vec c(k());
  for (int i = 0; i < k(); ++i) c[i] = tangent[i].vec().dot(v);
  return c;
}

Vec AdaptedFrame::normal_components(const Vec& v) const {
  Vec c(codim());
  for (int r = 0; r < codim(); ++r) c[r] = normal[r].vec().dot(v);
  return c;
}

TangentVector AdaptedFrame::project_normal(const Vec& v) const {
  Vec out = Vec::Zero(v.size());
  for (const TangentVector& e : normal) out += e.vec().dot(v) * e.vec();
  return TangentVector(point, std::move(out));
}

TangentVector AdaptedFrame::project_sigma_tangent(const Vec& v) const {
  Vec out = Vec::Zero(v.size());
  for (const TangentVector& e : tangent) out += e.vec().dot(v) * e.vec();
  return TangentVector(point, std::move(out));
}

AdaptedFrame adapted_frame(const Chart& chart, const Vec& u) {
  const Vec x = chart.map(u);
  const AmbientPoint p = AmbientPoint::normalized(x);
  const Mat jac = chart.jacobian(u);
  const int dim = static_cast<int>(x.size());
  const int k = static_cast<int>(jac.cols());

  AdaptedFrame frame{p, {}, {}};
  // Stabilized Gram-Schmidt over the Jacobian columns in column order.
  std::vector<Vec> basis;  // radial + tangent, used for complement projection
  basis.push_back(p.coords());
  for (int a = 0; a < k; ++a) {
    Vec w = jac.col(a);
    w -= w.dot(p.coords()) * p.coords();
    const double scale = std::max(1.0, jac.col(a).norm());
    for (const Vec& b : basis) w -= w.dot(b) * b;
    for (const Vec& b : basis) w -= w.dot(b) * b;  // second MGS pass
    const double nw = w.norm();
    if (nw < kRankTol * scale)
      throw DegenerateImmersionError("adapted_frame: chart Jacobian is rank deficient");
    w /= nw;
    basis.push_back(w);
    frame.tangent.emplace_back(p, w);
  }
  // Complement: project the standard basis, take the largest residual first,
  // discard residuals below threshold.
  const int codim = dim - 1 - k;
  for (int picked = 0; picked < codim; ++picked) {
    int best = -1;
    double best_norm = kComplementTol;
    Vec best_res;
    for (int j = 0; j < dim; ++j) {
      Vec r = Vec::Zero(dim);
      r[j] = 1.0;
      for (const Vec& b : basis) r -= r.dot(b) * b;
      for (const Vec& b : basis) r -= r.dot(b) * b;
      const double nr = r.norm();
      if (nr > best_norm) {
        best_norm = nr;
        best = j;
        best_res = std::move(r);
      }
    }
    if (best < 0)
      throw DegenerateImmersionError("adapted_frame: could not complete the normal frame");
    best_res /= best_norm;
    basis.push_back(best_res);
    frame.normal.emplace_back(p, best_res);
  }
  return frame;
}

AdaptedFrame adapted_frame(const Immersion& imm, int chart, const Vec& u) {
  return adapted_frame(imm.chart(chart), u);
}

AdaptedFrame conformal_frame(const AdaptedFrame& frame, const ConformalFactor& f) {
  const double scale = std::exp(-f.eval(frame.point));
  AdaptedFrame out{frame.point, {}, {}};
  for (const TangentVector& e : frame.tangent) out.tangent.push_back(e * scale);
  for (const TangentVector& e : frame.normal) out.normal.push_back(e * scale);
  return out;
}

ShapeData second_fundamental_form(const Chart& chart, const Vec& u, const AdaptedFrame& frame) {
  const int k = frame.k();
  const Mat jac = chart.jacobian(u);
  const std::vector<Mat> hess = chart.hessian(u);
  const int dim = static_cast<int>(jac.rows());
  const AmbientPoint& p = frame.point;

  // Chart coefficients of the tangent frame: E_i = jac * c_i.
  const Mat gram = jac.transpose() * jac;
  Eigen::LDLT<Mat> solver(gram);
  Mat coeffs(k, k);
  for (int i = 0; i < k; ++i)
    coeffs.col(i) = solver.solve(jac.transpose() * frame.tangent[i].vec());

  ShapeData shape{{}, TangentVector(p, Vec::Zero(dim)), coeffs};
  shape.A.reserve(k * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) shape.A.emplace_back(p, Vec::Zero(dim));

  Vec h_sum = Vec::Zero(dim);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      // Ambient second derivative of the map contracted with the frame
      // coefficients, then doubly projected: drop the radial part, drop the
      // Sigma-tangent part.
      Vec second(dim);
      for (int m = 0; m < dim; ++m) second[m] = coeffs.col(i).dot(hess[m] * coeffs.col(j));
      second -= second.dot(p.coords()) * p.coords();
      for (const TangentVector& e : frame.tangent) second -= second.dot(e.vec()) * e.vec();
      shape.A[i * k + j] = TangentVector(p, second);
      shape.A[j * k + i] = shape.A[i * k + j];
      if (i == j) h_sum += second;
    }
  }
  shape.H = TangentVector(p, h_sum);
  return shape;
}

TangentVector conformal_mean_curvature(const ShapeData& shape, const ConformalFactor& f,
                                       const AdaptedFrame& frame) {
  const SphereJet fj = sphere_grad_hess(f, frame.point);
  const TangentVector grad_perp = frame.project_normal(fj.grad.vec());
  const double k = static_cast<double>(frame.k());
  return (shape.H - grad_perp * k) * std::exp(-2.0 * fj.value);
}

double k_volume(const Immersion& imm, const ConformalFactor* f, int threads) {
  const int count = imm.node_count();
  std::vector<double> terms(count);
  parallel_for(count, threads, [&](int idx) {
    const Immersion::Node nd = imm.node(idx);
    const Chart& chart = imm.chart(nd.chart);
    const Mat jac = chart.jacobian(nd.u);
    const double density = std::sqrt((jac.transpose() * jac).determinant());
    double factor = 1.0;
    if (f) {
      const Vec x = chart.map(nd.u);
      factor = std::exp(imm.k() * f->eval_ambient(x));
    }
    terms[idx] = nd.weight * density * factor;
  });
  return pairwise_sum(terms);
}

NodeGeometry node_geometry(const Immersion& imm, int global_index) {
  const Immersion::Node nd = imm.node(global_index);
  const Chart& chart = imm.chart(nd.chart);
  AdaptedFrame frame = adapted_frame(chart, nd.u);
  ShapeData shape = second_fundamental_form(chart, nd.u, frame);
  Mat jac = chart.jacobian(nd.u);
  const double density = std::sqrt((jac.transpose() * jac).determinant());
  return NodeGeometry{nd.chart,         nd.u,           nd.weight,
                      frame.point,      std::move(jac), density,
                      std::move(frame), std::move(shape), &chart};
}

std::vector<NodeGeometry> all_node_geometry(const Immersion& imm, int threads) {
  const int count = imm.node_count();
  std::vector<NodeGeometry> out;
  out.reserve(count);
  // Fill via resize-free emplacement: compute into an indexed buffer.
  std::vector<std::optional<NodeGeometry>> buf(count);
  parallel_for(count, threads, [&](int idx) { buf[idx] = node_geometry(imm, idx); });
  for (int i = 0; i < count; ++i) out.push_back(std::move(*buf[i]));
  return out;
}

}  // namespace confstab
