#include "confstab/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "confstab/errors.hpp"
#include "confstab/parallel.hpp"

namespace confstab {

namespace {

double max_htilde_over_nodes(const Immersion& imm, std::span<const NodeGeometry> nodes,
                             const ConformalFactor& f, int threads) {
  std::vector<double> vals(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), threads, [&](int i) {
    vals[i] = conformal_mean_curvature(nodes[i].shape, f, nodes[i].frame).norm();
  });
  double m = 0.0;
  for (double v : vals) m = std::max(m, v);
  return m;
}

}  // namespace

VariationPath::VariationPath(const Immersion& base, const NormalField& field)
    : base_(&base), field_(&field) {
  if (!field.has_ambient_extension())
    throw std::invalid_argument("VariationPath: field needs an ambient extension");
}

Vec VariationPath::flow_point(const Vec& x, const Vec& v, double t) {
  const double sigma = v.norm();
  if (sigma < 1e-14) return x;
  return std::cos(t * sigma) * x + (std::sin(t * sigma) / sigma) * v;
}

Mat VariationPath::flow_jacobian(const Vec& x, const Vec& v, const Mat& dv, double t) {
  const int d = static_cast<int>(x.size());
  const double sigma = v.norm();
  if (sigma < 1e-14) return Mat(Mat::Identity(d, d) + t * dv);
  const double c = std::cos(t * sigma);
  const double s = std::sin(t * sigma);
  const Vec dsigma = dv.transpose() * v / sigma;
  Mat jac = c * Mat::Identity(d, d) + (s / sigma) * dv;
  jac += (-t * s) * x * dsigma.transpose();
  jac += ((t * sigma * c - s) / (sigma * sigma)) * v * dsigma.transpose();
  return jac;
}

Immersion VariationPath::deformed(double t) const {
  std::vector<Chart> charts;
  charts.reserve(base_->chart_count());
  const NormalField* field = field_;
  for (int c = 0; c < base_->chart_count(); ++c) {
    const Chart& base_chart = base_->chart(c);
    auto base_map = [&base_chart](const Vec& u) { return base_chart.map(u); };
    auto base_jac = [&base_chart](const Vec& u) { return base_chart.jacobian(u); };
    Chart::MapFn map = [base_map, field, t](const Vec& u) {
      const Vec x = base_map(u);
      return flow_point(x, field->ambient_value(x), t);
    };
    Chart::JacFn jac = [base_map, base_jac, field, t](const Vec& u) {
      const Vec x = base_map(u);
      const Vec v = field->ambient_value(x);
      const Mat dv = field->ambient_jacobian(x);
      return Mat(flow_jacobian(x, v, dv, t) * base_jac(u));
    };
    charts.emplace_back(base_chart.domain(), std::move(map), std::move(jac), Chart::HessFn{},
                        base_chart.derivative_kind());
  }
  return Immersion(std::move(charts), base_->k(), base_->n(), base_->label() + "[deformed]",
                   base_->nodes_per_axis());
}

double fd_second_variation(const Immersion& imm, const ConformalFactor& f,
                           const NormalField& field, double t_step, int threads,
                           SecondVariationDetails* details, double minimality_tol) {
  if (t_step <= 0) throw std::invalid_argument("fd_second_variation: t_step must be positive");
  const VariationPath path(imm, field);
  const double v0 = k_volume(imm, &f, threads);
  auto vol_at = [&](double t) { return k_volume(path.deformed(t), &f, threads); };

  auto second_difference = [&](double t) {
    return (vol_at(t) - 2.0 * v0 + vol_at(-t)) / (t * t);
  };
  const double coarse = second_difference(t_step);
  const double fine = second_difference(0.5 * t_step);
  const double value = (4.0 * fine - coarse) / 3.0;
  const double gap = std::abs(fine - coarse);

  SecondVariationDetails local;
  local.value = value;
  local.coarse = coarse;
  local.fine = fine;
  local.richardson_gap = gap;
  const std::vector<NodeGeometry> nodes = all_node_geometry(imm, threads);
  local.max_Htilde = max_htilde_over_nodes(imm, nodes, f, threads);
  local.minimal = local.max_Htilde <= minimality_tol;
  if (details) *details = local;

  if (gap > std::max(1e-3, 1e-2 * std::abs(value)))
    throw ResolutionError("fd_second_variation: Richardson stencils disagree; "
                          "deformed volume is under-resolved");
  return value;
}

TangentVector fd_curvature_check(const ConformalFactor& f, const AmbientPoint& p,
                                 const TangentVector& x, const TangentVector& y,
                                 const TangentVector& z, double h) {
  if (h < 1e-5 || h > 1e-1)
    throw std::invalid_argument("fd_curvature_check: step h outside [1e-5, 1e-1]");
  require_same_base(x, y, "fd_curvature_check");
  require_same_base(x, z, "fd_curvature_check");
  const Vec xv = x.vec(), yv = y.vec(), zv = z.vec();

  // Projected-constant extensions: for W(q) = w - <w,q>q the round
  // covariant derivative along any tangent U at q is exactly -<w,q>U, so
  // the inner conformal derivative needs no differencing.
  auto extend = [](const Vec& w, const Vec& q) { return Vec(w - w.dot(q) * q); };
  auto inner = [&](const Vec& dir_vec, const Vec& field_vec, const Vec& q) {
    // grad-tilde along the extension of dir_vec applied to the extension of
    // field_vec, evaluated at q.
    const AmbientPoint base = AmbientPoint::normalized(q);
    const SphereJet fj = sphere_grad_hess(f, base);
    const TangentVector dir(base, extend(dir_vec, base.coords()));
    const TangentVector fld(base, extend(field_vec, base.coords()));
    const TangentVector nabla(base, Vec(-field_vec.dot(base.coords()) * dir.vec()));
    return conformal_connection(fj, dir, fld, nabla).vec();
  };
  // Outer derivative of the field q -> inner(a, b, q) along direction d at
  // p, by central differences over great-circle arcs, then the conformal
  // connection terms at p.
  const SphereJet fj0 = sphere_grad_hess(f, p);
  auto outer = [&](const Vec& d, const Vec& a, const Vec& b, double step) {
    auto arc = [&](double s) { return Vec((p.coords() + s * d).normalized()); };
    const Vec w_plus = inner(a, b, arc(step));
    const Vec w_minus = inner(a, b, arc(-step));
    Vec flat = (w_plus - w_minus) / (2.0 * step);
    flat -= flat.dot(p.coords()) * p.coords();
    const TangentVector w0(p, inner(a, b, p.coords()));
    const TangentVector dvec(p, extend(d, p.coords()));
    const TangentVector nabla(p, flat);
    return conformal_connection(fj0, dvec, w0, nabla).vec();
  };
  auto commutator = [&](double step) {
    // R(X,Y)Z = grad_Y grad_X Z - grad_X grad_Y Z; the bracket term drops
    // because the extensions commute at p.
    return Vec(outer(yv, xv, zv, step) - outer(xv, yv, zv, step));
  };
  const Vec coarse = commutator(h);
  const Vec fine = commutator(0.5 * h);
  return TangentVector(p, (4.0 * fine - coarse) / 3.0);
}

DivergenceCheckResult divergence_identity_check(const Immersion& imm, const ConformalFactor& f,
                                                int threads, double minimality_tol) {
  const std::vector<NodeGeometry> nodes = all_node_geometry(imm, threads);
  const int k = imm.k();
  DivergenceCheckResult out;
  out.max_Htilde = max_htilde_over_nodes(imm, nodes, f, threads);
  out.minimal = out.max_Htilde <= minimality_tol;

  std::vector<double> lhs_terms(nodes.size()), rhs_terms(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), threads, [&](int i) {
    const NodeGeometry& nd = nodes[i];
    const SphereJet fj = sphere_grad_hess(f, nd.point);
    double div_sigma = 0.0;
    double grad_top_sq = 0.0;
    for (const TangentVector& e : nd.frame.tangent) {
      div_sigma += fj.hess(e.vec(), e.vec());
      const double c = fj.dir(e.vec());
      grad_top_sq += c * c;
    }
    double grad_perp_sq = 0.0;
    for (const TangentVector& e : nd.frame.normal) {
      const double c = fj.dir(e.vec());
      grad_perp_sq += c * c;
    }
    const double weight = nd.weight * nd.density * std::exp((k - 2) * fj.value);
    lhs_terms[i] = div_sigma * weight;
    rhs_terms[i] = (-k * grad_perp_sq - (k - 2) * grad_top_sq) * weight;
  });
  out.lhs = pairwise_sum(lhs_terms);
  out.rhs = pairwise_sum(rhs_terms);
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

TheoremVerdict main_theorem_check(const Immersion& imm, const ConformalFactor& f,
                                  const PinchingEstimate& pinching, const TheoremOptions& opts,
                                  int threads) {
  const int k = imm.k();
  const int n = imm.n();
  if (k == 1)
    throw std::invalid_argument(
        "main_theorem_check: k = 1 is rejected; the argument needs k >= 2");
  const std::vector<NodeGeometry> nodes = all_node_geometry(imm, threads);
  const int count = static_cast<int>(nodes.size());

  TheoremVerdict verdict;
  verdict.max_Htilde = max_htilde_over_nodes(imm, nodes, f, threads);
  if (verdict.max_Htilde > opts.minimality_tol) {
    verdict.status = "not_gtilde_minimal";
    return verdict;
  }

  // Per-node scalars. Sectional extremes at each node come from the
  // pinching estimator seeded with every frame-pair plane, which keeps the
  // frame sums comparable against k(n-k) min and k(k-1) max rigorously.
  std::vector<double> knormal(count), tang_sum(count), trace_direct(count);
  std::vector<double> grad_perp_sq(count), grad_top_sq(count), fval(count);
  std::vector<double> node_min(count), node_max(count);
  parallel_for(count, threads, [&](int i) {
    const NodeGeometry& nd = nodes[i];
    const SigmaGerm germ = germ_of(nd);
    const SphereJet fj = sphere_grad_hess(f, nd.point);
    knormal[i] = K_sigma_normal(germ, fj);
    fval[i] = fj.value;
    double s = 0.0;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        if (a != b) s += conformal_sectional(fj, germ.tangent[a].vec(), germ.tangent[b].vec());
    tang_sum[i] = s;
    trace_direct[i] = trace_qtilde_over_Vtilde(germ, fj, opts.minimality_tol).direct;
    double gp = 0.0, gt = 0.0;
    for (const TangentVector& e : nd.frame.normal) {
      const double c = fj.dir(e.vec());
      gp += c * c;
    }
    for (const TangentVector& e : nd.frame.tangent) {
      const double c = fj.dir(e.vec());
      gt += c * c;
    }
    grad_perp_sq[i] = gp;
    grad_top_sq[i] = gt;

    std::vector<std::pair<Vec, Vec>> seeds;
    std::vector<Vec> all;
    for (const TangentVector& e : nd.frame.tangent) all.push_back(e.vec());
    for (const TangentVector& e : nd.frame.normal) all.push_back(e.vec());
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = a + 1; b < all.size(); ++b) seeds.emplace_back(all[a], all[b]);
    Rng rng = Rng::stream(opts.seed, static_cast<std::uint64_t>(i) + 0x7fd1u);
    const PlaneExtremes ex =
        extremal_sectional_at_point(f, nd.point, opts.node_plane_budget, rng, opts.refine, &seeds);
    node_min[i] = ex.min_K;
    node_max[i] = ex.max_K;
  });

  auto weighted_sum = [&](const std::function<double(int)>& term, double exponent) {
    std::vector<double> xs(count);
    for (int i = 0; i < count; ++i)
      xs[i] = term(i) * nodes[i].weight * nodes[i].density * std::exp(exponent * fval[i]);
    return pairwise_sum(xs);
  };

  const double km2 = static_cast<double>(k - 2);
  const double kk1 = static_cast<double>(k) * (k - 1);

  // (1) integral of the tangential sectional sum against dgt equals the
  // e^{(k-2)f}-weighted display.
  verdict.identity_lhs = weighted_sum([&](int i) { return tang_sum[i]; }, k);
  const double int_e = weighted_sum([&](int) { return 1.0; }, km2);
  const double int_top = weighted_sum([&](int i) { return grad_top_sq[i]; }, km2);
  const double int_perp = weighted_sum([&](int i) { return grad_perp_sq[i]; }, km2);
  verdict.identity_rhs = kk1 * int_e + (k - 1) * km2 * int_top + kk1 * int_perp;
  verdict.identity_residual = std::abs(verdict.identity_lhs - verdict.identity_rhs);
  verdict.identity_ok =
      verdict.identity_residual <= opts.identity_tol * (1.0 + std::abs(verdict.identity_lhs));

  verdict.vol_gtilde = weighted_sum([&](int) { return 1.0; }, k);
  verdict.tr_Qtilde = weighted_sum([&](int i) { return trace_direct[i]; }, k);
  verdict.delta = pinching.delta_lower;
  double min_node = node_min[0];
  for (int i = 0; i < count; ++i) min_node = std::min(min_node, node_min[i]);
  verdict.min_node_K = min_node;

  auto add_line = [&](const std::string& name, double lhs, double rhs, bool strict) {
    InequalityLine line{name, lhs, rhs, rhs - lhs, strict, false};
    line.holds = strict ? line.margin > 0.0
                        : line.margin >= -1e-9 * (1.0 + std::abs(lhs) + std::abs(rhs));
    verdict.lines.push_back(line);
  };

  // (2) strict lower bound of the display by its |grad_perp f|^2 part.
  add_line("tangential_integral_gt_kk1_grad_perp", kk1 * int_perp, verdict.identity_lhs, true);

  // (3) the trace is negative, with the margin scaled by vol_gt.
  add_line("trace_Qtilde_negative", verdict.tr_Qtilde, 0.0, true);

  // Chain line: tr Qt < int [-Kt(Sigma,N) + S/(k-1)] dgt.
  const double chain_b = weighted_sum(
      [&](int i) { return -knormal[i] + tang_sum[i] / (k - 1.0); }, k);
  add_line("trace_lt_sectional_bound", verdict.tr_Qtilde, chain_b, true);

  // Chain line: the sectional bound is dominated by node extremes.
  const double chain_c = weighted_sum(
      [&](int i) { return -static_cast<double>(k) * (n - k) * node_min[i] + k * node_max[i]; },
      k);
  add_line("sectional_bound_le_extremes", chain_b, chain_c, false);

  const bool delta_ok = pinching.positive && std::isfinite(pinching.delta_lower) &&
                        pinching.delta_lower > 0.0;
  const double inv_delta = delta_ok ? 1.0 / pinching.delta_lower : 0.0;
  if (!delta_ok || k > n - inv_delta) {
    verdict.status = "hypothesis_unmet";
    return verdict;
  }

  // (4) pinching bound: C <= D = -k int min Kt (n - k - 1/delta) dgt < 0.
  const double chain_d = weighted_sum(
      [&](int i) { return -static_cast<double>(k) * node_min[i] * (n - k - inv_delta); }, k);
  add_line("extremes_le_pinching_bound", chain_c, chain_d, false);
  add_line("pinching_bound_negative", chain_d, 0.0, true);

  bool all_hold = verdict.identity_ok;
  for (const InequalityLine& line : verdict.lines) all_hold = all_hold && line.holds;
  verdict.status = all_hold ? "pass" : "fail";
  return verdict;
}

}  // namespace confstab
