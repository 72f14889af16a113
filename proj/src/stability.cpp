#include "confstab/stability.hpp"

#include <cmath>
#include <stdexcept>

#include "confstab/parallel.hpp"

namespace confstab {

namespace {

TangentVector project_normal_germ(const SigmaGerm& germ, const Vec& v) {
  Vec out = Vec::Zero(v.size());
  for (const TangentVector& e : germ.normal) out += e.vec().dot(v) * e.vec();
  return TangentVector(germ.point, std::move(out));
}

// Sample of the projected constant field induced by v, using the exact
// derivative rule for constant fields.
FieldSample constant_sample(const SigmaGerm& germ, const Vec& v) {
  const Vec& x = germ.point.coords();
  const Vec v_amb = v - v.dot(x) * x;
  const int k = germ.k();
  FieldSample s{project_normal_germ(germ, v_amb), {}};
  Vec top(k);
  for (int j = 0; j < k; ++j) top[j] = germ.tangent[j].vec().dot(v_amb);
  s.nabla_perp.reserve(k);
  for (int i = 0; i < k; ++i) {
    Vec d = Vec::Zero(x.size());
    for (int j = 0; j < k; ++j) d -= top[j] * germ.a(i, j).vec();
    s.nabla_perp.emplace_back(germ.point, std::move(d));
  }
  return s;
}

FieldSample rescale_sample(const SigmaGerm& germ, const FieldSample& base, const SphereJet& fj) {
  const double emf = std::exp(-fj.value);
  FieldSample s{base.value * emf, {}};
  s.nabla_perp.reserve(base.nabla_perp.size());
  for (int i = 0; i < germ.k(); ++i) {
    const double eif = fj.dir(germ.tangent[i].vec());
    s.nabla_perp.push_back((base.nabla_perp[i] - base.value * eif) * emf);
  }
  return s;
}

double conformal_mean_norm(const SigmaGerm& germ, const SphereJet& fj) {
  const TangentVector grad_perp = project_normal_germ(germ, fj.grad.vec());
  const TangentVector ht = (germ.H - grad_perp * static_cast<double>(germ.k())) *
                           std::exp(-2.0 * fj.value);
  return ht.norm();
}

}  // namespace

SigmaGerm germ_of(const NodeGeometry& g) {
  return SigmaGerm{g.point, g.frame.tangent, g.frame.normal, g.shape.A, g.shape.H};
}

Vec NormalField::ambient_value(const Vec&) const {
  throw std::logic_error("NormalField: no ambient extension available");
}

Mat NormalField::ambient_jacobian(const Vec&) const {
  throw std::logic_error("NormalField: no ambient extension available");
}

ConstantProjectionField::ConstantProjectionField(Vec v) : v_(std::move(v)) {}

FieldSample ConstantProjectionField::sample(const NodeGeometry& node) const {
  return constant_sample(germ_of(node), v_);
}

Vec ConstantProjectionField::ambient_value(const Vec& x) const { return v_ - v_.dot(x) * x; }

Mat ConstantProjectionField::ambient_jacobian(const Vec& x) const {
  const int d = static_cast<int>(x.size());
  return Mat(-x * v_.transpose() - v_.dot(x) * Mat::Identity(d, d));
}

RescaledConstantField::RescaledConstantField(Vec v, const ConformalFactor& f)
    : v_(std::move(v)), f_(&f) {}

FieldSample RescaledConstantField::sample(const NodeGeometry& node) const {
  const SigmaGerm germ = germ_of(node);
  const SphereJet fj = sphere_grad_hess(*f_, node.point);
  return rescale_sample(germ, constant_sample(germ, v_), fj);
}

Vec RescaledConstantField::ambient_value(const Vec& x) const {
  return std::exp(-f_->eval_ambient(x)) * (v_ - v_.dot(x) * x);
}

Mat RescaledConstantField::ambient_jacobian(const Vec& x) const {
  const int d = static_cast<int>(x.size());
  const Vec vc = v_ - v_.dot(x) * x;
  const Vec gradF = f_->ambient_grad(x);
  Mat jac = -x * v_.transpose() - v_.dot(x) * Mat::Identity(d, d);
  jac -= vc * gradF.transpose();
  return Mat(std::exp(-f_->eval_ambient(x)) * jac);
}

CustomNormalField::CustomNormalField(AmbientFn eval, double chart_step)
    : eval_(std::move(eval)), step_(chart_step) {}

FieldSample CustomNormalField::sample(const NodeGeometry& node) const {
  if (!node.chart_ref)
    throw std::logic_error("CustomNormalField: node has no chart reference");
  const Vec raw = eval_(node.point.coords());
  const SigmaGerm germ = germ_of(node);
  const TangentVector value = project_normal_germ(germ, raw);
  if ((raw - value.vec()).norm() > 1e-8 * std::max(1.0, raw.norm()))
    throw std::invalid_argument("CustomNormalField: field is not normal to Sigma at a node");
  FieldSample s{value, {}};
  // Differentiate along chart directions and project onto the normal bundle.
  for (int i = 0; i < germ.k(); ++i) {
    const Vec dir = node.shape.tangent_coeffs.col(i);
    Vec up = node.u + step_ * dir;
    Vec um = node.u - step_ * dir;
    Vec xp = node.chart_ref->map(up);
    Vec xm = node.chart_ref->map(um);
    xp /= xp.norm();
    xm /= xm.norm();
    const Vec dfield = (eval_(xp) - eval_(xm)) / (2.0 * step_);
    s.nabla_perp.push_back(project_normal_germ(germ, dfield));
  }
  return s;
}

QuadFormBreakdown q_round_pointwise(const SigmaGerm& germ, const FieldSample& field) {
  QuadFormBreakdown out{0.0, 0.0, 0.0};
  const int k = germ.k();
  for (int i = 0; i < k; ++i) {
    out.grad_term += field.nabla_perp[i].squared_norm();
    out.curv_term +=
        round_curvature(field.value, germ.tangent[i], field.value).dot(germ.tangent[i]);
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double aij = germ.a(i, j).dot(field.value);
      out.shape_term += aij * aij;
    }
  return out;
}

QuadFormBreakdown q_round_pointwise(const NodeGeometry& node, const NormalField& field) {
  return q_round_pointwise(germ_of(node), field.sample(node));
}

QuadFormBreakdown q_tilde_pointwise(const SigmaGerm& germ, const FieldSample& field,
                                    const SphereJet& fj) {
  QuadFormBreakdown out{0.0, 0.0, 0.0};
  const int k = germ.k();
  const double em2f = std::exp(-2.0 * fj.value);

  for (int i = 0; i < k; ++i) {
    // Conformal covariant derivative along E_i, projected to the normal
    // bundle. In the gt-orthonormal frame Et_i = e^{-f} E_i the squared
    // gt-norms cancel the frame scaling, leaving plain g-norms of these.
    const TangentVector cc =
        conformal_connection(fj, germ.tangent[i], field.value, field.nabla_perp[i]);
    out.grad_term += project_normal_germ(germ, cc.vec()).squared_norm();
    // gt(Rt(V, Et_i)V, Et_i) = g(Rt(V, E_i)V, E_i).
    out.curv_term +=
        conformal_curvature(fj, field.value, germ.tangent[i], field.value).dot(germ.tangent[i]);
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      // At(Et_i, Et_j) through the conformal connection; only the normal
      // projection survives, and the gt-pairing against V restores the
      // e^{2f} factor.
      const TangentVector nab_perp = germ.a(i, j) * em2f;
      const TangentVector cc = conformal_connection(fj, germ.tangent[i] * std::exp(-fj.value),
                                                    germ.tangent[j] * std::exp(-fj.value),
                                                    nab_perp);
      const double pairing =
          std::exp(2.0 * fj.value) * project_normal_germ(germ, cc.vec()).dot(field.value);
      out.shape_term += pairing * pairing;
    }
  return out;
}

QuadFormBreakdown q_tilde_pointwise(const NodeGeometry& node, const NormalField& field,
                                    const ConformalFactor& f) {
  return q_tilde_pointwise(germ_of(node), field.sample(node), sphere_grad_hess(f, node.point));
}

TildeTermIdentities tilde_term_identities(const SigmaGerm& germ, const FieldSample& field,
                                          const SphereJet& fj) {
  const int k = germ.k();
  const double vsq = field.value.squared_norm();
  const double vf = fj.dir(field.value.vec());
  double grad_top_sq = 0.0;
  double div_sigma = 0.0;
  double top_deriv_vsq = 0.0;  // (grad_top f)(|V|^2)
  for (int i = 0; i < k; ++i) {
    const double eif = fj.dir(germ.tangent[i].vec());
    grad_top_sq += eif * eif;
    div_sigma += fj.hess(germ.tangent[i].vec(), germ.tangent[i].vec());
    top_deriv_vsq += 2.0 * eif * field.nabla_perp[i].dot(field.value);
  }

  const QuadFormBreakdown direct = q_tilde_pointwise(germ, field, fj);
  const QuadFormBreakdown round = q_round_pointwise(germ, field);

  TildeTermIdentities out{};
  out.grad_lhs = direct.grad_term;
  out.grad_rhs = round.grad_term + top_deriv_vsq + grad_top_sq * vsq;
  out.curv_lhs = direct.curv_term;
  out.curv_rhs = round.curv_term + k * vf * vf -
                 k * fj.hess(field.value.vec(), field.value.vec()) -
                 k * fj.grad_norm_sq() * vsq - div_sigma * vsq + grad_top_sq * vsq;
  out.shape_lhs = direct.shape_term;
  out.shape_rhs = round.shape_term + k * vf * vf - 2.0 * vf * germ.H.dot(field.value);
  return out;
}

double q_tilde_via_identities(const SigmaGerm& germ, const FieldSample& field,
                              const SphereJet& fj, double minimality_tol) {
  if (conformal_mean_norm(germ, fj) <= minimality_tol)
    return q_tilde_minimal_prop(germ, field, fj, minimality_tol);
  const TildeTermIdentities t = tilde_term_identities(germ, field, fj);
  return t.grad_rhs - t.curv_rhs - t.shape_rhs;
}

double q_tilde_minimal_prop(const SigmaGerm& germ, const FieldSample& field, const SphereJet& fj,
                            double minimality_tol) {
  if (conformal_mean_norm(germ, fj) > minimality_tol)
    throw std::invalid_argument(
        "q_tilde_minimal_prop: submanifold is not gt-minimal at this point");
  const int k = germ.k();
  const double vsq = field.value.squared_norm();
  double top_deriv_vsq = 0.0;
  double div_sigma = 0.0;
  for (int i = 0; i < k; ++i) {
    const double eif = fj.dir(germ.tangent[i].vec());
    top_deriv_vsq += 2.0 * eif * field.nabla_perp[i].dot(field.value);
    div_sigma += fj.hess(germ.tangent[i].vec(), germ.tangent[i].vec());
  }
  const double q = q_round_pointwise(germ, field).total();
  return q + top_deriv_vsq + k * fj.hess(field.value.vec(), field.value.vec()) +
         k * fj.grad_norm_sq() * vsq + div_sigma * vsq;
}

double q_tilde_rescaled_corollary(const SigmaGerm& germ, const FieldSample& unrescaled,
                                  const SphereJet& fj, double minimality_tol) {
  if (conformal_mean_norm(germ, fj) > minimality_tol)
    throw std::invalid_argument(
        "q_tilde_rescaled_corollary: submanifold is not gt-minimal at this point");
  const int k = germ.k();
  const double em2f = std::exp(-2.0 * fj.value);
  const double vsq = unrescaled.value.squared_norm();
  double grad_top_sq = 0.0;
  double div_sigma = 0.0;
  for (int i = 0; i < k; ++i) {
    const double eif = fj.dir(germ.tangent[i].vec());
    grad_top_sq += eif * eif;
    div_sigma += fj.hess(germ.tangent[i].vec(), germ.tangent[i].vec());
  }
  const double q = q_round_pointwise(germ, unrescaled).total();
  return em2f * (q - grad_top_sq * vsq +
                 k * fj.hess(unrescaled.value.vec(), unrescaled.value.vec()) +
                 k * fj.grad_norm_sq() * vsq + div_sigma * vsq);
}

double trace_q_over_V(const SigmaGerm& germ) {
  const int dim = germ.point.ambient_dim();
  return trace_q_over_V(germ, Mat::Identity(dim, dim));
}

double trace_q_over_V(const SigmaGerm& germ, const Mat& basis) {
  double sum = 0.0;
  for (int a = 0; a < basis.cols(); ++a)
    sum += q_round_pointwise(germ, constant_sample(germ, basis.col(a))).total();
  return sum;
}

double K_sigma_normal(const SigmaGerm& germ, const SphereJet& fj) {
  double sum = 0.0;
  for (const TangentVector& ei : germ.tangent)
    for (const TangentVector& er : germ.normal)
      sum += conformal_sectional(fj, ei.vec(), er.vec());
  return sum;
}

TildeTraceResult trace_qtilde_over_Vtilde(const SigmaGerm& germ, const SphereJet& fj,
                                          double minimality_tol) {
  const int dim = germ.point.ambient_dim();
  return trace_qtilde_over_Vtilde(germ, fj, Mat::Identity(dim, dim), minimality_tol);
}

TildeTraceResult trace_qtilde_over_Vtilde(const SigmaGerm& germ, const SphereJet& fj,
                                          const Mat& basis, double minimality_tol) {
  TildeTraceResult out{0.0, 0.0, 0.0, conformal_mean_norm(germ, fj), false};
  out.minimal = out.Htilde_norm <= minimality_tol;
  for (int a = 0; a < basis.cols(); ++a) {
    const FieldSample base = constant_sample(germ, basis.col(a));
    out.direct += q_tilde_pointwise(germ, rescale_sample(germ, base, fj), fj).total();
  }
  const double kt = K_sigma_normal(germ, fj);
  const double em2f = std::exp(-2.0 * fj.value);
  double grad_perp_sq = 0.0;
  for (const TangentVector& er : germ.normal) {
    const double c = fj.dir(er.vec());
    grad_perp_sq += c * c;
  }
  const double k = static_cast<double>(germ.k());
  out.rhs_curvature_form = -kt + k * grad_perp_sq * em2f;
  out.rhs_H_form = -kt + germ.H.squared_norm() / k * em2f;
  return out;
}

double integrate_nodes(const Immersion& imm, std::span<const NodeGeometry> nodes,
                       const std::function<double(const NodeGeometry&)>& pointwise,
                       const ConformalFactor* measure_factor, int threads) {
  std::vector<double> terms(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), threads, [&](int i) {
    const NodeGeometry& nd = nodes[i];
    double factor = 1.0;
    if (measure_factor) factor = std::exp(imm.k() * measure_factor->eval(nd.point));
    terms[i] = pointwise(nd) * nd.weight * nd.density * factor;
  });
  return pairwise_sum(terms);
}

double Q_round_of_field(const Immersion& imm, std::span<const NodeGeometry> nodes,
                        const NormalField& field, int threads) {
  return integrate_nodes(
      imm, nodes,
      [&](const NodeGeometry& nd) { return q_round_pointwise(nd, field).total(); }, nullptr,
      threads);
}

double Q_tilde_of_field(const Immersion& imm, std::span<const NodeGeometry> nodes,
                        const NormalField& field, const ConformalFactor& f, int threads) {
  return integrate_nodes(
      imm, nodes,
      [&](const NodeGeometry& nd) { return q_tilde_pointwise(nd, field, f).total(); }, &f,
      threads);
}

double trace_Q_round(const Immersion& imm, std::span<const NodeGeometry> nodes, int threads) {
  return integrate_nodes(
      imm, nodes, [&](const NodeGeometry& nd) { return trace_q_over_V(germ_of(nd)); }, nullptr,
      threads);
}

double trace_Q_tilde(const Immersion& imm, std::span<const NodeGeometry> nodes,
                     const ConformalFactor& f, int threads) {
  return integrate_nodes(
      imm, nodes,
      [&](const NodeGeometry& nd) {
        const SphereJet fj = sphere_grad_hess(f, nd.point);
        return trace_qtilde_over_Vtilde(germ_of(nd), fj).direct;
      },
      &f, threads);
}

TraceReport build_trace_report(const Immersion& imm, std::span<const NodeGeometry> nodes,
                               const ConformalFactor& f, double minimality_tol, int threads) {
  const int count = static_cast<int>(nodes.size());
  TraceReport rep;
  rep.tr_V_q.resize(count);
  rep.tr_Vtilde_qtilde.resize(count);
  rep.rhs_curvature_form.resize(count);
  rep.rhs_H_form.resize(count);
  rep.K_sigma_normal.resize(count);
  rep.H_norm_sq.resize(count);
  rep.f_value.resize(count);
  std::vector<double> htilde(count);

  parallel_for(count, threads, [&](int i) {
    const NodeGeometry& nd = nodes[i];
    const SigmaGerm germ = germ_of(nd);
    const SphereJet fj = sphere_grad_hess(f, nd.point);
    rep.tr_V_q[i] = trace_q_over_V(germ);
    const TildeTraceResult tt = trace_qtilde_over_Vtilde(germ, fj, minimality_tol);
    rep.tr_Vtilde_qtilde[i] = tt.direct;
    rep.rhs_curvature_form[i] = tt.rhs_curvature_form;
    rep.rhs_H_form[i] = tt.rhs_H_form;
    rep.K_sigma_normal[i] = K_sigma_normal(germ, fj);
    rep.H_norm_sq[i] = germ.H.squared_norm();
    rep.f_value[i] = fj.value;
    htilde[i] = tt.Htilde_norm;
  });

  std::vector<double> round_terms(count), tilde_terms(count), volg(count), volgt(count);
  for (int i = 0; i < count; ++i) {
    const NodeGeometry& nd = nodes[i];
    const double base = nd.weight * nd.density;
    const double conf = std::exp(imm.k() * rep.f_value[i]);
    round_terms[i] = rep.tr_V_q[i] * base;
    tilde_terms[i] = rep.tr_Vtilde_qtilde[i] * base * conf;
    volg[i] = base;
    volgt[i] = base * conf;
  }
  rep.tr_V_Q = pairwise_sum(round_terms);
  rep.tr_Vtilde_Qtilde = pairwise_sum(tilde_terms);
  rep.vol_g = pairwise_sum(volg);
  rep.vol_gtilde = pairwise_sum(volgt);
  rep.max_Htilde = 0.0;
  for (double h : htilde) rep.max_Htilde = std::max(rep.max_Htilde, h);
  rep.minimal_gtilde = rep.max_Htilde <= minimality_tol;
  return rep;
}

}  // namespace confstab
