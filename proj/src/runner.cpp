#include "confstab/runner.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include "confstab/errors.hpp"
#include "confstab/identities.hpp"
#include "confstab/oracle.hpp"
#include "confstab/pinching.hpp"
#include "confstab/shapes.hpp"
#include "confstab/stability.hpp"
#include "confstab/version.hpp"

namespace confstab {

namespace {

using json = nlohmann::ordered_json;

// Shared lazily-built state across checks of one run.
struct RunState {
  const RunConfig& cfg;
  int threads;
  std::optional<Immersion> shape;
  std::optional<ConformalFactor> factor;
  std::vector<NodeGeometry> nodes;
  std::optional<PinchingEstimate> pinching;

  const Immersion& get_shape() {
    if (!shape) shape = build_shape(cfg);
    return *shape;
  }
  const ConformalFactor& get_factor() {
    if (!factor) factor = build_factor(cfg);
    return *factor;
  }
  const std::vector<NodeGeometry>& get_nodes() {
    if (nodes.empty()) nodes = all_node_geometry(get_shape(), threads);
    return nodes;
  }
  const PinchingEstimate& get_pinching() {
    if (!pinching)
      pinching = delta_estimate(get_factor(), cfg.n, cfg.pinch_point_budget,
                                cfg.pinch_plane_budget, *cfg.seed, threads);
    return *pinching;
  }
  bool analytic_pipeline() {
    return get_shape().chart(0).derivative_kind() == DerivativeKind::analytic &&
           get_factor().kind() == DerivativeKind::analytic;
  }
};

struct CheckResult {
  std::string verdict;
  json record;
};

CheckResult run_identities_check(RunState& st) {
  const RunConfig& cfg = st.cfg;
  const IdentitySuiteResult r =
      run_identity_suite(cfg.n, 0, cfg.identity_instances, *cfg.seed);
  json rec;
  rec["instances"] = r.instances;
  rec["ambient"] = {{"max_antisym_xy", r.max_antisym_xy},
                    {"max_antisym_zw", r.max_antisym_zw},
                    {"max_pair_symmetry", r.max_pair_symmetry},
                    {"max_bianchi", r.max_bianchi},
                    {"max_metricity", r.max_metricity},
                    {"max_sectional_contract", r.max_sectional_contract},
                    {"max_frame_orthonormality", r.max_frame_orthonormality},
                    {"max_rescaled_inner_product", r.max_rescaled_inner_product}};
  rec["lemmas"] = {{"max_lemma_grad", r.max_lemma_grad},
                   {"max_lemma_curv", r.max_lemma_curv},
                   {"max_lemma_shape", r.max_lemma_shape},
                   {"max_prop", r.max_prop},
                   {"max_corollary", r.max_corollary}};
  const double lemma_tol = cfg.tol.lemma;
  const bool ok = r.max_antisym_xy < 1e-8 && r.max_antisym_zw < 1e-8 &&
                  r.max_pair_symmetry < 1e-8 && r.max_bianchi < 1e-8 &&
                  r.max_metricity < 1e-5 && r.max_sectional_contract < 1e-8 &&
                  r.max_frame_orthonormality < 1e-12 &&
                  r.max_rescaled_inner_product < 1e-10 && r.max_lemma_grad < lemma_tol &&
                  r.max_lemma_curv < lemma_tol && r.max_lemma_shape < lemma_tol &&
                  r.max_prop < lemma_tol && r.max_corollary < lemma_tol;
  rec["tolerances"] = {{"lemma", lemma_tol}};
  return {ok ? "pass" : "fail", std::move(rec)};
}

CheckResult run_trace_check(RunState& st) {
  const RunConfig& cfg = st.cfg;
  const Immersion& imm = st.get_shape();
  const ConformalFactor& f = st.get_factor();
  const TraceReport rep =
      build_trace_report(imm, st.get_nodes(), f, cfg.tol.minimality, st.threads);

  const bool analytic = st.analytic_pipeline();
  const double round_tol = analytic ? cfg.tol.trace_round : cfg.tol.trace_round_fd;
  const double conf_tol = analytic ? cfg.tol.trace_conformal : cfg.tol.trace_conformal_fd;
  const double expected = -static_cast<double>(cfg.k) * (cfg.n - cfg.k);

  double max_round_dev = 0.0;
  double max_pairwise = 0.0;
  for (std::size_t i = 0; i < rep.tr_V_q.size(); ++i) {
    max_round_dev = std::max(max_round_dev, std::abs(rep.tr_V_q[i] - expected));
    const double a = rep.tr_Vtilde_qtilde[i];
    const double b = rep.rhs_curvature_form[i];
    const double c = rep.rhs_H_form[i];
    max_pairwise = std::max({max_pairwise, std::abs(a - b), std::abs(a - c), std::abs(b - c)});
  }

  json rec;
  rec["shape"] = imm.label();
  rec["expected_round_trace"] = expected;
  rec["max_round_trace_deviation"] = max_round_dev;
  rec["round_trace_tolerance"] = round_tol;
  rec["gt_minimal"] = rep.minimal_gtilde;
  rec["max_Htilde"] = rep.max_Htilde;
  rec["max_conformal_pairwise_disagreement"] = max_pairwise;
  rec["conformal_tolerance"] = conf_tol;
  rec["integrated"] = {{"tr_V_Q", rep.tr_V_Q},
                       {"tr_Vtilde_Qtilde", rep.tr_Vtilde_Qtilde},
                       {"vol_g", rep.vol_g},
                       {"vol_gtilde", rep.vol_gtilde}};
  rec["nodes"] = {{"tr_V_q", rep.tr_V_q},
                  {"tr_Vtilde_qtilde", rep.tr_Vtilde_qtilde},
                  {"rhs_curvature_form", rep.rhs_curvature_form},
                  {"rhs_H_form", rep.rhs_H_form},
                  {"K_sigma_normal", rep.K_sigma_normal},
                  {"H_norm_sq", rep.H_norm_sq},
                  {"f_value", rep.f_value}};

  const bool round_ok = max_round_dev <= round_tol;
  bool ok = round_ok;
  if (rep.minimal_gtilde) {
    rec["conformal_agreement"] = max_pairwise <= conf_tol ? "pass" : "fail";
    ok = ok && max_pairwise <= conf_tol;
  } else {
    rec["conformal_agreement"] =
        "skipped: Sigma is not gt-minimal (max |Ht| = " + std::to_string(rep.max_Htilde) + ")";
  }
  return {ok ? "pass" : "fail", std::move(rec)};
}

CheckResult run_pinching_check(RunState& st) {
  const PinchingEstimate& est = st.get_pinching();
  json rec;
  rec["estimate"] = true;  // sampled, not certified
  rec["delta_lower"] = est.delta_lower;
  rec["min_K"] = est.min_K;
  rec["max_K"] = est.max_K;
  rec["raw_min_K"] = est.raw_min_K;
  rec["raw_max_K"] = est.raw_max_K;
  rec["samples"] = est.samples;
  rec["refine_iters"] = est.refine_iters;
  rec["seed"] = est.seed;
  rec["point_budget"] = est.point_budget;
  rec["plane_budget"] = est.plane_budget;
  rec["positive"] = est.positive;
  json pts = json::array();
  for (const PointExtremes& pe : est.per_point)
    pts.push_back({{"index", pe.index}, {"min_K", pe.min_K}, {"max_K", pe.max_K}});
  rec["per_point"] = std::move(pts);
  if (!est.positive)
    rec["note"] = "nonpositive sectional curvature sampled; delta is undefined";
  return {"pass", std::move(rec)};
}

json inequality_json(const InequalityLine& line) {
  return {{"name", line.name},   {"lhs", line.lhs},       {"rhs", line.rhs},
          {"margin", line.margin}, {"strict", line.strict}, {"holds", line.holds}};
}

CheckResult run_theorem_check(RunState& st) {
  const RunConfig& cfg = st.cfg;
  TheoremOptions opts;
  opts.minimality_tol = cfg.tol.minimality;
  opts.identity_tol = cfg.tol.theorem_identity;
  opts.node_plane_budget = cfg.theorem_node_plane_budget;
  opts.seed = *cfg.seed;
  const TheoremVerdict v =
      main_theorem_check(st.get_shape(), st.get_factor(), st.get_pinching(), opts, st.threads);

  json rec;
  rec["status"] = v.status;
  rec["delta_lower"] = v.delta;
  rec["max_Htilde"] = v.max_Htilde;
  rec["tr_Qtilde"] = v.tr_Qtilde;
  rec["vol_gtilde"] = v.vol_gtilde;
  rec["min_node_K"] = v.min_node_K;
  rec["identity"] = {{"lhs", v.identity_lhs},
                     {"rhs", v.identity_rhs},
                     {"residual", v.identity_residual},
                     {"tolerance", cfg.tol.theorem_identity},
                     {"holds", v.identity_ok}};
  json ineqs = json::array();
  for (const InequalityLine& line : v.lines) ineqs.push_back(inequality_json(line));
  rec["inequalities"] = std::move(ineqs);

  if (v.status == "pass") return {"pass", std::move(rec)};
  if (v.status == "fail") return {"fail", std::move(rec)};
  if (v.status == "hypothesis_unmet")
    return {"skipped: hypothesis unmet (k > n - 1/delta or delta undefined)", std::move(rec)};
  return {"skipped: Sigma is not gt-minimal at tolerance", std::move(rec)};
}

CheckResult run_oracle_check(RunState& st) {
  const RunConfig& cfg = st.cfg;
  const Immersion& imm = st.get_shape();
  const ConformalFactor& f = st.get_factor();
  json rec;
  bool ok = true;

  // Second variation against Qt for the rescaled constant field of the last
  // coordinate axis (normal to every great subsphere; a valid competitor on
  // any shape).
  {
    const Vec v = basis_vector(cfg.n + 1, cfg.n);
    const RescaledConstantField field(v, f);
    SecondVariationDetails det;
    std::string sv_note;
    double fd = 0.0;
    try {
      fd = fd_second_variation(imm, f, field, 1e-3, st.threads, &det, cfg.tol.minimality);
    } catch (const ResolutionError& e) {
      sv_note = e.what();
    }
    const double qt = Q_tilde_of_field(imm, st.get_nodes(), field, f, st.threads);
    json sv;
    sv["fd_value"] = det.value;
    sv["coarse"] = det.coarse;
    sv["fine"] = det.fine;
    sv["richardson_gap"] = det.richardson_gap;
    sv["Qtilde"] = qt;
    sv["field"] = field.kind();
    if (!sv_note.empty()) {
      sv["verdict"] = "fail";
      sv["note"] = sv_note;
      ok = false;
    } else if (!det.minimal) {
      sv["verdict"] = "skipped: Sigma is not gt-minimal; value is informational";
    } else {
      const double tol =
          std::max(cfg.tol.second_variation_abs, cfg.tol.second_variation_rel * std::abs(qt));
      const bool pass = std::abs(fd - qt) <= tol;
      sv["verdict"] = pass ? "pass" : "fail";
      sv["tolerance"] = tol;
      ok = ok && pass;
    }
    rec["second_variation"] = std::move(sv);
  }

  // Conformal curvature against the finite-difference commutator stencil.
  {
    Rng rng = Rng::stream(*cfg.seed, 0xc0deu);
    const int dim = cfg.n + 1;
    double max_random = 0.0, max_trivial = 0.0;
    for (int inst = 0; inst < cfg.curvature_instances; ++inst) {
      SyntheticInstance si = make_synthetic_instance(cfg.n, 2, rng, false);
      const AmbientPoint& p = si.germ.point;
      const TangentVector& x = si.germ.tangent[0];
      const TangentVector& y = si.germ.tangent[1];
      const TangentVector& z = si.germ.normal.front();
      const SphereJet fj = sphere_grad_hess(si.factor, p);
      const TangentVector analytic = conformal_curvature(fj, x, y, z);
      const TangentVector fd = fd_curvature_check(si.factor, p, x, y, z, 1e-3);
      max_random = std::max(max_random, (analytic - fd).norm());
    }
    for (int inst = 0; inst < 50; ++inst) {
      const ConformalFactor trivial = inst % 2 == 0
                                          ? ConformalFactor::zero()
                                          : ConformalFactor::constant(rng.uniform(-1.0, 1.0));
      const AmbientPoint p(rng.unit_vec(dim));
      Rng sub = Rng::stream(*cfg.seed, 0xd00du + inst);
      auto tangent = [&](Rng& r) {
        Vec w = r.gaussian_vec(dim);
        w -= w.dot(p.coords()) * p.coords();
        return TangentVector(p, Vec(w / w.norm()));
      };
      const TangentVector x = tangent(sub), y = tangent(sub), z = tangent(sub);
      const SphereJet fj = sphere_grad_hess(trivial, p);
      const TangentVector analytic = conformal_curvature(fj, x, y, z);
      const TangentVector fd = fd_curvature_check(trivial, p, x, y, z, 1e-3);
      max_trivial = std::max(max_trivial, (analytic - fd).norm());
    }
    const bool pass =
        max_random <= cfg.tol.curvature_oracle && max_trivial <= cfg.tol.curvature_oracle_trivial;
    rec["curvature_oracle"] = {{"instances", cfg.curvature_instances},
                               {"max_residual_random", max_random},
                               {"max_residual_trivial", max_trivial},
                               {"tolerance_random", cfg.tol.curvature_oracle},
                               {"tolerance_trivial", cfg.tol.curvature_oracle_trivial},
                               {"verdict", pass ? "pass" : "fail"}};
    ok = ok && pass;
  }

  // Divergence-theorem identity.
  {
    const DivergenceCheckResult d =
        divergence_identity_check(imm, f, st.threads, cfg.tol.minimality);
    json dj;
    dj["lhs"] = d.lhs;
    dj["rhs"] = d.rhs;
    dj["residual"] = d.residual;
    const double tol = cfg.tol.divergence * (1.0 + std::abs(d.lhs));
    dj["tolerance"] = tol;
    if (!d.minimal) {
      dj["verdict"] = "skipped: Sigma is not gt-minimal; residual is informational";
    } else {
      const bool pass = d.residual <= tol;
      dj["verdict"] = pass ? "pass" : "fail";
      ok = ok && pass;
    }
    rec["divergence_identity"] = std::move(dj);
  }

  return {ok ? "pass" : "fail", std::move(rec)};
}

}  // namespace

Report run_config(const RunConfig& cfg, const std::vector<std::string>& checks_override,
                  int threads) {
  std::vector<std::string> checks = checks_override.empty() ? cfg.checks : checks_override;
  std::vector<std::string> expanded;
  for (const std::string& c : checks) {
    if (c == "all") {
      expanded.insert(expanded.end(),
                      {"identities", "trace", "pinching", "check_theorem", "oracle"});
    } else {
      expanded.push_back(c);
    }
  }

  Report report(config_echo(cfg), kVersion);
  RunState st{cfg, threads, {}, {}, {}, {}};
  std::vector<std::pair<std::string, double>> per_check;
  const auto t0 = std::chrono::steady_clock::now();
  for (const std::string& name : expanded) {
    const auto c0 = std::chrono::steady_clock::now();
    CheckResult result{"fail", json::object()};
    if (name == "identities")
      result = run_identities_check(st);
    else if (name == "trace")
      result = run_trace_check(st);
    else if (name == "pinching")
      result = run_pinching_check(st);
    else if (name == "check_theorem")
      result = run_theorem_check(st);
    else if (name == "oracle")
      result = run_oracle_check(st);
    else
      throw ConfigError("unknown check '" + name + "'");
    const auto c1 = std::chrono::steady_clock::now();
    per_check.emplace_back(name, std::chrono::duration<double>(c1 - c0).count());
    report.add_check(name, result.verdict, std::move(result.record));
  }
  const auto t1 = std::chrono::steady_clock::now();
  report.set_timing(std::chrono::duration<double>(t1 - t0).count(), std::move(per_check));
  return report;
}

}  // namespace confstab
