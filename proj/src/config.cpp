#include "confstab/config.hpp"

#include <fstream>
#include <set>

#include "confstab/errors.hpp"
#include "confstab/expr.hpp"
#include "confstab/shapes.hpp"

namespace confstab {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

template <typename T>
T get_required(const json& j, const std::string& field) {
  if (!j.contains(field)) field_error(field, "missing");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    field_error(field, std::string("bad type (") + e.what() + ")");
  }
}

template <typename T>
T get_or(const json& j, const std::string& field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    field_error(field, std::string("bad type (") + e.what() + ")");
  }
}

const std::set<std::string>& known_checks() {
  static const std::set<std::string> names = {"identities", "trace", "pinching", "check_theorem",
                                              "oracle"};
  return names;
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return parse_config_json(j);
}

RunConfig parse_config_json(const json& j) {
  RunConfig cfg;
  cfg.n = get_required<int>(j, "n");
  cfg.k = get_required<int>(j, "k");
  cfg.resolution = get_or<int>(j, "resolution", 32);
  if (j.contains("seed")) cfg.seed = get_required<std::uint64_t>(j, "seed");

  const json shape = get_required<json>(j, "shape");
  cfg.shape.type = get_required<std::string>(shape, "type");
  cfg.shape.theta = get_or<double>(shape, "theta", 0.0);
  cfg.shape.p = get_or<int>(shape, "p", 0);
  cfg.shape.q = get_or<int>(shape, "q", 0);
  cfg.shape.radii = get_or<std::vector<double>>(shape, "radii", {});
  cfg.shape.components = get_or<std::vector<std::string>>(shape, "components", {});
  if (shape.contains("domain")) {
    for (const auto& axis : shape.at("domain")) {
      if (!axis.is_array() || axis.size() != 3)
        field_error("shape.domain", "each axis needs [lo, hi, periodic]");
      cfg.shape.domain_lo.push_back(axis.at(0).get<double>());
      cfg.shape.domain_hi.push_back(axis.at(1).get<double>());
      cfg.shape.domain_periodic.push_back(axis.at(2).get<bool>());
    }
  }

  const json factor = get_required<json>(j, "conformal_factor");
  cfg.factor.type = get_required<std::string>(factor, "type");
  cfg.factor.c = get_or<double>(factor, "c", 0.0);
  cfg.factor.epsilon = get_or<double>(factor, "epsilon", 0.0);
  cfg.factor.split = get_or<int>(factor, "split", -1);
  cfg.factor.axis = get_or<std::vector<double>>(factor, "axis", {});
  cfg.factor.formula = get_or<std::string>(factor, "formula", "");

  cfg.checks = get_or<std::vector<std::string>>(j, "checks", {});
  if (j.contains("pinching")) {
    const json p = j.at("pinching");
    cfg.pinch_point_budget = get_or<int>(p, "point_budget", cfg.pinch_point_budget);
    cfg.pinch_plane_budget = get_or<int>(p, "plane_budget", cfg.pinch_plane_budget);
  }
  cfg.identity_instances = get_or<int>(j, "identity_instances", cfg.identity_instances);
  cfg.curvature_instances = get_or<int>(j, "curvature_instances", cfg.curvature_instances);
  cfg.theorem_node_plane_budget =
      get_or<int>(j, "theorem_node_plane_budget", cfg.theorem_node_plane_budget);

  if (j.contains("tolerances")) {
    const json t = j.at("tolerances");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const std::string key = it.key();
      const double v = it.value().get<double>();
      if (key == "minimality") cfg.tol.minimality = v;
      else if (key == "trace_round") cfg.tol.trace_round = v;
      else if (key == "trace_round_fd") cfg.tol.trace_round_fd = v;
      else if (key == "trace_conformal") cfg.tol.trace_conformal = v;
      else if (key == "trace_conformal_fd") cfg.tol.trace_conformal_fd = v;
      else if (key == "lemma") cfg.tol.lemma = v;
      else if (key == "curvature_oracle") cfg.tol.curvature_oracle = v;
      else if (key == "curvature_oracle_trivial") cfg.tol.curvature_oracle_trivial = v;
      else if (key == "second_variation_rel") cfg.tol.second_variation_rel = v;
      else if (key == "second_variation_abs") cfg.tol.second_variation_abs = v;
      else if (key == "divergence") cfg.tol.divergence = v;
      else if (key == "theorem_identity") cfg.tol.theorem_identity = v;
      else field_error("tolerances." + key, "unknown tolerance name");
    }
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.k < 2)
    field_error("k", "must be at least 2; the nonexistence argument requires k >= 2");
  if (cfg.k > cfg.n - 1) field_error("k", "must satisfy k <= n - 1");
  if (cfg.resolution < 8) field_error("resolution", "must be >= 8");
  if (cfg.checks.empty()) field_error("checks", "must list at least one check");
  bool needs_seed = false;
  for (const std::string& c : cfg.checks) {
    if (c == "all") {
      needs_seed = true;
      continue;
    }
    if (!known_checks().count(c))
      field_error("checks", "unknown check '" + c + "'");
    if (c == "pinching" || c == "check_theorem" || c == "oracle" || c == "identities")
      needs_seed = true;
  }
  if (needs_seed && !cfg.seed)
    field_error("seed", "required whenever pinching or randomized checks are requested");

  const std::set<std::string> shape_types = {"great_subsphere", "geodesic_sphere",
                                             "clifford_torus", "product_torus",
                                             "chart_expressions"};
  if (!shape_types.count(cfg.shape.type))
    field_error("shape.type", "unknown shape '" + cfg.shape.type + "'");
  if (cfg.shape.type == "chart_expressions") {
    if (static_cast<int>(cfg.shape.components.size()) != cfg.n + 1)
      field_error("shape.components", "need exactly n+1 component expressions");
    if (static_cast<int>(cfg.shape.domain_lo.size()) != cfg.k)
      field_error("shape.domain", "need exactly k axes");
  }

  const std::set<std::string> factor_types = {"constant", "axial", "height", "expression"};
  if (!factor_types.count(cfg.factor.type))
    field_error("conformal_factor.type", "unknown factor '" + cfg.factor.type + "'");
  if (cfg.factor.type == "height" &&
      static_cast<int>(cfg.factor.axis.size()) != cfg.n + 1)
    field_error("conformal_factor.axis", "need an (n+1)-vector");
  if (cfg.factor.type == "expression" && cfg.factor.formula.empty())
    field_error("conformal_factor.formula", "missing expression");
}

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  json shape;
  shape["type"] = cfg.shape.type;
  if (cfg.shape.type == "geodesic_sphere") shape["theta"] = cfg.shape.theta;
  if (cfg.shape.type == "clifford_torus") {
    shape["p"] = cfg.shape.p;
    shape["q"] = cfg.shape.q;
  }
  if (cfg.shape.type == "product_torus") shape["radii"] = cfg.shape.radii;
  if (cfg.shape.type == "chart_expressions") {
    shape["components"] = cfg.shape.components;
    json dom = json::array();
    for (std::size_t a = 0; a < cfg.shape.domain_lo.size(); ++a)
      dom.push_back({cfg.shape.domain_lo[a], cfg.shape.domain_hi[a],
                     static_cast<bool>(cfg.shape.domain_periodic[a])});
    shape["domain"] = dom;
  }
  j["shape"] = shape;
  json factor;
  factor["type"] = cfg.factor.type;
  if (cfg.factor.type == "constant") factor["c"] = cfg.factor.c;
  if (cfg.factor.type == "axial") {
    factor["epsilon"] = cfg.factor.epsilon;
    factor["split"] = cfg.factor.split >= 0 ? cfg.factor.split : cfg.k + 1;
  }
  if (cfg.factor.type == "height") {
    factor["c"] = cfg.factor.c;
    factor["axis"] = cfg.factor.axis;
  }
  if (cfg.factor.type == "expression") factor["formula"] = cfg.factor.formula;
  j["conformal_factor"] = factor;
  j["resolution"] = cfg.resolution;
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["checks"] = cfg.checks;
  j["pinching"] = {{"point_budget", cfg.pinch_point_budget},
                   {"plane_budget", cfg.pinch_plane_budget}};
  j["identity_instances"] = cfg.identity_instances;
  j["curvature_instances"] = cfg.curvature_instances;
  j["theorem_node_plane_budget"] = cfg.theorem_node_plane_budget;
  return j;
}

Immersion build_shape(const RunConfig& cfg) {
  const int res = cfg.resolution;
  if (cfg.shape.type == "great_subsphere") return make_great_subsphere(cfg.k, cfg.n, res);
  if (cfg.shape.type == "geodesic_sphere")
    return make_geodesic_sphere(cfg.k, cfg.n, cfg.shape.theta, res);
  if (cfg.shape.type == "clifford_torus")
    return make_clifford_torus(cfg.shape.p, cfg.shape.q, cfg.n, res);
  if (cfg.shape.type == "product_torus") return make_product_torus(cfg.shape.radii, cfg.n, res);
  if (cfg.shape.type == "chart_expressions") {
    std::vector<Expr> comps;
    comps.reserve(cfg.shape.components.size());
    for (const std::string& s : cfg.shape.components) {
      comps.push_back(Expr::parse(s, 'u'));
      if (comps.back().max_var() > cfg.k)
        throw ConfigError("shape.components: expression '" + s + "' uses more than k variables");
    }
    ChartDomain dom;
    const int k = cfg.k;
    dom.lo = Vec(k);
    dom.hi = Vec(k);
    dom.periodic.assign(k, false);
    for (int a = 0; a < k; ++a) {
      dom.lo[a] = cfg.shape.domain_lo[a];
      dom.hi[a] = cfg.shape.domain_hi[a];
      dom.periodic[a] = cfg.shape.domain_periodic[a];
    }
    const int ambient = cfg.n + 1;
    auto map = [comps, ambient](const Vec& u) {
      Vec x(ambient);
      for (int m = 0; m < ambient; ++m) x[m] = comps[m].eval(u);
      return x;
    };
    Chart chart = Chart::with_finite_differences(std::move(dom), std::move(map));
    return Immersion({std::move(chart)}, cfg.k, cfg.n, "chart_expressions", res);
  }
  throw ConfigError("build_shape: unhandled shape type");
}

ConformalFactor build_factor(const RunConfig& cfg) {
  if (cfg.factor.type == "constant") return ConformalFactor::constant(cfg.factor.c);
  if (cfg.factor.type == "axial") {
    const int split = cfg.factor.split >= 0 ? cfg.factor.split : cfg.k + 1;
    return ConformalFactor::axial(cfg.factor.epsilon, split);
  }
  if (cfg.factor.type == "height") {
    Vec axis(cfg.n + 1);
    for (int i = 0; i <= cfg.n; ++i) axis[i] = cfg.factor.axis[i];
    return ConformalFactor::height(cfg.factor.c, axis);
  }
  if (cfg.factor.type == "expression") {
    Expr e = Expr::parse(cfg.factor.formula, 'x');
    if (e.max_var() > cfg.n + 1)
      throw ConfigError("conformal_factor.formula uses more than n+1 variables");
    return ConformalFactor::finite_difference([e](const Vec& x) { return e.eval(x); });
  }
  throw ConfigError("build_factor: unhandled factor type");
}

}  // namespace confstab
