// Run configuration: a JSON file naming the dimensions, shape, conformal
// factor, quadrature resolution, seed, and the checks to execute.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "confstab/ambient.hpp"
#include "confstab/immersion.hpp"

namespace confstab {

struct ShapeConfig {
  std::string type;  // great_subsphere | geodesic_sphere | clifford_torus |
                     // product_torus | chart_expressions
  double theta = 0.0;
  int p = 0, q = 0;
  std::vector<double> radii;
  // Expression-defined chart: n+1 component expressions in u1..uk plus a
  // per-axis domain [lo, hi, periodic].
  std::vector<std::string> components;
  std::vector<double> domain_lo, domain_hi;
  std::vector<bool> domain_periodic;
};

struct FactorConfig {
  std::string type;  // constant | axial | height | expression
  double c = 0.0;
  double epsilon = 0.0;
  int split = -1;  // axial split; defaults to k+1
  std::vector<double> axis;
  std::string formula;  // expression in x1..x{n+1}, finite-difference derivatives
};

struct Tolerances {
  double minimality = 1e-6;
  double trace_round = 1e-8;
  double trace_round_fd = 1e-4;
  double trace_conformal = 1e-6;
  double trace_conformal_fd = 1e-4;
  double lemma = 1e-6;
  double curvature_oracle = 1e-4;
  double curvature_oracle_trivial = 1e-6;
  double second_variation_rel = 1e-2;
  double second_variation_abs = 1e-3;
  double divergence = 1e-6;
  double theorem_identity = 1e-6;
};

struct RunConfig {
  int n = 0;
  int k = 0;
  ShapeConfig shape;
  FactorConfig factor;
  int resolution = 32;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> checks;
  int pinch_point_budget = 200;
  int pinch_plane_budget = 500;
  int identity_instances = 1000;
  int curvature_instances = 200;
  int theorem_node_plane_budget = 64;
  Tolerances tol;
};

// Parses and validates; throws ConfigError with field diagnostics.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_json(const nlohmann::ordered_json& j);
void validate_config(const RunConfig& cfg);

// Round-trippable echo of the configuration for the report.
nlohmann::ordered_json config_echo(const RunConfig& cfg);

// Builders for the configured objects.
Immersion build_shape(const RunConfig& cfg);
ConformalFactor build_factor(const RunConfig& cfg);

}  // namespace confstab
