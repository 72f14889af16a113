// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fails. argv[1] is the path to the confstab CLI binary (used by the
// end-to-end and determinism criteria).
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "confstab/identities.hpp"
#include "confstab/oracle.hpp"
#include "confstab/report.hpp"
#include "confstab/rng.hpp"
#include "confstab/shapes.hpp"
#include "confstab/stability.hpp"

using namespace confstab;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int criterion, bool pass, const std::string& detail, double seconds) {
  std::ostringstream line;
  line << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail << " ["
       << seconds << " s]";
  std::cout << line.str() << std::endl;
  if (!pass) ++g_failures;
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Criterion 1: tr q over the constant family equals -k(n-k) at every node of
// every library shape, minimal or not, within 1e-8; under 10 s per shape.
void criterion_1() {
  struct Case {
    Immersion imm;
    const char* name;
  };
  const double r13 = std::sqrt(1.0 / 3.0);
  (void)r13;
  std::vector<Case> cases;
  cases.push_back({make_great_subsphere(2, 4), "great S^2 in S^4"});
  cases.push_back({make_great_subsphere(2, 5), "great S^2 in S^5"});
  cases.push_back({make_geodesic_sphere(2, 4, M_PI / 3), "geodesic S^2(pi/3) in S^4"});
  cases.push_back({make_clifford_torus(1, 1, 3), "Clifford torus in S^3"});
  cases.push_back({make_clifford_torus(1, 2, 4), "S^1(sqrt(1/3)) x S^2(sqrt(2/3)) in S^4"});

  bool all_ok = true;
  std::ostringstream detail;
  double total = 0.0;
  for (const Case& c : cases) {
    Timer t;
    const double expected = -static_cast<double>(c.imm.k()) * (c.imm.n() - c.imm.k());
    const std::vector<NodeGeometry> nodes = all_node_geometry(c.imm, 4);
    double worst = 0.0;
    for (const NodeGeometry& nd : nodes)
      worst = std::max(worst, std::abs(trace_q_over_V(germ_of(nd)) - expected));
    const double secs = t.seconds();
    total += secs;
    const bool ok = worst < 1e-8 && secs < 10.0;
    all_ok = all_ok && ok;
    detail << c.name << " dev=" << worst << " (" << secs << " s); ";
  }
  report(1, all_ok, "Simons trace -k(n-k) pointwise: " + detail.str(), total);
}

// Criterion 2: the three evaluations of the conformal trace agree pairwise
// within 1e-6 at every node on gt-minimal configurations.
void criterion_2() {
  Timer t;
  struct Case {
    Immersion imm;
    ConformalFactor f;
    const char* name;
  };
  std::vector<Case> cases;
  cases.push_back({make_great_subsphere(2, 4), ConformalFactor::zero(), "f=0"});
  cases.push_back({make_great_subsphere(2, 4), ConformalFactor::constant(0.4), "f=0.4"});
  cases.push_back({make_great_subsphere(2, 5), ConformalFactor::axial(0.02, 3), "axial 0.02"});
  cases.push_back({make_great_subsphere(2, 5), ConformalFactor::axial(0.05, 3), "axial 0.05"});

  bool all_ok = true;
  std::ostringstream detail;
  for (const Case& c : cases) {
    const std::vector<NodeGeometry> nodes = all_node_geometry(c.imm, 4);
    const TraceReport rep = build_trace_report(c.imm, nodes, c.f, 1e-6, 4);
    double worst = 0.0;
    for (std::size_t i = 0; i < rep.tr_Vtilde_qtilde.size(); ++i) {
      const double a = rep.tr_Vtilde_qtilde[i], b = rep.rhs_curvature_form[i],
                   cc = rep.rhs_H_form[i];
      worst = std::max({worst, std::abs(a - b), std::abs(a - cc), std::abs(b - cc)});
    }
    const bool ok = rep.minimal_gtilde && worst < 1e-6;
    all_ok = all_ok && ok;
    detail << c.name << " dev=" << worst << "; ";
  }
  report(2, all_ok, "conformal trace theorem three ways: " + detail.str(), t.seconds());
}

// Criterion 3: the transformation lemma suite over 1000 randomized
// instances, max residual < 1e-6.
void criterion_3() {
  Timer t;
  const IdentitySuiteResult r = run_identity_suite(5, 0, 1000, 20240817);
  const double worst = std::max({r.max_lemma_grad, r.max_lemma_curv, r.max_lemma_shape,
                                 r.max_prop, r.max_corollary});
  std::ostringstream detail;
  detail << "grad=" << r.max_lemma_grad << " curv=" << r.max_lemma_curv
         << " shape=" << r.max_lemma_shape << " prop=" << r.max_prop
         << " cor=" << r.max_corollary;
  report(3, worst < 1e-6, "lemma suite on 1000 instances: " + detail.str(), t.seconds());
}

// Criterion 4: conformal_curvature vs the finite-difference stencil.
void criterion_4() {
  Timer t;
  Rng rng(314159);
  double worst_random = 0.0, worst_trivial = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    SyntheticInstance si = make_synthetic_instance(5, 2, rng, false);
    const SphereJet fj = sphere_grad_hess(si.factor, si.germ.point);
    const TangentVector& x = si.germ.tangent[0];
    const TangentVector& y = si.germ.tangent[1];
    const TangentVector& z = si.germ.normal.front();
    const TangentVector analytic = conformal_curvature(fj, x, y, z);
    const TangentVector fd = fd_curvature_check(si.factor, si.germ.point, x, y, z, 1e-3);
    worst_random = std::max(worst_random, (analytic - fd).norm());
  }
  for (int rep = 0; rep < 60; ++rep) {
    const ConformalFactor f =
        rep % 2 == 0 ? ConformalFactor::zero() : ConformalFactor::constant(rng.uniform(-1, 1));
    const AmbientPoint p(rng.unit_vec(6));
    auto tangent = [&]() {
      Vec w = rng.gaussian_vec(6);
      w -= w.dot(p.coords()) * p.coords();
      return TangentVector(p, Vec(w / w.norm()));
    };
    const TangentVector x = tangent(), y = tangent(), z = tangent();
    const SphereJet fj = sphere_grad_hess(f, p);
    worst_trivial = std::max(
        worst_trivial, (conformal_curvature(fj, x, y, z) - fd_curvature_check(f, p, x, y, z, 1e-3))
                           .norm());
  }
  std::ostringstream detail;
  detail << "random=" << worst_random << " (tol 1e-4), trivial=" << worst_trivial
         << " (tol 1e-6)";
  report(4, worst_random < 1e-4 && worst_trivial < 1e-6,
         "curvature oracle on 200 instances: " + detail.str(), t.seconds());
}

// Criterion 5: fd_second_variation reproduces Q = -2 * 4pi on the great
// S^2 in S^4 and matches the Qt quadrature on the axial case, within 1%.
void criterion_5() {
  Timer t;
  bool ok = true;
  std::ostringstream detail;
  {
    const Immersion imm = make_great_subsphere(2, 4);
    const ConstantProjectionField field{basis_vector(5, 4)};
    const double fd = fd_second_variation(imm, ConformalFactor::zero(), field, 1e-3, 4);
    const double expected = -8.0 * M_PI;
    const double rel = std::abs(fd - expected) / std::abs(expected);
    ok = ok && rel < 0.01;
    detail << "round: fd=" << fd << " vs " << expected << " rel=" << rel << "; ";
  }
  {
    const Immersion imm = make_great_subsphere(2, 5);
    const ConformalFactor f = ConformalFactor::axial(0.05, 3);
    const RescaledConstantField field{basis_vector(6, 5), f};
    const double fd = fd_second_variation(imm, f, field, 1e-3, 4);
    const std::vector<NodeGeometry> nodes = all_node_geometry(imm, 4);
    const double qt = Q_tilde_of_field(imm, nodes, field, f, 4);
    const double rel = std::abs(fd - qt) / std::abs(qt);
    ok = ok && rel < 0.01;
    detail << "axial: fd=" << fd << " vs Qt=" << qt << " rel=" << rel;
  }
  const double secs = t.seconds();
  report(5, ok && secs < 60.0, "second-variation oracle: " + detail.str(), secs);
}

// Criterion 6: divergence identity residual < 1e-6 (1 + |lhs|) on the
// gt-minimal configurations of criterion 2.
void criterion_6() {
  Timer t;
  struct Case {
    Immersion imm;
    ConformalFactor f;
    const char* name;
  };
  std::vector<Case> cases;
  cases.push_back({make_great_subsphere(2, 4), ConformalFactor::zero(), "f=0"});
  cases.push_back({make_great_subsphere(2, 4), ConformalFactor::constant(0.4), "f=0.4"});
  cases.push_back({make_great_subsphere(2, 5), ConformalFactor::axial(0.02, 3), "axial 0.02"});
  cases.push_back({make_great_subsphere(2, 5), ConformalFactor::axial(0.05, 3), "axial 0.05"});
  bool ok = true;
  std::ostringstream detail;
  for (const Case& c : cases) {
    const DivergenceCheckResult d = divergence_identity_check(c.imm, c.f, 4);
    const bool pass = d.minimal && d.residual <= 1e-6 * (1.0 + std::abs(d.lhs));
    ok = ok && pass;
    detail << c.name << " residual=" << d.residual << "; ";
  }
  report(6, ok, "divergence identity: " + detail.str(), t.seconds());
}

// Criterion 7: the full theorem chain for n=5, k=2, axial eps=0.05, plus the
// CLI check-theorem subcommand exiting 0; everything under 5 minutes.
void criterion_7(const std::string& cli, const fs::path& workdir) {
  Timer t;
  bool ok = true;
  std::ostringstream detail;

  const Immersion imm = make_great_subsphere(2, 5);
  const ConformalFactor f = ConformalFactor::axial(0.05, 3);
  const PinchingEstimate pin = delta_estimate(f, 5, 200, 500, 42, 4);
  ok = ok && pin.positive && pin.delta_lower > 1.0 / 3.0;
  detail << "delta=" << pin.delta_lower << " (> 1/3 required); ";
  TheoremOptions opts;
  opts.seed = 42;
  const TheoremVerdict v = main_theorem_check(imm, f, pin, opts, 4);
  ok = ok && v.status == "pass" && v.tr_Qtilde < 0.0 && v.identity_ok;
  detail << "status=" << v.status << " trQt=" << v.tr_Qtilde << "; margins:";
  for (const InequalityLine& line : v.lines) {
    ok = ok && line.holds && (!line.strict || line.margin > 0.0);
    detail << " " << line.name << "=" << line.margin;
  }

  const fs::path cfg_path = workdir / "theorem_config.json";
  {
    json cfg;
    cfg["n"] = 5;
    cfg["k"] = 2;
    cfg["resolution"] = 32;
    cfg["seed"] = 42;
    cfg["shape"] = {{"type", "great_subsphere"}};
    cfg["conformal_factor"] = {{"type", "axial"}, {"epsilon", 0.05}};
    cfg["checks"] = {"check_theorem"};
    cfg["pinching"] = {{"point_budget", 200}, {"plane_budget", 500}};
    std::ofstream out(cfg_path);
    out << cfg.dump(2);
  }
  const int exit_code = run_cli(cli, "check-theorem --config " + cfg_path.string() + " --out " +
                                         (workdir / "theorem_out").string());
  ok = ok && exit_code == 0;
  detail << "; CLI exit=" << exit_code;

  const double secs = t.seconds();
  report(7, ok && secs < 300.0, "main theorem chain: " + detail.str(), secs);
}

// Criterion 8: `all` with the same config and seed is byte-identical modulo
// timing, at 1 and at 4 worker threads.
void criterion_8(const std::string& cli, const fs::path& workdir) {
  Timer t;
  const fs::path cfg_path = workdir / "all_config.json";
  {
    json cfg;
    cfg["n"] = 5;
    cfg["k"] = 2;
    cfg["resolution"] = 16;
    cfg["seed"] = 1234;
    cfg["shape"] = {{"type", "great_subsphere"}};
    cfg["conformal_factor"] = {{"type", "axial"}, {"epsilon", 0.05}};
    cfg["checks"] = {"all"};
    cfg["pinching"] = {{"point_budget", 40}, {"plane_budget", 80}};
    cfg["identity_instances"] = 200;
    cfg["curvature_instances"] = 40;
    cfg["theorem_node_plane_budget"] = 32;
    std::ofstream out(cfg_path);
    out << cfg.dump(2);
  }
  const fs::path out1 = workdir / "all_run1";
  const fs::path out2 = workdir / "all_run2";
  const int e1 = run_cli(cli, "all --config " + cfg_path.string() + " --out " + out1.string() +
                                  " --threads 1");
  const int e2 = run_cli(cli, "all --config " + cfg_path.string() + " --out " + out2.string() +
                                  " --threads 4");
  bool ok = e1 == 0 && e2 == 0;
  std::ostringstream detail;
  detail << "exits=" << e1 << "," << e2;
  if (ok) {
    json a = json::parse(slurp(out1 / "report.json"));
    json b = json::parse(slurp(out2 / "report.json"));
    detail << " fingerprints=" << a.at("fingerprint").get<std::string>() << ","
           << b.at("fingerprint").get<std::string>();
    a.erase("timing");
    b.erase("timing");
    ok = dump_json_17(a) == dump_json_17(b);
  }
  report(8, ok, "determinism across thread counts: " + detail.str(), t.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "./confstab";
  const fs::path workdir = fs::temp_directory_path() / "confstab_acceptance";
  fs::create_directories(workdir);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7(cli, workdir);
  criterion_8(cli, workdir);

  if (g_failures == 0) {
    std::cout << "ACCEPTANCE: all criteria passed" << std::endl;
    return 0;
  }
  std::cout << "ACCEPTANCE: " << g_failures << " criterion(s) failed" << std::endl;
  return 1;
}
