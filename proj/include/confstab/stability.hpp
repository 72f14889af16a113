// Second-variation quadratic forms q/Q for the round metric and qt/Qt for a
// conformal metric, the constant-field family and its e^{-f} rescaling, and
// the two trace identities:
//   * tr over the constant-field family of q equals -k(n-k) at every point
//     of every closed submanifold, minimal or not;
//   * for gt-minimal Sigma, tr over the rescaled family of qt equals
//     -Kt(Sigma,N Sigma) + k |grad_perp f|^2 e^{-2f}
//     = -Kt(Sigma,N Sigma) + (1/k) |H|^2 e^{-2f}.
#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confstab/ambient.hpp"
#include "confstab/immersion.hpp"

namespace confstab {

// Pointwise submanifold germ: everything the quadratic forms need at one
// point. Real germs come from quadrature nodes; synthetic ones are built
// directly in tests.
struct SigmaGerm {
  AmbientPoint point;
  std::vector<TangentVector> tangent;  // E_1..E_k
  std::vector<TangentVector> normal;   // E_{k+1}..E_n
  std::vector<TangentVector> A;        // row-major k x k, normal-valued
  TangentVector H;

  int k() const { return static_cast<int>(tangent.size()); }
  int codim() const { return static_cast<int>(normal.size()); }
  const TangentVector& a(int i, int j) const { return A[i * k() + j]; }
};

SigmaGerm germ_of(const NodeGeometry& g);

// A normal field's 1-jet at a point: its value and the normal covariant
// derivatives along the tangent frame.
struct FieldSample {
  TangentVector value;                     // normal to Sigma, tangent to S^n
  std::vector<TangentVector> nabla_perp;   // per tangent direction E_i
};

class NormalField {
 public:
  virtual ~NormalField() = default;
  virtual FieldSample sample(const NodeGeometry& node) const = 0;
  virtual std::string kind() const = 0;

  // Ambient extension for variation flows; exact for the constant-field
  // kinds, unavailable for chart-sampled custom fields unless supplied.
  virtual bool has_ambient_extension() const { return false; }
  virtual Vec ambient_value(const Vec& x) const;
  virtual Mat ambient_jacobian(const Vec& x) const;
};

// Normal part of V(x) = v - <v,x>x. Uses the exact derivative rule
// grad_X V = -<v,x>X, so nabla_perp(V_perp) = -A(., V_top).
class ConstantProjectionField final : public NormalField {
 public:
  explicit ConstantProjectionField(Vec v);
  FieldSample sample(const NodeGeometry& node) const override;
  std::string kind() const override { return "constant-field-projection"; }
  bool has_ambient_extension() const override { return true; }
  Vec ambient_value(const Vec& x) const override;
  Mat ambient_jacobian(const Vec& x) const override;
  const Vec& inducing_vector() const { return v_; }

 private:
  Vec v_;
};

// e^{-f} V for a constant field V; the natural competitor family for the
// conformal metric.
class RescaledConstantField final : public NormalField {
 public:
  RescaledConstantField(Vec v, const ConformalFactor& f);
  FieldSample sample(const NodeGeometry& node) const override;
  std::string kind() const override { return "rescaled-constant"; }
  bool has_ambient_extension() const override { return true; }
  Vec ambient_value(const Vec& x) const override;
  Mat ambient_jacobian(const Vec& x) const override;

 private:
  Vec v_;
  const ConformalFactor* f_;
};

// User-supplied normal field evaluated at on-sphere points; derivatives by
// central differences along chart coordinate directions.
class CustomNormalField final : public NormalField {
 public:
  using AmbientFn = std::function<Vec(const Vec&)>;
  explicit CustomNormalField(AmbientFn eval, double chart_step = 1e-5);
  FieldSample sample(const NodeGeometry& node) const override;
  std::string kind() const override { return "custom"; }

 private:
  AmbientFn eval_;
  double step_;
};

struct QuadFormBreakdown {
  double grad_term;   // |grad_perp V|^2
  double curv_term;   // tr_Sigma R(V,.)V
  double shape_term;  // |<A(.,.),V>|^2
  double total() const { return grad_term - curv_term - shape_term; }
};

// q(V,V) in the round metric.
QuadFormBreakdown q_round_pointwise(const SigmaGerm& germ, const FieldSample& field);
QuadFormBreakdown q_round_pointwise(const NodeGeometry& node, const NormalField& field);

// qt(V,V) assembled directly in the gt-orthonormal frame from the conformal
// connection and curvature operators.
QuadFormBreakdown q_tilde_pointwise(const SigmaGerm& germ, const FieldSample& field,
                                    const SphereJet& fj);
QuadFormBreakdown q_tilde_pointwise(const NodeGeometry& node, const NormalField& field,
                                    const ConformalFactor& f);

// qt(V,V) through the transformation identities instead: the minimal-case
// proposition when |Ht| is below `minimality_tol`, otherwise assembled from
// the three term-by-term lemmas. Kept as an independent route for
// cross-checks against the direct assembly.
double q_tilde_via_identities(const SigmaGerm& germ, const FieldSample& field,
                              const SphereJet& fj, double minimality_tol = 1e-6);

// The minimal-case proposition alone; refuses (throws) when |Ht| exceeds
// the tolerance since the formula assumes a gt-minimal submanifold.
double q_tilde_minimal_prop(const SigmaGerm& germ, const FieldSample& field, const SphereJet& fj,
                            double minimality_tol = 1e-6);

// Corollary form for the rescaled field Vt = e^{-f} V: right-hand side
// expressed through the unrescaled sample. Requires gt-minimality.
double q_tilde_rescaled_corollary(const SigmaGerm& germ, const FieldSample& unrescaled,
                                  const SphereJet& fj, double minimality_tol = 1e-6);

// The three lemma right-hand sides individually (gradient, curvature-trace,
// shape terms), for identity testing.
struct TildeTermIdentities {
  double grad_lhs, grad_rhs;
  double curv_lhs, curv_rhs;
  double shape_lhs, shape_rhs;
};
TildeTermIdentities tilde_term_identities(const SigmaGerm& germ, const FieldSample& field,
                                          const SphereJet& fj);

// Trace of q over the constant-field family induced by an orthonormal basis
// of R^{n+1} (standard basis by default; the value is basis independent).
double trace_q_over_V(const SigmaGerm& germ);
double trace_q_over_V(const SigmaGerm& germ, const Mat& basis);

struct TildeTraceResult {
  double direct;              // sum of qt over the rescaled family
  double rhs_curvature_form;  // -Kt(Sigma,NSigma) + k |grad_perp f|^2 e^{-2f}
  double rhs_H_form;          // -Kt(Sigma,NSigma) + (1/k) |H|^2 e^{-2f}
  double Htilde_norm;
  bool minimal;  // |Ht| below tolerance; the three values agree only then
};

TildeTraceResult trace_qtilde_over_Vtilde(const SigmaGerm& germ, const SphereJet& fj,
                                          double minimality_tol = 1e-6);
TildeTraceResult trace_qtilde_over_Vtilde(const SigmaGerm& germ, const SphereJet& fj,
                                          const Mat& basis, double minimality_tol);

// Kt(Sigma, NSigma) = sum over tangent x normal frame pairs of the
// conformal sectional curvature. Basis independent.
double K_sigma_normal(const SigmaGerm& germ, const SphereJet& fj);

// Integrals over Sigma. `measure_factor` selects dg (null) or dgt.
double integrate_nodes(const Immersion& imm, std::span<const NodeGeometry> nodes,
                       const std::function<double(const NodeGeometry&)>& pointwise,
                       const ConformalFactor* measure_factor, int threads = 1);

// Q(V,V) = integral of q(V,V) dg.
double Q_round_of_field(const Immersion& imm, std::span<const NodeGeometry> nodes,
                        const NormalField& field, int threads = 1);
// Qt(V,V) = integral of qt(V,V) dgt.
double Q_tilde_of_field(const Immersion& imm, std::span<const NodeGeometry> nodes,
                        const NormalField& field, const ConformalFactor& f, int threads = 1);
// Integrated traces: -k(n-k) vol_g(Sigma) for the round family, and the
// integral of the direct rescaled trace against dgt.
double trace_Q_round(const Immersion& imm, std::span<const NodeGeometry> nodes, int threads = 1);
double trace_Q_tilde(const Immersion& imm, std::span<const NodeGeometry> nodes,
                     const ConformalFactor& f, int threads = 1);

// Full per-node diagnostic sweep used by reports.
struct TraceReport {
  std::vector<double> tr_V_q;             // per node
  std::vector<double> tr_Vtilde_qtilde;   // per node, direct
  std::vector<double> rhs_curvature_form; // per node
  std::vector<double> rhs_H_form;         // per node
  std::vector<double> K_sigma_normal;     // per node
  std::vector<double> H_norm_sq;          // per node
  std::vector<double> f_value;            // per node
  double tr_V_Q;
  double tr_Vtilde_Qtilde;
  double vol_g;
  double vol_gtilde;
  double max_Htilde;
  bool minimal_gtilde;
};

TraceReport build_trace_report(const Immersion& imm, std::span<const NodeGeometry> nodes,
                               const ConformalFactor& f, double minimality_tol = 1e-6,
                               int threads = 1);

}  // namespace confstab
