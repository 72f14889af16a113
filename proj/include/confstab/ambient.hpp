// Extrinsic geometry of the round unit sphere S^n in R^{n+1} and the
// transformation laws of all curvature quantities under a conformal change
// of metric gt = e^{2f} g.
//
// Conventions:
//   * points are unit vectors in R^{n+1}; tangent vectors live in the
//     orthogonal hyperplane of their base point;
//   * the curvature operator is R(X,Y)Z = <X,Z>Y - <Y,Z>X, which makes
//     g(R(V,E)V,E) = 1 for orthonormal V,E and all sectional curvatures +1;
//   * Hess f(X,Y) = g(grad_Y grad f, X); on the sphere the restriction of an
//     ambient extension F obeys Hess f(X,Y) = Hess F(X,Y) - <p,grad F><X,Y>.
#pragma once

#include <functional>
#include <string>

#include "confstab/linalg.hpp"

namespace confstab {

enum class DerivativeKind { analytic, finite_difference };

class AmbientPoint {
 public:
  explicit AmbientPoint(Vec coords);
  static AmbientPoint normalized(const Vec& coords);

  const Vec& coords() const { return coords_; }
  int ambient_dim() const { return static_cast<int>(coords_.size()); }
  int sphere_dim() const { return ambient_dim() - 1; }

 private:
  Vec coords_;
};

class TangentVector {
 public:
  TangentVector(AmbientPoint base, Vec vec);

  const AmbientPoint& base() const { return base_; }
  const Vec& vec() const { return vec_; }
  double dot(const TangentVector& other) const;
  double norm() const { return vec_.norm(); }
  double squared_norm() const { return vec_.squaredNorm(); }

  TangentVector operator+(const TangentVector& other) const;
  TangentVector operator-(const TangentVector& other) const;
  TangentVector operator*(double s) const;

 private:
  AmbientPoint base_;
  Vec vec_;
};

inline TangentVector operator*(double s, const TangentVector& v) { return v * s; }

// True when the two vectors sit at the same base point (within round-off).
bool same_base(const TangentVector& a, const TangentVector& b);
void require_same_base(const TangentVector& a, const TangentVector& b, const char* op);

// v - <v,p>p based at p. Idempotent and linear in v.
TangentVector tangent_project(const AmbientPoint& p, const Vec& v);

struct TwoPlane {
  TwoPlane(const TangentVector& x, const TangentVector& y);
  AmbientPoint base;
  Vec x, y;  // g-orthonormal tangent pair
};

// The conformal factor f with ambient extension F: eval/grad/hess are
// functions of raw ambient coordinates so finite differencing off the
// sphere is well defined.
class ConformalFactor {
 public:
  using EvalFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;

  static ConformalFactor zero();
  static ConformalFactor constant(double c);
  // F(x) = eps * sum_{j >= split} x_j^2 (split counted in coordinates,
  // 0-based). For a great S^k in S^n the natural split is k+1.
  static ConformalFactor axial(double eps, int split);
  // F(x) = c * <axis, x>.
  static ConformalFactor height(double c, const Vec& axis);
  static ConformalFactor analytic(EvalFn eval, GradFn grad, HessFn hess);
  // Derivatives by central differences of `eval` at the given step.
  static ConformalFactor finite_difference(EvalFn eval, double step = 1e-5);

  double eval(const AmbientPoint& p) const { return eval_(p.coords()); }
  double eval_ambient(const Vec& x) const { return eval_(x); }
  Vec ambient_grad(const Vec& x) const { return grad_(x); }
  Mat ambient_hess(const Vec& x) const { return hess_(x); }
  DerivativeKind kind() const { return kind_; }

 private:
  ConformalFactor(EvalFn eval, GradFn grad, HessFn hess, DerivativeKind kind);
  EvalFn eval_;
  GradFn grad_;
  HessFn hess_;
  DerivativeKind kind_;
};

// Pointwise sphere derivatives of f: value, intrinsic gradient, and the
// restricted Hessian as both a bilinear form and an operator. Computing the
// jet once per point keeps the curvature evaluations cheap.
struct SphereJet {
  AmbientPoint point;
  double value;
  TangentVector grad;     // tangential projection of the ambient gradient
  Mat hess_ambient;       // ambient Hessian of the extension F at the point
  double radial;          // <p, grad F>

  double dir(const Vec& tangent) const { return grad.vec().dot(tangent); }
  double grad_norm_sq() const { return grad.squared_norm(); }
  double hess(const Vec& x, const Vec& y) const {
    return x.dot(hess_ambient * y) - radial * x.dot(y);
  }
  TangentVector hess_op(const Vec& y) const;  // grad_Y grad f, tangent
};

SphereJet sphere_grad_hess(const ConformalFactor& f, const AmbientPoint& p);

// R(X,Y)Z = <X,Z>Y - <Y,Z>X.
TangentVector round_curvature(const TangentVector& x, const TangentVector& y,
                              const TangentVector& z);

// grad^t_X Y = grad_X Y + X(f)Y + Y(f)X - g(X,Y) grad f. The round
// covariant derivative grad_X Y is supplied by the caller.
TangentVector conformal_connection(const SphereJet& fj, const TangentVector& x,
                                   const TangentVector& y, const TangentVector& nabla_xy);

// Full curvature tensor of e^{2f} g as a (1,3)-tensor.
TangentVector conformal_curvature(const SphereJet& fj, const TangentVector& x,
                                  const TangentVector& y, const TangentVector& z);

// Sectional curvature of the plane spanned by a g-orthonormal pair:
// e^{2f} Kt(X,Y) = 1 + X(f)^2 + Y(f)^2 - |grad f|^2 - Hess f(X,X) - Hess f(Y,Y).
double conformal_sectional(const SphereJet& fj, const Vec& x, const Vec& y);
double conformal_sectional(const ConformalFactor& f, const TwoPlane& plane);

// e^{dim * f(p)}, the conformal volume-element factor in dimension `dim`.
double volume_element_factor(const ConformalFactor& f, const AmbientPoint& p, int dim);

}  // namespace confstab
