#include "confstab/ambient.hpp"

#include <cmath>
#include <stdexcept>

namespace confstab {

namespace {
constexpr double kUnitTol = 1e-12;
constexpr double kTangencyTol = 1e-10;
constexpr double kBaseMatchTol = 1e-10;
}  // namespace

AmbientPoint::AmbientPoint(Vec coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) throw std::invalid_argument("AmbientPoint: need ambient dimension >= 2");
  if (std::abs(coords_.norm() - 1.0) > kUnitTol)
    throw std::invalid_argument("AmbientPoint: coordinates are not a unit vector");
}

AmbientPoint AmbientPoint::normalized(const Vec& coords) {
  const double n = coords.norm();
  if (n < 1e-14) throw std::invalid_argument("AmbientPoint::normalized: zero vector");
  return AmbientPoint(coords / n);
}

TangentVector::TangentVector(AmbientPoint base, Vec vec)
    : base_(std::move(base)), vec_(std::move(vec)) {
  if (vec_.size() != base_.coords().size())
    throw std::invalid_argument("TangentVector: dimension mismatch with base point");
  const double radial = vec_.dot(base_.coords());
  if (std::abs(radial) > kTangencyTol * std::max(1.0, vec_.norm()))
    throw std::invalid_argument("TangentVector: not tangent to the sphere at its base");
}

double TangentVector::dot(const TangentVector& other) const {
  require_same_base(*this, other, "TangentVector::dot");
  return vec_.dot(other.vec_);
}

TangentVector TangentVector::operator+(const TangentVector& other) const {
  require_same_base(*this, other, "TangentVector::operator+");
  return TangentVector(base_, vec_ + other.vec_);
}

TangentVector TangentVector::operator-(const TangentVector& other) const {
  require_same_base(*this, other, "TangentVector::operator-");
  return TangentVector(base_, vec_ - other.vec_);
}

TangentVector TangentVector::operator*(double s) const { return TangentVector(base_, vec_ * s); }

bool same_base(const TangentVector& a, const TangentVector& b) {
  return (a.base().coords() - b.base().coords()).norm() <= kBaseMatchTol;
}

void require_same_base(const TangentVector& a, const TangentVector& b, const char* op) {
  if (!same_base(a, b)) throw std::invalid_argument(std::string(op) + ": mismatched base points");
}

TangentVector tangent_project(const AmbientPoint& p, const Vec& v) {
  if (v.size() != p.coords().size())
    throw std::invalid_argument("tangent_project: dimension mismatch");
  return TangentVector(p, v - v.dot(p.coords()) * p.coords());
}

TwoPlane::TwoPlane(const TangentVector& xv, const TangentVector& yv)
    : base(xv.base()), x(xv.vec()), y(yv.vec()) {
  require_same_base(xv, yv, "TwoPlane");
  const double ortho_err = std::abs(x.dot(y));
  const double unit_err = std::max(std::abs(x.norm() - 1.0), std::abs(y.norm() - 1.0));
  if (ortho_err > kTangencyTol || unit_err > kTangencyTol)
    throw std::invalid_argument("TwoPlane: spanning pair is not g-orthonormal");
}

ConformalFactor::ConformalFactor(EvalFn eval, GradFn grad, HessFn hess, DerivativeKind kind)
    : eval_(std::move(eval)), grad_(std::move(grad)), hess_(std::move(hess)), kind_(kind) {}

ConformalFactor ConformalFactor::zero() { return constant(0.0); }

ConformalFactor ConformalFactor::constant(double c) {
  return ConformalFactor(
      [c](const Vec&) { return c; },
      [](const Vec& x) { return Vec(Vec::Zero(x.size())); },
      [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); }, DerivativeKind::analytic);
}

ConformalFactor ConformalFactor::axial(double eps, int split) {
  if (split < 0) throw std::invalid_argument("ConformalFactor::axial: split must be >= 0");
  return ConformalFactor(
      [eps, split](const Vec& x) {
        double s = 0.0;
        for (int j = split; j < x.size(); ++j) s += x[j] * x[j];
        return eps * s;
      },
      [eps, split](const Vec& x) {
        Vec g = Vec::Zero(x.size());
        for (int j = split; j < x.size(); ++j) g[j] = 2.0 * eps * x[j];
        return g;
      },
      [eps, split](const Vec& x) {
        Mat h = Mat::Zero(x.size(), x.size());
        for (int j = split; j < x.size(); ++j) h(j, j) = 2.0 * eps;
        return h;
      },
      DerivativeKind::analytic);
}

ConformalFactor ConformalFactor::height(double c, const Vec& axis) {
  Vec a = axis;
  return ConformalFactor(
      [c, a](const Vec& x) { return c * a.dot(x); },
      [c, a](const Vec&) { return Vec(c * a); },
      [a](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); }, DerivativeKind::analytic);
}

ConformalFactor ConformalFactor::analytic(EvalFn eval, GradFn grad, HessFn hess) {
  return ConformalFactor(std::move(eval), std::move(grad), std::move(hess),
                         DerivativeKind::analytic);
}

ConformalFactor ConformalFactor::finite_difference(EvalFn eval, double step) {
  if (step <= 0) throw std::invalid_argument("ConformalFactor::finite_difference: step <= 0");
  EvalFn f = eval;
  GradFn grad = [f, step](const Vec& x) {
    Vec g(x.size());
    Vec xp = x, xm = x;
    for (int i = 0; i < x.size(); ++i) {
      xp[i] = x[i] + step;
      xm[i] = x[i] - step;
      g[i] = (f(xp) - f(xm)) / (2.0 * step);
      xp[i] = x[i];
      xm[i] = x[i];
    }
    return g;
  };
  HessFn hess = [f, step](const Vec& x) {
    const int d = static_cast<int>(x.size());
    Mat h(d, d);
    const double f0 = f(x);
    Vec xt = x;
    for (int i = 0; i < d; ++i) {
      xt[i] = x[i] + step;
      const double fp = f(xt);
      xt[i] = x[i] - step;
      const double fm = f(xt);
      xt[i] = x[i];
      h(i, i) = (fp - 2.0 * f0 + fm) / (step * step);
    }
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        xt[i] = x[i] + step;
        xt[j] = x[j] + step;
        const double fpp = f(xt);
        xt[j] = x[j] - step;
        const double fpm = f(xt);
        xt[i] = x[i] - step;
        const double fmm = f(xt);
        xt[j] = x[j] + step;
        const double fmp = f(xt);
        xt[i] = x[i];
        xt[j] = x[j];
        h(i, j) = h(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
      }
    }
    return h;
  };
  return ConformalFactor(std::move(eval), std::move(grad), std::move(hess),
                         DerivativeKind::finite_difference);
}

TangentVector SphereJet::hess_op(const Vec& y) const {
  const Vec& p = point.coords();
  Vec w = hess_ambient * y;
  w -= w.dot(p) * p;
  w -= radial * y;
  return TangentVector(point, std::move(w));
}

SphereJet sphere_grad_hess(const ConformalFactor& f, const AmbientPoint& p) {
  const Vec& x = p.coords();
  const Vec g_amb = f.ambient_grad(x);
  Mat h = f.ambient_hess(x);
  h = 0.5 * (h + h.transpose());  // enforce the symmetry invariant exactly
  return SphereJet{p, f.eval(p), tangent_project(p, g_amb), std::move(h), g_amb.dot(x)};
}

TangentVector round_curvature(const TangentVector& x, const TangentVector& y,
                              const TangentVector& z) {
  require_same_base(x, y, "round_curvature");
  require_same_base(x, z, "round_curvature");
  return TangentVector(x.base(), x.vec().dot(z.vec()) * y.vec() - y.vec().dot(z.vec()) * x.vec());
}

TangentVector conformal_connection(const SphereJet& fj, const TangentVector& x,
                                   const TangentVector& y, const TangentVector& nabla_xy) {
  require_same_base(x, y, "conformal_connection");
  require_same_base(x, nabla_xy, "conformal_connection");
  const double xf = fj.dir(x.vec());
  const double yf = fj.dir(y.vec());
  Vec out = nabla_xy.vec() + xf * y.vec() + yf * x.vec() - x.vec().dot(y.vec()) * fj.grad.vec();
  return TangentVector(x.base(), std::move(out));
}

TangentVector conformal_curvature(const SphereJet& fj, const TangentVector& x,
                                  const TangentVector& y, const TangentVector& z) {
  require_same_base(x, y, "conformal_curvature");
  require_same_base(x, z, "conformal_curvature");
  const Vec& xv = x.vec();
  const Vec& yv = y.vec();
  const Vec& zv = z.vec();
  const double xf = fj.dir(xv);
  const double yf = fj.dir(yv);
  const double zf = fj.dir(zv);
  const double gxz = xv.dot(zv);
  const double gyz = yv.dot(zv);
  const double grad2 = fj.grad_norm_sq();

  Vec out = round_curvature(x, y, z).vec();
  out += xf * zf * yv - yf * zf * xv;
  out += -xf * gyz * fj.grad.vec() + yf * gxz * fj.grad.vec();
  out += -gxz * fj.hess_op(yv).vec() + gyz * fj.hess_op(xv).vec();
  out += -gxz * grad2 * yv + gyz * grad2 * xv;
  out += -fj.hess(xv, zv) * yv + fj.hess(yv, zv) * xv;
  return TangentVector(x.base(), std::move(out));
}

double conformal_sectional(const SphereJet& fj, const Vec& x, const Vec& y) {
  const double xf = fj.dir(x);
  const double yf = fj.dir(y);
  const double bracket =
      1.0 + xf * xf + yf * yf - fj.grad_norm_sq() - fj.hess(x, x) - fj.hess(y, y);
  return std::exp(-2.0 * fj.value) * bracket;
}

double conformal_sectional(const ConformalFactor& f, const TwoPlane& plane) {
  const SphereJet fj = sphere_grad_hess(f, plane.base);
  return conformal_sectional(fj, plane.x, plane.y);
}

double volume_element_factor(const ConformalFactor& f, const AmbientPoint& p, int dim) {
  if (dim < 1) throw std::invalid_argument("volume_element_factor: dim must be >= 1");
  return std::exp(dim * f.eval(p));
}

}  // namespace confstab
