#include "confstab/identities.hpp"

#include <algorithm>
#include <cmath>

#include "confstab/rng.hpp"

namespace confstab {

namespace {

ConformalFactor random_factor(int dim, Rng& rng) {
  switch (rng.uniform_int(0, 3)) {
    case 0:
      return ConformalFactor::constant(rng.uniform(-1.0, 1.0));
    case 1:
      return ConformalFactor::axial(rng.uniform(-0.2, 0.2), rng.uniform_int(1, dim - 1));
    case 2:
      return ConformalFactor::height(rng.uniform(-0.5, 0.5), rng.unit_vec(dim));
    default: {
      // Height plus axial, for a factor with generic gradient and Hessian.
      const double c = rng.uniform(-0.4, 0.4);
      const Vec axis = rng.unit_vec(dim);
      const double eps = rng.uniform(-0.15, 0.15);
      const int split = rng.uniform_int(1, dim - 1);
      auto eval = [c, axis, eps, split](const Vec& x) {
        double s = 0.0;
        for (int j = split; j < x.size(); ++j) s += x[j] * x[j];
        return c * axis.dot(x) + eps * s;
      };
      auto grad = [c, axis, eps, split](const Vec& x) {
        Vec g = c * axis;
        for (int j = split; j < x.size(); ++j) g[j] += 2.0 * eps * x[j];
        return g;
      };
      auto hess = [eps, split](const Vec& x) {
        Mat h = Mat::Zero(x.size(), x.size());
        for (int j = split; j < x.size(); ++j) h(j, j) = 2.0 * eps;
        return h;
      };
      return ConformalFactor::analytic(eval, grad, hess);
    }
  }
}

// Random orthonormal frame of T_p S^n split into k tangent and n-k normal
// directions.
std::pair<std::vector<TangentVector>, std::vector<TangentVector>> random_frame(
    const AmbientPoint& p, int k, Rng& rng) {
  const int dim = p.ambient_dim();
  std::vector<Vec> basis{p.coords()};
  std::vector<TangentVector> out;
  while (static_cast<int>(out.size()) < dim - 1) {
    Vec w = rng.gaussian_vec(dim);
    for (const Vec& b : basis) w -= w.dot(b) * b;
    for (const Vec& b : basis) w -= w.dot(b) * b;
    const double nw = w.norm();
    if (nw < 1e-6) continue;
    w /= nw;
    basis.push_back(w);
    out.emplace_back(p, w);
  }
  std::vector<TangentVector> tangent(out.begin(), out.begin() + k);
  std::vector<TangentVector> normal(out.begin() + k, out.end());
  return {std::move(tangent), std::move(normal)};
}

}  // namespace

SyntheticInstance make_synthetic_instance(int n, int k, Rng& rng, bool force_gt_minimal) {
  const int dim = n + 1;
  const AmbientPoint p(rng.unit_vec(dim));
  auto [tangent, normal] = random_frame(p, k, rng);
  ConformalFactor factor = random_factor(dim, rng);
  const SphereJet fj = sphere_grad_hess(factor, p);

  const int codim = n - k;
  auto random_normal_vec = [&]() {
    Vec v = Vec::Zero(dim);
    for (int r = 0; r < codim; ++r) v += rng.gaussian() * 0.7 * normal[r].vec();
    return v;
  };

  SigmaGerm germ{p, tangent, normal, {}, TangentVector(p, Vec::Zero(dim))};
  germ.A.reserve(k * k);
  for (int i = 0; i < k * k; ++i) germ.A.emplace_back(p, Vec::Zero(dim));
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      TangentVector a(p, random_normal_vec());
      germ.A[i * k + j] = a;
      germ.A[j * k + i] = a;
    }
  if (force_gt_minimal) {
    // Shift the diagonal so the trace equals k grad_perp f, i.e. Ht = 0.
    Vec h = Vec::Zero(dim);
    for (int i = 0; i < k; ++i) h += germ.A[i * k + i].vec();
    Vec grad_perp = Vec::Zero(dim);
    for (int r = 0; r < codim; ++r)
      grad_perp += fj.dir(normal[r].vec()) * normal[r].vec();
    const Vec shift = (static_cast<double>(k) * grad_perp - h) / static_cast<double>(k);
    for (int i = 0; i < k; ++i)
      germ.A[i * k + i] = TangentVector(p, germ.A[i * k + i].vec() + shift);
  }
  Vec h = Vec::Zero(dim);
  for (int i = 0; i < k; ++i) h += germ.A[i * k + i].vec();
  germ.H = TangentVector(p, h);

  FieldSample field{TangentVector(p, random_normal_vec()), {}};
  for (int i = 0; i < k; ++i) field.nabla_perp.emplace_back(p, random_normal_vec());

  return SyntheticInstance{std::move(germ), std::move(field), std::move(factor),
                           force_gt_minimal};
}

IdentitySuiteResult run_identity_suite(int n, int k, int instances, std::uint64_t seed) {
  IdentitySuiteResult res;
  res.instances = instances;
  Rng rng = Rng::stream(seed, 0xa11ce5u);
  const int dim = n + 1;

  for (int inst = 0; inst < instances; ++inst) {
    const int kk = k > 0 ? k : rng.uniform_int(2, n - 1);
    SyntheticInstance minimal = make_synthetic_instance(n, kk, rng, true);
    SyntheticInstance generic = make_synthetic_instance(n, kk, rng, false);

    // --- ambient invariants at the generic instance's point/factor ---
    const AmbientPoint& p = generic.germ.point;
    const SphereJet fj = sphere_grad_hess(generic.factor, p);
    auto rand_tangent = [&]() {
      Vec w = rng.gaussian_vec(dim);
      w -= w.dot(p.coords()) * p.coords();
      return TangentVector(p, Vec(w / std::max(w.norm(), 1e-12)));
    };
    const TangentVector X = rand_tangent(), Y = rand_tangent(), Z = rand_tangent(),
                        W = rand_tangent();
    const double e2f = std::exp(2.0 * fj.value);
    auto gt = [&](const TangentVector& a, const TangentVector& b) { return e2f * a.dot(b); };
    auto rt = [&](const TangentVector& a, const TangentVector& b, const TangentVector& c) {
      return conformal_curvature(fj, a, b, c);
    };
    res.max_antisym_xy =
        std::max(res.max_antisym_xy, std::abs(gt(rt(X, Y, Z), W) + gt(rt(Y, X, Z), W)));
    res.max_antisym_zw =
        std::max(res.max_antisym_zw, std::abs(gt(rt(X, Y, Z), W) + gt(rt(X, Y, W), Z)));
    res.max_pair_symmetry =
        std::max(res.max_pair_symmetry, std::abs(gt(rt(X, Y, Z), W) - gt(rt(Z, W, X), Y)));
    res.max_bianchi = std::max(
        res.max_bianchi, (rt(X, Y, Z) + rt(Y, Z, X) + rt(Z, X, Y)).norm());

    // Metricity of the conformal connection along projected-constant
    // extensions, against a finite difference of gt(Y,Z).
    {
      const Vec yvec = Y.vec(), zvec = Z.vec(), xvec = X.vec();
      auto extended_gt = [&](double s) {
        const Vec q = (p.coords() + s * xvec).normalized();
        const Vec yq = yvec - yvec.dot(q) * q;
        const Vec zq = zvec - zvec.dot(q) * q;
        return std::exp(2.0 * generic.factor.eval_ambient(q)) * yq.dot(zq);
      };
      const double h = 1e-4;
      const double lhs = (extended_gt(h) - extended_gt(-h)) / (2.0 * h);
      const TangentVector nabla_xy(p, Vec(-yvec.dot(p.coords()) * xvec));
      const TangentVector nabla_xz(p, Vec(-zvec.dot(p.coords()) * xvec));
      const double rhs = gt(conformal_connection(fj, X, Y, nabla_xy), Z) +
                         gt(Y, conformal_connection(fj, X, Z, nabla_xz));
      res.max_metricity = std::max(res.max_metricity, std::abs(lhs - rhs));
    }

    // Sectional curvature against the full contraction, on an orthonormal
    // pair.
    {
      Vec a = X.vec();
      Vec b = Y.vec() - Y.vec().dot(a) * a / a.squaredNorm();
      a.normalize();
      b.normalize();
      const TangentVector A(p, a), B(p, b);
      const double lhs = conformal_sectional(fj, a, b);
      const double denom = gt(A, A) * gt(B, B) - gt(A, B) * gt(A, B);
      const double rhs = gt(rt(A, B, A), B) / denom;
      res.max_sectional_contract = std::max(res.max_sectional_contract, std::abs(lhs - rhs));
    }

    // Conformal frame orthonormality and the rescaled-family inner product.
    {
      const double emf = std::exp(-fj.value);
      for (int a = 0; a < 3; ++a) {
        const TangentVector ea = a == 0 ? X : (a == 1 ? Y : Z);
        for (int b = 0; b < 3; ++b) {
          const TangentVector eb = b == 0 ? X : (b == 1 ? Y : Z);
          const double want = ea.dot(eb);  // g-inner product
          const double got = gt(ea * emf, eb * emf);
          res.max_frame_orthonormality =
              std::max(res.max_frame_orthonormality, std::abs(got - want));
        }
      }
      const Vec va = rng.unit_vec(dim), vb = rng.unit_vec(dim);
      const Vec Va = va - va.dot(p.coords()) * p.coords();
      const Vec Vb = vb - vb.dot(p.coords()) * p.coords();
      const double plain = Va.dot(Vb);
      const double rescaled = e2f * (emf * Va).dot(emf * Vb);
      res.max_rescaled_inner_product =
          std::max(res.max_rescaled_inner_product, std::abs(rescaled - plain));
    }

    // --- transformation lemmas, term by term, on the generic germ ---
    {
      const SphereJet fjg = sphere_grad_hess(generic.factor, generic.germ.point);
      const TildeTermIdentities t =
          tilde_term_identities(generic.germ, generic.field, fjg);
      res.max_lemma_grad = std::max(res.max_lemma_grad, std::abs(t.grad_lhs - t.grad_rhs));
      res.max_lemma_curv = std::max(res.max_lemma_curv, std::abs(t.curv_lhs - t.curv_rhs));
      res.max_lemma_shape = std::max(res.max_lemma_shape, std::abs(t.shape_lhs - t.shape_rhs));
    }

    // --- proposition and corollary on the gt-minimal germ ---
    {
      const SphereJet fjm = sphere_grad_hess(minimal.factor, minimal.germ.point);
      const double direct =
          q_tilde_pointwise(minimal.germ, minimal.field, fjm).total();
      const double prop = q_tilde_minimal_prop(minimal.germ, minimal.field, fjm, 1e-8);
      res.max_prop = std::max(res.max_prop, std::abs(direct - prop));

      // Rescaled field Vt = e^{-f} V, sampled exactly.
      const double emf = std::exp(-fjm.value);
      FieldSample rescaled{minimal.field.value * emf, {}};
      for (int i = 0; i < kk; ++i) {
        const double eif = fjm.dir(minimal.germ.tangent[i].vec());
        rescaled.nabla_perp.push_back(
            (minimal.field.nabla_perp[i] - minimal.field.value * eif) * emf);
      }
      const double direct_rescaled =
          q_tilde_pointwise(minimal.germ, rescaled, fjm).total();
      const double cor =
          q_tilde_rescaled_corollary(minimal.germ, minimal.field, fjm, 1e-8);
      res.max_corollary = std::max(res.max_corollary, std::abs(direct_rescaled - cor));
    }
  }
  return res;
}

}  // namespace confstab
