#include "confstab/pinching.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "confstab/parallel.hpp"

namespace confstab {

namespace {

struct Plane {
  Vec x, y;
};

// Orthonormalize a pair of ambient vectors inside T_p; returns false when
// the pair is numerically degenerate.
bool orthonormal_plane(const AmbientPoint& p, Vec a, Vec b, Plane& out) {
  a -= a.dot(p.coords()) * p.coords();
  const double na = a.norm();
  if (na < 1e-10) return false;
  a /= na;
  b -= b.dot(p.coords()) * p.coords();
  b -= b.dot(a) * a;
  const double nb = b.norm();
  if (nb < 1e-10) return false;
  b /= nb;
  out.x = std::move(a);
  out.y = std::move(b);
  return true;
}

// Orthonormal basis of the complement of span(x, y) inside T_p S^n,
// deterministic largest-residual-first over the standard basis.
std::vector<Vec> plane_complement(const AmbientPoint& p, const Plane& pl) {
  const int dim = p.ambient_dim();
  std::vector<Vec> basis{p.coords(), pl.x, pl.y};
  std::vector<Vec> complement;
  const int want = dim - 3;
  for (int picked = 0; picked < want; ++picked) {
    int best = -1;
    double best_norm = 1e-8;
    Vec best_res;
    for (int j = 0; j < dim; ++j) {
      Vec r = Vec::Zero(dim);
      r[j] = 1.0;
      for (const Vec& bvec : basis) r -= r.dot(bvec) * bvec;
      for (const Vec& bvec : basis) r -= r.dot(bvec) * bvec;
      const double nr = r.norm();
      if (nr > best_norm) {
        best_norm = nr;
        best = j;
        best_res = std::move(r);
      }
    }
    if (best < 0) break;
    best_res /= best_norm;
    basis.push_back(best_res);
    complement.push_back(std::move(best_res));
  }
  return complement;
}

struct Tracker {
  double min_K = std::numeric_limits<double>::infinity();
  double max_K = -std::numeric_limits<double>::infinity();
  long evals = 0;
  double record(const SphereJet& fj, const Plane& pl) {
    const double v = conformal_sectional(fj, pl.x, pl.y);
    ++evals;
    min_K = std::min(min_K, v);
    max_K = std::max(max_K, v);
    return v;
  }
};

// Gradient ascent (sign = +1) or descent (sign = -1) on the Grassmannian of
// two-planes, moving the basis pair toward the complement directions.
// Finite-difference gradient, fixed iteration count, step halving when the
// move fails to improve.
double refine_extremum(const SphereJet& fj, const AmbientPoint& p, Plane plane, double sign,
                       const RefineOptions& opts, Tracker& tracker) {
  double step = opts.step_size;
  double current = tracker.record(fj, plane);
  for (int iter = 0; iter < opts.steps; ++iter) {
    const std::vector<Vec> complement = plane_complement(p, plane);
    if (complement.empty()) break;  // n = 2: the Grassmannian is a point
    const int m = static_cast<int>(complement.size());
    // Directional derivatives of K along rotating x (then y) toward each
    // complement direction.
    Mat grad(2, m);
    for (int c = 0; c < m; ++c) {
      for (int which = 0; which < 2; ++which) {
        Plane probe = plane;
        Vec& moved = which == 0 ? probe.x : probe.y;
        const Vec original = moved;
        Plane plus, minus;
        moved = original + opts.fd_step * complement[c];
        if (!orthonormal_plane(p, probe.x, probe.y, plus)) return current;
        probe = plane;
        (which == 0 ? probe.x : probe.y) = original - opts.fd_step * complement[c];
        if (!orthonormal_plane(p, probe.x, probe.y, minus)) return current;
        grad(which, c) =
            (tracker.record(fj, plus) - tracker.record(fj, minus)) / (2.0 * opts.fd_step);
      }
    }
    const double gnorm = grad.norm();
    if (gnorm < 1e-14) break;
    Plane moved;
    Vec nx = plane.x, ny = plane.y;
    for (int c = 0; c < m; ++c) {
      nx += sign * step * grad(0, c) / gnorm * complement[c];
      ny += sign * step * grad(1, c) / gnorm * complement[c];
    }
    if (!orthonormal_plane(p, nx, ny, moved)) break;
    const double value = tracker.record(fj, moved);
    if (sign * (value - current) > 0) {
      plane = moved;
      current = value;
    } else {
      step *= 0.5;
      if (step < 1e-10) break;
    }
  }
  return current;
}

}  // namespace

PlaneExtremes extremal_sectional_at_point(const ConformalFactor& f, const AmbientPoint& p,
                                          int plane_budget, Rng& rng, const RefineOptions& opts,
                                          const std::vector<std::pair<Vec, Vec>>* seed_planes) {
  if (plane_budget < 1)
    throw std::invalid_argument("extremal_sectional_at_point: plane budget must be >= 1");
  const SphereJet fj = sphere_grad_hess(f, p);
  const int dim = p.ambient_dim();

  Tracker tracker;
  Plane best_min, best_max;
  double best_min_val = std::numeric_limits<double>::infinity();
  double best_max_val = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Plane& pl) {
    const double v = tracker.record(fj, pl);
    if (v < best_min_val) {
      best_min_val = v;
      best_min = pl;
    }
    if (v > best_max_val) {
      best_max_val = v;
      best_max = pl;
    }
  };

  if (seed_planes) {
    for (const auto& [a, b] : *seed_planes) {
      Plane pl;
      if (orthonormal_plane(p, a, b, pl)) consider(pl);
    }
  }
  for (int s = 0; s < plane_budget; ++s) {
    Plane pl;
    if (!orthonormal_plane(p, rng.gaussian_vec(dim), rng.gaussian_vec(dim), pl)) {
      --s;  // essentially never; redraw
      continue;
    }
    consider(pl);
  }

  PlaneExtremes out{};
  out.raw_min_K = best_min_val;
  out.raw_max_K = best_max_val;
  const double refined_min = refine_extremum(fj, p, best_min, -1.0, opts, tracker);
  const double refined_max = refine_extremum(fj, p, best_max, +1.0, opts, tracker);
  // The tracker already folds every refinement evaluation into the extremes;
  // the refined endpoints are kept for symmetry of reporting.
  out.min_K = std::min(tracker.min_K, refined_min);
  out.max_K = std::max(tracker.max_K, refined_max);
  out.evals = tracker.evals;
  return out;
}

PinchingEstimate delta_estimate(const ConformalFactor& f, int n, int point_budget,
                                int plane_budget, std::uint64_t seed, int threads,
                                const RefineOptions& opts) {
  if (point_budget < 1 || plane_budget < 1)
    throw std::invalid_argument("delta_estimate: budgets must be >= 1");
  PinchingEstimate est;
  est.seed = seed;
  est.point_budget = point_budget;
  est.plane_budget = plane_budget;
  est.refine_iters = opts.steps;
  est.per_point.resize(point_budget);

  std::vector<double> mins(point_budget), maxs(point_budget);
  std::vector<double> raw_mins(point_budget), raw_maxs(point_budget);
  std::vector<long> evals(point_budget);
  parallel_for(point_budget, threads, [&](int i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    const AmbientPoint p(rng.unit_vec(n + 1));
    const PlaneExtremes ex = extremal_sectional_at_point(f, p, plane_budget, rng, opts);
    mins[i] = ex.min_K;
    maxs[i] = ex.max_K;
    raw_mins[i] = ex.raw_min_K;
    raw_maxs[i] = ex.raw_max_K;
    evals[i] = ex.evals;
    est.per_point[i] = PointExtremes{i, ex.min_K, ex.max_K};
  });

  est.min_K = mins[0];
  est.max_K = maxs[0];
  est.raw_min_K = raw_mins[0];
  est.raw_max_K = raw_maxs[0];
  est.samples = 0;
  for (int i = 0; i < point_budget; ++i) {
    est.min_K = std::min(est.min_K, mins[i]);
    est.max_K = std::max(est.max_K, maxs[i]);
    est.raw_min_K = std::min(est.raw_min_K, raw_mins[i]);
    est.raw_max_K = std::max(est.raw_max_K, raw_maxs[i]);
    est.samples += evals[i];
  }
  est.positive = est.min_K > 0.0;
  est.delta_lower =
      est.positive ? est.min_K / est.max_K : std::numeric_limits<double>::quiet_NaN();
  return est;
}

}  // namespace confstab
