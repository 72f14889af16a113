// Deterministic random streams. Every consumer derives its own stream from
// (seed, index) so serial and parallel runs draw identical samples.
#pragma once

#include <cmath>
#include <cstdint>

#include "confstab/linalg.hpp"

namespace confstab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Self-contained generator (splitmix64 core, explicit Box-Muller) so results
// do not depend on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s) ^ (0x6a09e667f3bcc909ULL * (index + 1));
    return Rng(mixed);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Vec gaussian_vec(int dim) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gaussian();
    return v;
  }

  // Uniform point on the unit sphere in R^dim.
  Vec unit_vec(int dim) {
    Vec v = gaussian_vec(dim);
    double n = v.norm();
    while (n < 1e-12) {
      v = gaussian_vec(dim);
      n = v.norm();
    }
    return v / n;
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Haar-ish random orthogonal matrix via QR of a Gaussian matrix with the
// sign convention fixed, so the result is deterministic given the stream.
inline Mat random_orthogonal(Rng& rng, int dim) {
  Mat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace confstab
