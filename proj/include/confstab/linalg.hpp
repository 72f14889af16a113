// Shared linear-algebra aliases and deterministic reductions.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace confstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Pairwise summation in a fixed order; independent of thread count as long
// as the input vector is index-ordered.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& xs) {
  return pairwise_sum(std::span<const double>(xs.data(), xs.size()));
}

inline Vec basis_vector(int dim, int index) {
  Vec e = Vec::Zero(dim);
  e[index] = 1.0;
  return e;
}

}  // namespace confstab
