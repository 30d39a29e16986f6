/*
 * Copyright 2026 The thindeep Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "thindeep/cluster.hpp"

#include <limits>
#include <random>

namespace thindeep {

Matrix kmeans(const Matrix &points, Eigen::Index k, std::uint64_t seed, int max_iterations) {
  const Eigen::Index n = points.rows();
  require(n >= 1 && k >= 1, "kmeans: need at least one point and one center");
  std::mt19937_64 rng(seed);

  if (k >= n) {
    Matrix centers(k, points.cols());
    centers.topRows(n) = points;
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::normal_distribution<double> normal(0.0, 1e-3);
    for (Eigen::Index j = n; j < k; ++j) {
      centers.row(j) = points.row(pick(rng));
      for (Eigen::Index d = 0; d < points.cols(); ++d) {
        centers(j, d) += normal(rng);
      }
    }
    return centers;
  }

  // k-means++ seeding
  Matrix centers(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = points.row(first(rng));
  Vector d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (Eigen::Index j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (chosen = 0; chosen < n - 1; ++chosen) {
        r -= d2[chosen];
        if (r <= 0) {
          break;
        }
      }
    } else {
      chosen = first(rng);
    }
    centers.row(j) = points.row(chosen);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(j)).rowwise().squaredNorm());
  }

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) {
      break;
    }
    Matrix sums = Matrix::Zero(k, points.cols());
    Vector counts = Vector::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      counts[assign[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        centers.row(j) = sums.row(j) / counts[j];
      }
    }
  }
  return centers;
}

} // namespace thindeep
