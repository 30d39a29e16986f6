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

#ifndef THINDEEP_GP_CORE_HPP
#define THINDEEP_GP_CORE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "thindeep/common.hpp"

namespace thindeep {

/// Lower Cholesky factor of A + jitter * I.
struct CholeskyFactor {
  Matrix lower;
  double jitter = 0.0;

  Vector solve(const Vector &b) const;
  Matrix solve(const Matrix &b) const;
  /// L^{-1} b
  Matrix half_solve(const Matrix &b) const;
  double log_det() const;
  Matrix inverse() const;
};

/// Factorizes A, first as given and then with jitter 1e-8, 1e-7, ..., 1e-2
/// added to the diagonal. Throws NumericalError once the largest jitter
/// still fails.
CholeskyFactor robust_cholesky(const Matrix &a);

class GaussianDist {
public:
  GaussianDist(Vector mean, Matrix covariance);

  const Vector &mean() const { return mean_; }
  const Matrix &covariance() const { return covariance_; }
  const CholeskyFactor &factor() const { return factor_; }
  Eigen::Index dim() const { return mean_.size(); }

private:
  Vector mean_;
  Matrix covariance_;
  CholeskyFactor factor_;
};

/// KL(q || p) in closed form.
double gaussian_kl(const GaussianDist &q, const GaussianDist &p);

using KernelFn = std::function<double(const Vector &, const Vector &)>;
using MeanFn = std::function<double(const Vector &)>;

struct InducingSet {
  Matrix pseudo_inputs; ///< m x Q
  KernelFn kernel;
};

struct Marginal {
  double mean = 0.0;
  double variance = 0.0;
};

/// Marginals of p(f(x*) | v) q(v) at each row of x_star, where v = f(Z).
std::vector<Marginal> sparse_conditional(const Matrix &x_star, const InducingSet &inducing,
                                         const GaussianDist &q_inducing, const MeanFn &prior_mean);

/// One draw from N(mean(points), K(points, points)). A kernel whose Gram is
/// identically zero yields the mean exactly.
Vector sample_gp(const Matrix &points, const KernelFn &kernel, const MeanFn &mean,
                 std::uint64_t seed);

/// Same, from a pre-computed covariance and standard normal draws.
Vector sample_mvn(const Vector &mean, const Matrix &covariance, const Vector &standard_normals);

Vector standard_normals(Eigen::Index n, std::uint64_t seed);

} // namespace thindeep

#endif
