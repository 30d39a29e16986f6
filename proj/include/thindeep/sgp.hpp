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

#ifndef THINDEEP_SGP_HPP
#define THINDEEP_SGP_HPP

#include <cstdint>

#include "thindeep/collapsed_bound.hpp"
#include "thindeep/common.hpp"
#include "thindeep/gp_core.hpp"
#include "thindeep/params.hpp"

namespace thindeep::sgp {

/// Shallow sparse GP with an ARD squared exponential kernel, fitted through
/// the collapsed bound. The baseline against which the TDGP is compared.
struct SgpModel {
  int input_dim = 0;
  double variance = 1.0;
  Vector lengthscales;
  double noise_variance = 0.01;
  Matrix inducing; ///< m x D
  double jitter = 1e-6;

  Eigen::Index num_inducing() const { return inducing.rows(); }
  void validate() const;

  ParamVector pack() const;
  void unpack(const ParamVector &p);
};

struct SgpConfig {
  int inducing = 50;
  double variance = 1.0;
  double lengthscale = 1.0;
  double noise_variance = 0.01;
  double jitter = 1e-6;
};

/// Unit lengthscales and Z by k-means on X.
SgpModel initialize(const Matrix &x, const SgpConfig &config, std::uint64_t seed);

Matrix kuu(const SgpModel &model);

struct SgpGradient {
  double variance = 0.0;
  Vector lengthscales;
  double noise_variance = 0.0;
  Matrix inducing;
};

struct SgpBound {
  CollapsedBound bound;
  SgpGradient gradient; ///< filled only when requested
};

SgpBound collapsed_elbo(const SgpModel &model, const Matrix &x, const Vector &y,
                        bool with_gradient);

/// Entries line up with model.pack().
Vector unconstrained_gradient(const SgpModel &model, const SgpGradient &grad);

GaussianDist optimal_qu(const SgpModel &model, const Matrix &x, const Vector &y);

struct Prediction {
  Vector mean;
  Vector latent_variance;
  Vector observed_variance;
  int clamp_count = 0;
};

class SgpPredictor {
public:
  SgpPredictor(SgpModel model, const GaussianDist &qu);
  static SgpPredictor fit(const SgpModel &model, const Matrix &x, const Vector &y);

  Prediction predict(const Matrix &x_star) const;

  const SgpModel &model() const { return model_; }
  const GaussianDist &qu() const { return qu_; }

private:
  SgpModel model_;
  GaussianDist qu_;
  Vector alpha_;
  Matrix middle_;
};

/// Inverse lengthscales divided by the largest one.
Vector relevance_profile(const SgpModel &model);

} // namespace thindeep::sgp

#endif
