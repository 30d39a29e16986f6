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

#ifndef THINDEEP_TDGP_HPP
#define THINDEEP_TDGP_HPP

#include <cstdint>
#include <vector>

#include "thindeep/collapsed_bound.hpp"
#include "thindeep/common.hpp"
#include "thindeep/gp_core.hpp"
#include "thindeep/params.hpp"

namespace thindeep::tdgp {

/// Two-layer thin-and-deep GP:
///
///   f ~ GP(0, sf2 exp(-|h(a) - h(b)|^2 / 2)),   h(x) = W(x) x,
///   w_qd ~ GP(mu_qd, sw2_q exp(-|(a - b) / l|^2 / 2)).
///
/// q(V) is mean-field over (q, d) with the covariance shared by all entries
/// of row q. With `augment_bias`, x is extended by a constant 1 so that W has
/// an extra column acting as an additive offset d(x).
struct TdgpModel {
  int input_dim = 0;  ///< D
  int latent_dim = 0; ///< Q
  bool augment_bias = false;

  double output_variance = 1.0; ///< sf2
  Vector hidden_variances;      ///< sw2_q, Q
  Vector lengthscales;          ///< l, D
  Matrix prior_mean;            ///< mu, Q x design_dim
  double noise_variance = 0.01;

  Matrix inducing_out;    ///< Z, m_u x Q
  Matrix inducing_hidden; ///< Z_w, m_v x D

  std::vector<Matrix> q_mean; ///< Q entries of m_v x design_dim
  std::vector<Matrix> q_chol; ///< Q lower factors, m_v x m_v

  /// Relative diagonal jitter on both inducing covariances:
  /// K = variance * (C + jitter I).
  double jitter = 1e-6;

  int design_dim() const { return input_dim + (augment_bias ? 1 : 0); }
  Eigen::Index num_inducing_out() const { return inducing_out.rows(); }
  Eigen::Index num_inducing_hidden() const { return inducing_hidden.rows(); }

  /// Throws ParameterError on inconsistent shapes or non-positive variances.
  void validate() const;

  /// X with the bias column appended when augment_bias is set.
  Matrix design(const Matrix &x) const;

  /// Row q covariance of q(v_q.): L_q L_q^T.
  Matrix q_covariance(int q) const { return q_chol[q] * q_chol[q].transpose(); }

  /// Unconstrained view: softplus for variances, lengthscales and factor
  /// diagonals; identity for the rest.
  ParamVector pack() const;
  void unpack(const ParamVector &p);
};

struct TdgpConfig {
  int latent_dim = 0; ///< 0 means Q = D
  int inducing_out = 50;
  int inducing_hidden = 25;
  bool augment_bias = false;
  double output_variance = 1.0;
  double hidden_variance = 1.0;
  double lengthscale = 1.0;
  double noise_variance = 0.01;
  double jitter = 1e-6;
};

/// Identity-block prior means, Z_w by k-means on X, q(v) at the prior mean
/// plus N(0, 0.01) noise with covariance 0.1 K_v, then Z by k-means on the
/// mean images E[W(x)] x.
TdgpModel initialize(const Matrix &x, const TdgpConfig &config, std::uint64_t seed);

/// Marginals of q(w_iq.) at the data. All D entries of a row share one
/// scalar variance and are independent, so the covariance is variance * I.
struct QwMarginals {
  std::vector<Matrix> mean; ///< Q entries of n x design_dim
  Matrix variance;          ///< n x Q

  Matrix covariance(Eigen::Index i, int q) const;
};

QwMarginals qw_marginals(const TdgpModel &model, const Matrix &x);

struct PsiStats {
  double psi0 = 0.0;
  Matrix psi1; ///< n x m_u
  Matrix psi2; ///< m_u x m_u
};

Matrix psi1(const TdgpModel &model, const Matrix &x, const QwMarginals &marg);
Matrix psi2(const TdgpModel &model, const Matrix &x, const QwMarginals &marg);
PsiStats psi_statistics(const TdgpModel &model, const Matrix &x, const QwMarginals &marg);

/// sf2 (exp(-|z_j - z_k|^2 / 2) + jitter I)
Matrix output_kuu(const TdgpModel &model);

/// Sum over (q, d) of KL(q(v_qd) || p(v_qd)).
double hidden_kl(const TdgpModel &model);

struct ElboResult {
  double value = 0.0;
  CollapsedBound bound; ///< the likelihood/inducing part with optimal q(u)
  double kl_hidden = 0.0;
};

ElboResult collapsed_elbo(const TdgpModel &model, const Matrix &x, const Vector &y);

/// Gradient of the collapsed ELBO w.r.t. the natural (constrained)
/// parameters. Same layout as TdgpModel.
struct TdgpGradient {
  double output_variance = 0.0;
  Vector hidden_variances;
  Vector lengthscales;
  Matrix prior_mean;
  double noise_variance = 0.0;
  Matrix inducing_out;
  Matrix inducing_hidden;
  std::vector<Matrix> q_mean;
  std::vector<Matrix> q_chol; ///< lower triangle meaningful
};

struct ElboWithGradient {
  ElboResult elbo;
  TdgpGradient gradient;
};

ElboWithGradient collapsed_elbo_with_gradient(const TdgpModel &model, const Matrix &x,
                                              const Vector &y);

/// Chains a natural-parameter gradient through the packing transforms.
/// Entries line up with model.pack().
Vector unconstrained_gradient(const TdgpModel &model, const TdgpGradient &grad);

/// Optimal q(u) = N(Ku S^-1 Psi1'y, s2 Ku S^-1 Ku), S = s2 Ku + Psi2.
GaussianDist optimal_qu(const TdgpModel &model, const PsiStats &psi, const Vector &y);

struct Prediction {
  Vector mean;
  Vector latent_variance;   ///< Var[f*]
  Vector observed_variance; ///< Var[f*] + noise
  int clamp_count = 0;      ///< variances raised to the 1e-12 floor
};

/// Moment-matched predictions through q(W) and a fixed q(u).
class TdgpPredictor {
public:
  TdgpPredictor(TdgpModel model, const GaussianDist &qu);
  /// Computes the optimal q(u) on the training data first.
  static TdgpPredictor fit(const TdgpModel &model, const Matrix &x, const Vector &y);

  Prediction predict(const Matrix &x_star) const;

  const TdgpModel &model() const { return model_; }
  const GaussianDist &qu() const { return qu_; }

private:
  TdgpModel model_;
  GaussianDist qu_;
  Vector alpha_;  ///< Ku^-1 mu_u
  Matrix middle_; ///< -Ku^-1 + Ku^-1 Su Ku^-1 + alpha alpha^T
};

struct Relevance {
  Vector relevance;                 ///< normalized to max 1
  Vector kernel_variance_component; ///< sw2_q
  Vector mean_component;            ///< |mu_q|^2 / design_dim
};

/// Relevance of latent row q: the prior second moment per entry,
/// sw2_q + |mu_q|^2 / design_dim, divided by the largest row.
Relevance relevance_profile(const TdgpModel &model);

/// h(x) = E_q[W(x)] x per grid row; g x Q.
Matrix export_latent(const TdgpModel &model, const Matrix &grid);

/// Descending eigenvalues of E[W(x)]^T E[W(x)] restricted to the input
/// columns (the local inverse squared lengthscales); g x D.
Matrix export_field(const TdgpModel &model, const Matrix &grid);

} // namespace thindeep::tdgp

#endif
