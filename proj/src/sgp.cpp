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

#include "thindeep/sgp.hpp"

#include "thindeep/cluster.hpp"
#include "thindeep/kernels.hpp"

namespace thindeep::sgp {

using kernels::ard_cross;

void SgpModel::validate() const {
  require(input_dim > 0, "SgpModel: input_dim must be positive");
  require(variance > 0 && noise_variance > 0, "SgpModel: variances must be positive");
  require(lengthscales.size() == input_dim && (lengthscales.array() > 0).all(),
          "SgpModel: lengthscales must be positive, one per input");
  require(inducing.rows() >= 1 && inducing.cols() == input_dim,
          "SgpModel: pseudo-inputs must be m x D");
  require(jitter >= 0, "SgpModel: jitter must be non-negative");
}

ParamVector SgpModel::pack() const {
  ParamVector p;
  p.append("variance", Vector::Constant(1, inverse_softplus(variance)));
  p.append("lengthscales", Vector(lengthscales.unaryExpr(&inverse_softplus)));
  p.append("noise_variance", Vector::Constant(1, inverse_softplus(noise_variance)));
  p.append("inducing", flatten(inducing));
  return p;
}

void SgpModel::unpack(const ParamVector &p) {
  ParamReader r(p);
  variance = softplus(r.next("variance")[0]);
  lengthscales = r.next("lengthscales").unaryExpr(&softplus);
  noise_variance = softplus(r.next("noise_variance")[0]);
  inducing = unflatten(r.next("inducing"), inducing.rows(), input_dim);
}

SgpModel initialize(const Matrix &x, const SgpConfig &config, std::uint64_t seed) {
  require(x.rows() >= 1 && x.cols() >= 1, "initialize: empty input");
  require(config.inducing >= 1, "initialize: inducing count must be positive");
  SgpModel m;
  m.input_dim = static_cast<int>(x.cols());
  m.variance = config.variance;
  m.lengthscales = Vector::Constant(m.input_dim, config.lengthscale);
  m.noise_variance = config.noise_variance;
  m.jitter = config.jitter;
  m.inducing = kmeans(x, config.inducing, seed);
  m.validate();
  return m;
}

Matrix kuu(const SgpModel &model) {
  Matrix k = ard_cross(model.inducing, model.inducing, 1.0, model.lengthscales);
  k.diagonal().array() += model.jitter;
  return model.variance * k;
}

SgpBound collapsed_elbo(const SgpModel &model, const Matrix &x, const Vector &y,
                        bool with_gradient) {
  model.validate();
  require(x.rows() >= 1 && x.rows() == y.size() && x.cols() == model.input_dim,
          "collapsed_elbo: data shape mismatch");
  const double n = static_cast<double>(x.rows());
  const Matrix kfu = ard_cross(x, model.inducing, model.variance, model.lengthscales);
  const Matrix ku = kuu(model);
  SgpBound out;
  out.bound = collapsed_bound(n * model.variance, kfu, kfu.transpose() * kfu, ku,
                              model.noise_variance, y, with_gradient);
  if (!with_gradient) {
    return out;
  }
  const CollapsedBound &cb = out.bound;
  SgpGradient &g = out.gradient;
  g.lengthscales = Vector::Zero(model.input_dim);
  g.inducing = Matrix::Zero(model.num_inducing(), model.input_dim);
  g.noise_variance = cb.d_noise;

  const Matrix kfu_bar = cb.d_psi1 + kfu * (cb.d_psi2 + cb.d_psi2.transpose());
  g.variance = n * cb.d_psi0 + kfu_bar.cwiseProduct(kfu).sum() / model.variance +
               cb.d_kuu.cwiseProduct(ku).sum() / model.variance;
  kernels::ard_cross_backward(x, model.inducing, kfu, kfu_bar, model.lengthscales, nullptr,
                              &g.inducing, g.lengthscales);
  kernels::ard_cross_backward(model.inducing, model.inducing, ku, cb.d_kuu, model.lengthscales,
                              &g.inducing, &g.inducing, g.lengthscales);
  return out;
}

Vector unconstrained_gradient(const SgpModel &model, const SgpGradient &grad) {
  const ParamVector raw = model.pack();
  auto chain = [&](const std::string &name, const Vector &natural) {
    return Vector(natural.array() * raw.get(name).unaryExpr(&sigmoid).array());
  };
  ParamVector out;
  out.append("variance", chain("variance", Vector::Constant(1, grad.variance)));
  out.append("lengthscales", chain("lengthscales", grad.lengthscales));
  out.append("noise_variance", chain("noise_variance", Vector::Constant(1, grad.noise_variance)));
  out.append("inducing", flatten(grad.inducing));
  return out.values();
}

GaussianDist optimal_qu(const SgpModel &model, const Matrix &x, const Vector &y) {
  const CollapsedBound cb = collapsed_elbo(model, x, y, false).bound;
  const Matrix ku = kuu(model);
  Matrix cov = model.noise_variance * ku * cb.sigma_inv * ku;
  cov = 0.5 * (cov + cov.transpose());
  return {Vector(ku * cb.alpha), cov};
}

SgpPredictor::SgpPredictor(SgpModel model, const GaussianDist &qu)
    : model_(std::move(model)), qu_(qu) {
  model_.validate();
  require(qu_.dim() == model_.num_inducing(), "SgpPredictor: q(u) dimension mismatch");
  const CholeskyFactor lk = robust_cholesky(kuu(model_));
  alpha_ = lk.solve(qu_.mean());
  const Matrix kinv = lk.inverse();
  middle_ = kinv - kinv * qu_.covariance() * kinv;
}

SgpPredictor SgpPredictor::fit(const SgpModel &model, const Matrix &x, const Vector &y) {
  return {model, optimal_qu(model, x, y)};
}

Prediction SgpPredictor::predict(const Matrix &x_star) const {
  require(x_star.cols() == model_.input_dim, "SgpPredictor: input dimension mismatch");
  const Matrix ksu = ard_cross(x_star, model_.inducing, model_.variance, model_.lengthscales);
  Prediction out;
  out.mean = ksu * alpha_;
  out.latent_variance.resize(x_star.rows());
  out.observed_variance.resize(x_star.rows());
  const Vector reduction = (ksu * middle_).cwiseProduct(ksu).rowwise().sum();
  for (Eigen::Index i = 0; i < x_star.rows(); ++i) {
    double var = model_.variance - reduction[i];
    if (!(var >= 1e-12)) {
      var = 1e-12;
      ++out.clamp_count;
    }
    out.latent_variance[i] = var;
    out.observed_variance[i] = var + model_.noise_variance;
  }
  return out;
}

Vector relevance_profile(const SgpModel &model) {
  model.validate();
  const Vector inv = model.lengthscales.cwiseInverse();
  return inv / inv.maxCoeff();
}

} // namespace thindeep::sgp
