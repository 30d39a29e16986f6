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

#include "thindeep/tdgp.hpp"

#include <algorithm>
#include <random>

#include "thindeep/cluster.hpp"
#include "thindeep/kernels.hpp"

namespace thindeep::tdgp {

using kernels::ard_cross;

void TdgpModel::validate() const {
  require(input_dim > 0 && latent_dim > 0, "TdgpModel: dimensions must be positive");
  const int dw = design_dim();
  require(output_variance > 0 && noise_variance > 0, "TdgpModel: variances must be positive");
  require(hidden_variances.size() == latent_dim && (hidden_variances.array() > 0).all(),
          "TdgpModel: hidden variances must be positive, one per latent row");
  require(lengthscales.size() == input_dim && (lengthscales.array() > 0).all(),
          "TdgpModel: lengthscales must be positive, one per input");
  require(prior_mean.rows() == latent_dim && prior_mean.cols() == dw,
          "TdgpModel: prior mean must be Q x design_dim");
  require(inducing_out.rows() >= 1 && inducing_out.cols() == latent_dim,
          "TdgpModel: output pseudo-inputs must be m_u x Q");
  require(inducing_hidden.rows() >= 1 && inducing_hidden.cols() == input_dim,
          "TdgpModel: hidden pseudo-inputs must be m_v x D");
  require(static_cast<int>(q_mean.size()) == latent_dim &&
              static_cast<int>(q_chol.size()) == latent_dim,
          "TdgpModel: one variational factor per latent row");
  const Eigen::Index mv = inducing_hidden.rows();
  for (int q = 0; q < latent_dim; ++q) {
    require(q_mean[q].rows() == mv && q_mean[q].cols() == dw, "TdgpModel: q_mean shape");
    require(q_chol[q].rows() == mv && q_chol[q].cols() == mv, "TdgpModel: q_chol shape");
    require((q_chol[q].diagonal().array() > 0).all(),
            "TdgpModel: q_chol diagonal must be positive");
  }
  require(jitter >= 0, "TdgpModel: jitter must be non-negative");
}

Matrix TdgpModel::design(const Matrix &x) const {
  require(x.cols() == input_dim, "TdgpModel: input dimension mismatch");
  if (!augment_bias) {
    return x;
  }
  Matrix xd(x.rows(), input_dim + 1);
  xd << x, Vector::Ones(x.rows());
  return xd;
}

ParamVector TdgpModel::pack() const {
  ParamVector p;
  auto isp = [](const Vector &v) { return Vector(v.unaryExpr(&inverse_softplus)); };
  p.append("output_variance", Vector::Constant(1, inverse_softplus(output_variance)));
  p.append("hidden_variances", isp(hidden_variances));
  p.append("lengthscales", isp(lengthscales));
  p.append("prior_mean", flatten(prior_mean));
  p.append("noise_variance", Vector::Constant(1, inverse_softplus(noise_variance)));
  p.append("inducing_out", flatten(inducing_out));
  p.append("inducing_hidden", flatten(inducing_hidden));
  const Eigen::Index mv = num_inducing_hidden();
  const Eigen::Index per_mean = mv * design_dim();
  const Eigen::Index per_chol = mv * (mv + 1) / 2;
  Vector means(per_mean * latent_dim);
  Vector chols(per_chol * latent_dim);
  for (int q = 0; q < latent_dim; ++q) {
    means.segment(q * per_mean, per_mean) = flatten(q_mean[q]);
    chols.segment(q * per_chol, per_chol) = pack_cholesky(q_chol[q]);
  }
  p.append("q_mean", means);
  p.append("q_chol", chols);
  return p;
}

void TdgpModel::unpack(const ParamVector &p) {
  ParamReader r(p);
  auto sp = [](const Vector &v) { return Vector(v.unaryExpr(&softplus)); };
  output_variance = softplus(r.next("output_variance")[0]);
  hidden_variances = sp(r.next("hidden_variances"));
  lengthscales = sp(r.next("lengthscales"));
  prior_mean = unflatten(r.next("prior_mean"), latent_dim, design_dim());
  noise_variance = softplus(r.next("noise_variance")[0]);
  const Eigen::Index mu = num_inducing_out();
  const Eigen::Index mv = num_inducing_hidden();
  inducing_out = unflatten(r.next("inducing_out"), mu, latent_dim);
  inducing_hidden = unflatten(r.next("inducing_hidden"), mv, input_dim);
  const Vector means = r.next("q_mean");
  const Vector chols = r.next("q_chol");
  const Eigen::Index per_mean = mv * design_dim();
  const Eigen::Index per_chol = mv * (mv + 1) / 2;
  for (int q = 0; q < latent_dim; ++q) {
    q_mean[q] = unflatten(means.segment(q * per_mean, per_mean), mv, design_dim());
    q_chol[q] = unpack_cholesky(chols.segment(q * per_chol, per_chol), mv);
  }
}

Matrix QwMarginals::covariance(Eigen::Index i, int q) const {
  const Eigen::Index dw = mean[static_cast<std::size_t>(q)].cols();
  return variance(i, q) * Matrix::Identity(dw, dw);
}

namespace {

/// Everything the hidden layer produces on a batch, kept for the reverse pass.
struct HiddenState {
  Matrix xd;
  Vector xsq;
  Matrix chh;        ///< C(Z_w, Z_w), unit variance
  CholeskyFactor lc; ///< of C + jitter I
  Matrix kc;         ///< C(Z_w, X), m_v x n
  Matrix a;          ///< (C + jitter I)^-1 kc
  Vector cka;        ///< c_i^T A_i
  std::vector<Matrix> mdiff;
  std::vector<Matrix> sigma;
  QwMarginals marg;
  Matrix mq; ///< E[w_iq]^T x_i, n x Q
  Matrix vq; ///< Var[w_iq^T x_i], n x Q
};

HiddenState hidden_forward(const TdgpModel &model, const Matrix &x) {
  model.validate();
  HiddenState s;
  const Eigen::Index n = x.rows();
  const int nq = model.latent_dim;
  s.xd = model.design(x);
  s.xsq = s.xd.rowwise().squaredNorm();
  s.chh = ard_cross(model.inducing_hidden, model.inducing_hidden, 1.0, model.lengthscales);
  Matrix ct = s.chh;
  ct.diagonal().array() += model.jitter;
  s.lc = robust_cholesky(ct);
  s.kc = ard_cross(model.inducing_hidden, x, 1.0, model.lengthscales);
  s.a = s.lc.solve(s.kc);
  s.cka = s.kc.cwiseProduct(s.a).colwise().sum().transpose();

  s.mdiff.resize(static_cast<std::size_t>(nq));
  s.sigma.resize(static_cast<std::size_t>(nq));
  s.marg.mean.resize(static_cast<std::size_t>(nq));
  s.marg.variance.resize(n, nq);
  s.mq.resize(n, nq);
  s.vq.resize(n, nq);
  for (int q = 0; q < nq; ++q) {
    const auto uq = static_cast<std::size_t>(q);
    s.mdiff[uq] = model.q_mean[uq].rowwise() - model.prior_mean.row(q);
    s.marg.mean[uq] = (s.a.transpose() * s.mdiff[uq]).rowwise() + model.prior_mean.row(q);
    s.sigma[uq] = model.q_covariance(q);
    const Vector asa = s.a.cwiseProduct(s.sigma[uq] * s.a).colwise().sum().transpose();
    s.marg.variance.col(q) =
        model.hidden_variances[q] * (Vector::Ones(n) - s.cka) + asa;
    s.mq.col(q) = s.marg.mean[uq].cwiseProduct(s.xd).rowwise().sum();
    s.vq.col(q) = s.marg.variance.col(q).cwiseProduct(s.xsq);
  }
  return s;
}

void marginal_moments(const TdgpModel &model, const Matrix &x, const QwMarginals &marg,
                      Matrix &mq, Matrix &vq) {
  const Matrix xd = model.design(x);
  const Vector xsq = xd.rowwise().squaredNorm();
  const int nq = model.latent_dim;
  require(static_cast<int>(marg.mean.size()) == nq && marg.variance.rows() == x.rows(),
          "psi statistics: marginals do not match the data");
  mq.resize(x.rows(), nq);
  vq.resize(x.rows(), nq);
  for (int q = 0; q < nq; ++q) {
    mq.col(q) = marg.mean[static_cast<std::size_t>(q)].cwiseProduct(xd).rowwise().sum();
    vq.col(q) = marg.variance.col(q).cwiseProduct(xsq);
  }
}

Matrix psi1_from(const Matrix &mq, const Matrix &vq, const Matrix &z, double sf2) {
  const Eigen::Index n = mq.rows();
  const Eigen::Index m = z.rows();
  const Eigen::Index nq = z.cols();
  Matrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lognorm = 0.0;
    for (Eigen::Index q = 0; q < nq; ++q) {
      lognorm -= 0.5 * std::log1p(vq(i, q));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      double e = lognorm;
      for (Eigen::Index q = 0; q < nq; ++q) {
        const double r = mq(i, q) - z(j, q);
        e -= 0.5 * r * r / (1.0 + vq(i, q));
      }
      out(i, j) = sf2 * std::exp(e);
    }
  }
  return out;
}

/// -|z_j - z_k|^2 / 4
Matrix quarter_distances(const Matrix &z) {
  const Eigen::Index m = z.rows();
  Matrix out(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k <= j; ++k) {
      out(j, k) = -0.25 * kernels::squared_distance(z.row(j).transpose(), z.row(k).transpose());
      out(k, j) = out(j, k);
    }
  }
  return out;
}

/// log of the i-th summand of Psi2_jk without the sf2^2 factor.
inline double psi2_log_term(const Matrix &mq, const Matrix &vq, const Matrix &z,
                            const Matrix &qd, Eigen::Index i, Eigen::Index j, Eigen::Index k,
                            double lognorm) {
  double e = qd(j, k) + lognorm;
  for (Eigen::Index q = 0; q < z.cols(); ++q) {
    const double r = mq(i, q) - 0.5 * (z(j, q) + z(k, q));
    e -= r * r / (2.0 * vq(i, q) + 1.0);
  }
  return e;
}

Matrix psi2_from(const Matrix &mq, const Matrix &vq, const Matrix &z, double sf2) {
  const Eigen::Index m = z.rows();
  const Matrix qd = quarter_distances(z);
  Matrix out = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < mq.rows(); ++i) {
    double lognorm = 0.0;
    for (Eigen::Index q = 0; q < z.cols(); ++q) {
      lognorm -= 0.5 * std::log1p(2.0 * vq(i, q));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index k = 0; k <= j; ++k) {
        out(j, k) += std::exp(psi2_log_term(mq, vq, z, qd, i, j, k, lognorm));
      }
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      out(k, j) = out(j, k);
    }
  }
  return sf2 * sf2 * out;
}

/// Hidden-layer KL and, optionally, its reverse pass into `grad`
/// (as the gradient of -KL) plus the adjoint of C + jitter I in `cbar`.
double hidden_kl_impl(const TdgpModel &model, const CholeskyFactor &lc,
                      const std::vector<Matrix> &mdiff, const std::vector<Matrix> &sigma,
                      TdgpGradient *grad, std::vector<Matrix> *dsigma, Matrix *cbar) {
  const Eigen::Index mv = model.num_inducing_hidden();
  const double dw = model.design_dim();
  const double logdet_c = lc.log_det();
  Matrix p;
  if (grad != nullptr) {
    p = lc.inverse();
  }
  double kl = 0.0;
  for (int q = 0; q < model.latent_dim; ++q) {
    const auto uq = static_cast<std::size_t>(q);
    const double sw = model.hidden_variances[q];
    const Matrix &l = model.q_chol[uq];
    const double tr_ps = lc.half_solve(l).squaredNorm();
    const double logdet_s = 2.0 * l.diagonal().array().log().sum();
    const Matrix pm = lc.solve(mdiff[uq]);
    const double quad = mdiff[uq].cwiseProduct(pm).sum();
    const double mvd = static_cast<double>(mv);
    kl += 0.5 * dw * (tr_ps / sw - mvd + mvd * std::log(sw) + logdet_c - logdet_s) +
          quad / (2.0 * sw);
    if (grad == nullptr) {
      continue;
    }
    (*dsigma)[uq] -= dw / (2.0 * sw) * p;
    grad->hidden_variances[q] += 0.5 * dw * (tr_ps / (sw * sw) - mvd / sw) + quad / (2.0 * sw * sw);
    grad->q_mean[uq] -= pm / sw;
    grad->prior_mean.row(q) += pm.colwise().sum() / sw;
    *cbar += 0.5 * dw * (p * sigma[uq] * p / sw - p) + pm * pm.transpose() / (2.0 * sw);
  }
  return kl;
}

} // namespace

QwMarginals qw_marginals(const TdgpModel &model, const Matrix &x) {
  return hidden_forward(model, x).marg;
}

Matrix psi1(const TdgpModel &model, const Matrix &x, const QwMarginals &marg) {
  Matrix mq;
  Matrix vq;
  marginal_moments(model, x, marg, mq, vq);
  return psi1_from(mq, vq, model.inducing_out, model.output_variance);
}

Matrix psi2(const TdgpModel &model, const Matrix &x, const QwMarginals &marg) {
  Matrix mq;
  Matrix vq;
  marginal_moments(model, x, marg, mq, vq);
  return psi2_from(mq, vq, model.inducing_out, model.output_variance);
}

PsiStats psi_statistics(const TdgpModel &model, const Matrix &x, const QwMarginals &marg) {
  Matrix mq;
  Matrix vq;
  marginal_moments(model, x, marg, mq, vq);
  PsiStats psi;
  psi.psi0 = static_cast<double>(x.rows()) * model.output_variance;
  psi.psi1 = psi1_from(mq, vq, model.inducing_out, model.output_variance);
  psi.psi2 = psi2_from(mq, vq, model.inducing_out, model.output_variance);
  return psi;
}

Matrix output_kuu(const TdgpModel &model) {
  const Matrix &z = model.inducing_out;
  Matrix k = ard_cross(z, z, 1.0, Vector::Ones(z.cols()));
  k.diagonal().array() += model.jitter;
  return model.output_variance * k;
}

double hidden_kl(const TdgpModel &model) {
  model.validate();
  Matrix ct = ard_cross(model.inducing_hidden, model.inducing_hidden, 1.0, model.lengthscales);
  ct.diagonal().array() += model.jitter;
  const CholeskyFactor lc = robust_cholesky(ct);
  std::vector<Matrix> mdiff;
  std::vector<Matrix> sigma;
  for (int q = 0; q < model.latent_dim; ++q) {
    mdiff.push_back(model.q_mean[static_cast<std::size_t>(q)].rowwise() - model.prior_mean.row(q));
    sigma.push_back(model.q_covariance(q));
  }
  return hidden_kl_impl(model, lc, mdiff, sigma, nullptr, nullptr, nullptr);
}

ElboResult collapsed_elbo(const TdgpModel &model, const Matrix &x, const Vector &y) {
  require(x.rows() >= 1 && x.rows() == y.size(), "collapsed_elbo: need n >= 1 matching rows");
  const HiddenState s = hidden_forward(model, x);
  const double sf2 = model.output_variance;
  const double psi0 = static_cast<double>(x.rows()) * sf2;
  const Matrix p1 = psi1_from(s.mq, s.vq, model.inducing_out, sf2);
  const Matrix p2 = psi2_from(s.mq, s.vq, model.inducing_out, sf2);
  ElboResult out;
  out.bound = collapsed_bound(psi0, p1, p2, output_kuu(model), model.noise_variance, y, false);
  out.kl_hidden = hidden_kl_impl(model, s.lc, s.mdiff, s.sigma, nullptr, nullptr, nullptr);
  out.value = out.bound.value - out.kl_hidden;
  return out;
}

ElboWithGradient collapsed_elbo_with_gradient(const TdgpModel &model, const Matrix &x,
                                              const Vector &y) {
  require(x.rows() >= 1 && x.rows() == y.size(), "collapsed_elbo: need n >= 1 matching rows");
  const HiddenState s = hidden_forward(model, x);
  const Eigen::Index n = x.rows();
  const Eigen::Index mu = model.num_inducing_out();
  const Eigen::Index mv = model.num_inducing_hidden();
  const int nq = model.latent_dim;
  const int dw = model.design_dim();
  const double sf2 = model.output_variance;
  const Matrix &z = model.inducing_out;

  const double psi0 = static_cast<double>(n) * sf2;
  const Matrix p1 = psi1_from(s.mq, s.vq, z, sf2);
  const Matrix p2 = psi2_from(s.mq, s.vq, z, sf2);
  const Matrix kuu = output_kuu(model);

  ElboWithGradient out;
  ElboResult &elbo = out.elbo;
  elbo.bound = collapsed_bound(psi0, p1, p2, kuu, model.noise_variance, y, true);
  const CollapsedBound &cb = elbo.bound;

  TdgpGradient &g = out.gradient;
  g.hidden_variances = Vector::Zero(nq);
  g.lengthscales = Vector::Zero(model.input_dim);
  g.prior_mean = Matrix::Zero(nq, dw);
  g.inducing_out = Matrix::Zero(mu, nq);
  g.inducing_hidden = Matrix::Zero(mv, model.input_dim);
  g.q_mean.assign(static_cast<std::size_t>(nq), Matrix::Zero(mv, dw));
  g.q_chol.assign(static_cast<std::size_t>(nq), Matrix::Zero(mv, mv));
  g.noise_variance = cb.d_noise;

  // Output layer: psi0, Kuu, Psi1, Psi2 -> sf2, Z, and the per-(i, q)
  // moments m_iq, v_iq.
  Matrix gm = Matrix::Zero(n, nq);
  Matrix gv = Matrix::Zero(n, nq);
  double dsf2 = cb.d_psi0 * static_cast<double>(n);

  {
    const Matrix e = kuu / sf2; // unit correlation plus jitter
    dsf2 += cb.d_kuu.cwiseProduct(e).sum();
    for (Eigen::Index j = 0; j < mu; ++j) {
      for (Eigen::Index k = 0; k < mu; ++k) {
        if (j == k) {
          continue;
        }
        const double coef = cb.d_kuu(j, k) * kuu(j, k);
        for (int q = 0; q < nq; ++q) {
          const double diff = z(j, q) - z(k, q);
          g.inducing_out(j, q) -= coef * diff;
          g.inducing_out(k, q) += coef * diff;
        }
      }
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < mu; ++j) {
      const double w = cb.d_psi1(i, j) * p1(i, j);
      if (w == 0.0) {
        continue;
      }
      dsf2 += w / sf2;
      for (int q = 0; q < nq; ++q) {
        const double a = 1.0 + s.vq(i, q);
        const double r = s.mq(i, q) - z(j, q);
        gm(i, q) -= w * r / a;
        gv(i, q) += w * (-0.5 / a + 0.5 * r * r / (a * a));
        g.inducing_out(j, q) += w * r / a;
      }
    }
  }

  {
    const Matrix qd = quarter_distances(z);
    for (Eigen::Index i = 0; i < n; ++i) {
      double lognorm = 0.0;
      for (int q = 0; q < nq; ++q) {
        lognorm -= 0.5 * std::log1p(2.0 * s.vq(i, q));
      }
      for (Eigen::Index j = 0; j < mu; ++j) {
        for (Eigen::Index k = 0; k <= j; ++k) {
          const double gjk = j == k ? cb.d_psi2(j, j) : cb.d_psi2(j, k) + cb.d_psi2(k, j);
          const double w =
              gjk * sf2 * sf2 * std::exp(psi2_log_term(s.mq, s.vq, z, qd, i, j, k, lognorm));
          if (w == 0.0) {
            continue;
          }
          dsf2 += 2.0 * w / sf2;
          for (int q = 0; q < nq; ++q) {
            const double b = 2.0 * s.vq(i, q) + 1.0;
            const double r = s.mq(i, q) - 0.5 * (z(j, q) + z(k, q));
            const double half_gap = 0.5 * (z(j, q) - z(k, q));
            gm(i, q) -= w * 2.0 * r / b;
            gv(i, q) += w * (-1.0 / b + 2.0 * r * r / (b * b));
            g.inducing_out(j, q) += w * (-half_gap + r / b);
            g.inducing_out(k, q) += w * (half_gap + r / b);
          }
        }
      }
    }
  }
  g.output_variance = dsf2;

  // Hidden layer: (m_iq, v_iq) -> marginal moments -> q(V), prior, Z_w, l.
  const Matrix gs = gv.array().colwise() * s.xsq.array();
  const Vector one_minus_cka = Vector::Ones(n) - s.cka;
  const Vector one_minus_asum = Vector::Ones(n) - s.a.colwise().sum().transpose();
  Matrix abar = Matrix::Zero(mv, n);
  Matrix kcbar = Matrix::Zero(mv, n);
  Matrix cbar = Matrix::Zero(mv, mv);
  std::vector<Matrix> dsigma(static_cast<std::size_t>(nq));

  for (int q = 0; q < nq; ++q) {
    const auto uq = static_cast<std::size_t>(q);
    const double sw = model.hidden_variances[q];
    const Matrix gmu = s.xd.array().colwise() * gm.col(q).array(); // n x Dw
    g.q_mean[uq] += s.a * gmu;
    g.prior_mean.row(q) += (gmu.transpose() * one_minus_asum).transpose();
    abar += s.mdiff[uq] * gmu.transpose();

    const Eigen::RowVectorXd gsq = gs.col(q).transpose();
    abar += ((2.0 * s.sigma[uq] * s.a - sw * s.kc).array().rowwise() * gsq.array()).matrix();
    kcbar -= sw * (s.a.array().rowwise() * gsq.array()).matrix();
    g.hidden_variances[q] += gs.col(q).dot(one_minus_cka);
    dsigma[uq] = (s.a.array().rowwise() * gsq.array()).matrix() * s.a.transpose();
  }

  elbo.kl_hidden = hidden_kl_impl(model, s.lc, s.mdiff, s.sigma, &g, &dsigma, &cbar);
  elbo.value = cb.value - elbo.kl_hidden;

  for (int q = 0; q < nq; ++q) {
    const auto uq = static_cast<std::size_t>(q);
    const Matrix &l = model.q_chol[uq];
    Matrix dl = (dsigma[uq] + dsigma[uq].transpose()) * l;
    dl.diagonal() += static_cast<double>(dw) * l.diagonal().cwiseInverse();
    g.q_chol[uq] = dl.triangularView<Eigen::Lower>();
  }

  // A = (C + jitter I)^-1 kc
  const Matrix pabar = s.lc.solve(abar);
  kcbar += pabar;
  cbar -= pabar * s.a.transpose();

  kernels::ard_cross_backward(model.inducing_hidden, model.inducing_hidden, s.chh, cbar,
                              model.lengthscales, &g.inducing_hidden, &g.inducing_hidden,
                              g.lengthscales);
  kernels::ard_cross_backward(model.inducing_hidden, x, s.kc, kcbar, model.lengthscales,
                              &g.inducing_hidden, nullptr, g.lengthscales);
  return out;
}

Vector unconstrained_gradient(const TdgpModel &model, const TdgpGradient &grad) {
  const ParamVector raw = model.pack();
  ParamVector out;
  auto chain = [&](const std::string &name, const Vector &natural) {
    const Vector r = raw.get(name);
    return Vector(natural.array() * r.unaryExpr(&sigmoid).array());
  };
  out.append("output_variance",
             chain("output_variance", Vector::Constant(1, grad.output_variance)));
  out.append("hidden_variances", chain("hidden_variances", grad.hidden_variances));
  out.append("lengthscales", chain("lengthscales", grad.lengthscales));
  out.append("prior_mean", flatten(grad.prior_mean));
  out.append("noise_variance", chain("noise_variance", Vector::Constant(1, grad.noise_variance)));
  out.append("inducing_out", flatten(grad.inducing_out));
  out.append("inducing_hidden", flatten(grad.inducing_hidden));
  const Eigen::Index mv = model.num_inducing_hidden();
  const Eigen::Index per_mean = mv * model.design_dim();
  const Eigen::Index per_chol = mv * (mv + 1) / 2;
  Vector means(per_mean * model.latent_dim);
  Vector chols(per_chol * model.latent_dim);
  const Vector raw_chol = raw.get("q_chol");
  for (int q = 0; q < model.latent_dim; ++q) {
    const auto uq = static_cast<std::size_t>(q);
    means.segment(q * per_mean, per_mean) = flatten(grad.q_mean[uq]);
    chols.segment(q * per_chol, per_chol) =
        pack_cholesky_gradient(grad.q_chol[uq], raw_chol.segment(q * per_chol, per_chol), mv);
  }
  out.append("q_mean", means);
  out.append("q_chol", chols);
  return out.values();
}

GaussianDist optimal_qu(const TdgpModel &model, const PsiStats &psi, const Vector &y) {
  const Matrix kuu = output_kuu(model);
  const CollapsedBound cb =
      collapsed_bound(psi.psi0, psi.psi1, psi.psi2, kuu, model.noise_variance, y, false);
  Vector mean = kuu * cb.alpha;
  Matrix cov = model.noise_variance * kuu * cb.sigma_inv * kuu;
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(mean), std::move(cov)};
}

TdgpPredictor::TdgpPredictor(TdgpModel model, const GaussianDist &qu)
    : model_(std::move(model)), qu_(qu) {
  model_.validate();
  require(qu_.dim() == model_.num_inducing_out(), "TdgpPredictor: q(u) dimension mismatch");
  const CholeskyFactor lk = robust_cholesky(output_kuu(model_));
  alpha_ = lk.solve(qu_.mean());
  const Matrix kinv = lk.inverse();
  const Matrix b = kinv * qu_.covariance() * kinv;
  middle_ = -kinv + b + alpha_ * alpha_.transpose();
}

TdgpPredictor TdgpPredictor::fit(const TdgpModel &model, const Matrix &x, const Vector &y) {
  const PsiStats psi = psi_statistics(model, x, qw_marginals(model, x));
  return {model, optimal_qu(model, psi, y)};
}

Prediction TdgpPredictor::predict(const Matrix &x_star) const {
  const HiddenState s = hidden_forward(model_, x_star);
  const Eigen::Index n = x_star.rows();
  const Matrix &z = model_.inducing_out;
  const double sf2 = model_.output_variance;
  const Matrix p1 = psi1_from(s.mq, s.vq, z, sf2);
  Prediction out;
  out.mean = p1 * alpha_;
  out.latent_variance.resize(n);
  out.observed_variance.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Matrix p2 = psi2_from(s.mq.row(i), s.vq.row(i), z, sf2);
    double var = sf2 + p2.cwiseProduct(middle_).sum() - out.mean[i] * out.mean[i];
    if (!(var >= 1e-12)) {
      var = 1e-12;
      ++out.clamp_count;
    }
    out.latent_variance[i] = var;
    out.observed_variance[i] = var + model_.noise_variance;
  }
  return out;
}

Relevance relevance_profile(const TdgpModel &model) {
  // a pruned row may sit at exactly zero variance, so no full validate()
  require(model.hidden_variances.size() == model.latent_dim &&
              (model.hidden_variances.array() >= 0).all(),
          "relevance_profile: need Q non-negative kernel variances");
  require(model.prior_mean.rows() == model.latent_dim &&
              model.prior_mean.cols() == model.design_dim(),
          "relevance_profile: prior mean must be Q x design_dim");
  Relevance r;
  r.kernel_variance_component = model.hidden_variances;
  r.mean_component = model.prior_mean.rowwise().squaredNorm() / model.design_dim();
  const Vector total = r.kernel_variance_component + r.mean_component;
  const double top = total.maxCoeff();
  r.relevance = top > 0 ? Vector(total / top) : Vector(Vector::Zero(total.size()));
  return r;
}

Matrix export_latent(const TdgpModel &model, const Matrix &grid) {
  require(grid.allFinite(), "export_latent: grid must be finite");
  const HiddenState s = hidden_forward(model, grid);
  return s.mq;
}

Matrix export_field(const TdgpModel &model, const Matrix &grid) {
  require(grid.allFinite(), "export_field: grid must be finite");
  const QwMarginals marg = qw_marginals(model, grid);
  Matrix out(grid.rows(), model.input_dim);
  Matrix w(model.latent_dim, model.input_dim);
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    for (int q = 0; q < model.latent_dim; ++q) {
      w.row(q) = marg.mean[static_cast<std::size_t>(q)].row(i).leftCols(model.input_dim);
    }
    out.row(i) = kernels::inverse_lengthscale_eigenvalues(w).transpose();
  }
  return out;
}

TdgpModel initialize(const Matrix &x, const TdgpConfig &config, std::uint64_t seed) {
  require(x.rows() >= 1 && x.cols() >= 1, "initialize: empty input");
  require(config.inducing_out >= 1 && config.inducing_hidden >= 1,
          "initialize: inducing counts must be positive");
  TdgpModel m;
  m.input_dim = static_cast<int>(x.cols());
  m.latent_dim = config.latent_dim > 0 ? config.latent_dim : m.input_dim;
  m.augment_bias = config.augment_bias;
  m.jitter = config.jitter;
  m.output_variance = config.output_variance;
  m.noise_variance = config.noise_variance;
  m.hidden_variances = Vector::Constant(m.latent_dim, config.hidden_variance);
  m.lengthscales = Vector::Constant(m.input_dim, config.lengthscale);
  const int dw = m.design_dim();
  m.prior_mean = Matrix::Zero(m.latent_dim, dw);
  for (int q = 0; q < std::min(m.latent_dim, m.input_dim); ++q) {
    m.prior_mean(q, q) = 1.0;
  }
  m.inducing_hidden = kmeans(x, config.inducing_hidden, seed);
  const Eigen::Index mv = m.inducing_hidden.rows();

  Matrix c = ard_cross(m.inducing_hidden, m.inducing_hidden, 1.0, m.lengthscales);
  c.diagonal().array() += m.jitter;
  const CholeskyFactor lc = robust_cholesky(c);
  std::mt19937_64 rng(seed + 0x5bd1e995ULL);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int q = 0; q < m.latent_dim; ++q) {
    Matrix mean = Vector::Ones(mv) * m.prior_mean.row(q);
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
      mean.data()[j] += noise(rng);
    }
    m.q_mean.push_back(mean);
    m.q_chol.push_back(std::sqrt(0.1 * m.hidden_variances[q]) * lc.lower);
  }

  // placeholder so validate() passes while the images are computed
  m.inducing_out = Matrix::Zero(1, m.latent_dim);
  const Matrix images = export_latent(m, x);
  m.inducing_out = kmeans(images, config.inducing_out, seed + 1);
  m.validate();
  return m;
}

} // namespace thindeep::tdgp
