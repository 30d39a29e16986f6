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

#include "thindeep/gp_core.hpp"

#include <random>
#include <sstream>

namespace thindeep {

Vector CholeskyFactor::solve(const Vector &b) const {
  const Vector s = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(s);
}

Matrix CholeskyFactor::solve(const Matrix &b) const {
  const Matrix s = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(s);
}

Matrix CholeskyFactor::half_solve(const Matrix &b) const {
  return lower.triangularView<Eigen::Lower>().solve(b);
}

double CholeskyFactor::log_det() const { return 2.0 * lower.diagonal().array().log().sum(); }

Matrix CholeskyFactor::inverse() const {
  return solve(Matrix(Matrix::Identity(lower.rows(), lower.cols())));
}

CholeskyFactor robust_cholesky(const Matrix &a) {
  if (a.rows() != a.cols()) {
    throw ParameterError("robust_cholesky: matrix must be square");
  }
  if (!a.allFinite()) {
    throw NumericalError("robust_cholesky: matrix has non-finite entries");
  }
  const Eigen::Index n = a.rows();
  double jitter = 0.0;
  for (int attempt = 0; attempt <= 7; ++attempt) {
    if (attempt > 0) {
      jitter = std::pow(10.0, attempt - 9); // 1e-8 ... 1e-2
    }
    Matrix shifted = a;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0) {
      return {llt.matrixL(), jitter};
    }
  }
  std::ostringstream msg;
  msg << "robust_cholesky: factorization failed at jitter 1e-2 (n=" << n
      << ", min diag=" << a.diagonal().minCoeff() << ", max diag=" << a.diagonal().maxCoeff()
      << ", min eigenvalue=" << Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().minCoeff()
      << ")";
  throw NumericalError(msg.str());
}

GaussianDist::GaussianDist(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  require(mean_.size() == covariance_.rows() && covariance_.rows() == covariance_.cols(),
          "GaussianDist: shape mismatch");
  factor_ = robust_cholesky(covariance_);
}

double gaussian_kl(const GaussianDist &q, const GaussianDist &p) {
  require(q.dim() == p.dim(), "gaussian_kl: dimension mismatch");
  const auto &lp = p.factor();
  const Matrix a = lp.half_solve(q.factor().lower);
  const Vector r = lp.half_solve(Matrix(p.mean() - q.mean()));
  const double k = static_cast<double>(q.dim());
  const double kl =
      0.5 * (a.squaredNorm() + r.squaredNorm() - k + lp.log_det() - q.factor().log_det());
  return std::max(kl, 0.0);
}

std::vector<Marginal> sparse_conditional(const Matrix &x_star, const InducingSet &inducing,
                                         const GaussianDist &q_inducing,
                                         const MeanFn &prior_mean) {
  const Matrix &z = inducing.pseudo_inputs;
  require(z.rows() >= 1, "sparse_conditional: empty inducing set");
  require(x_star.cols() == z.cols(), "sparse_conditional: dimension mismatch");
  require(q_inducing.dim() == z.rows(), "sparse_conditional: q(v) dimension mismatch");

  const Eigen::Index m = z.rows();
  Matrix kzz(m, m);
  Vector mz(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    mz[j] = prior_mean(z.row(j).transpose());
    for (Eigen::Index k = 0; k <= j; ++k) {
      kzz(j, k) = inducing.kernel(z.row(j).transpose(), z.row(k).transpose());
      kzz(k, j) = kzz(j, k);
    }
  }
  const CholeskyFactor lz = robust_cholesky(kzz);
  const Vector alpha = lz.solve(Vector(q_inducing.mean() - mz));
  // K^{-1} (K - S) K^{-1}
  const Matrix middle = lz.solve(Matrix(lz.solve(Matrix(kzz - q_inducing.covariance())).transpose()));

  std::vector<Marginal> out(static_cast<std::size_t>(x_star.rows()));
  for (Eigen::Index i = 0; i < x_star.rows(); ++i) {
    const Vector x = x_star.row(i).transpose();
    Vector kx(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      kx[j] = inducing.kernel(x, z.row(j).transpose());
    }
    Marginal &mi = out[static_cast<std::size_t>(i)];
    mi.mean = prior_mean(x) + kx.dot(alpha);
    mi.variance = std::max(inducing.kernel(x, x) - kx.dot(middle * kx), 0.0);
  }
  return out;
}

Vector standard_normals(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z[i] = normal(rng);
  }
  return z;
}

Vector sample_mvn(const Vector &mean, const Matrix &covariance, const Vector &standard_normals) {
  require(mean.size() == covariance.rows() && mean.size() == standard_normals.size(),
          "sample_mvn: shape mismatch");
  const double scale = covariance.diagonal().cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    return mean;
  }
  // jitter is applied relative to the covariance scale
  const CholeskyFactor l = robust_cholesky(covariance / scale);
  const Vector z = l.lower.triangularView<Eigen::Lower>() * standard_normals;
  return mean + std::sqrt(scale) * z;
}

Vector sample_gp(const Matrix &points, const KernelFn &kernel, const MeanFn &mean,
                 std::uint64_t seed) {
  require(points.rows() >= 1, "sample_gp: need at least one point");
  const Eigen::Index n = points.rows();
  Matrix k(n, n);
  Vector mu(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mu[i] = mean(points.row(i).transpose());
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = kernel(points.row(i).transpose(), points.row(j).transpose());
      k(j, i) = k(i, j);
    }
  }
  return sample_mvn(mu, k, standard_normals(n, seed));
}

} // namespace thindeep
