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

#include "thindeep/collapsed_bound.hpp"

namespace thindeep {

CollapsedBound collapsed_bound(double psi0, const Matrix &psi1, const Matrix &psi2,
                               const Matrix &kuu, double noise_variance, const Vector &y,
                               bool with_gradient) {
  const Eigen::Index n = psi1.rows();
  const Eigen::Index m = psi1.cols();
  require(y.size() == n, "collapsed_bound: y length mismatch");
  require(psi2.rows() == m && psi2.cols() == m && kuu.rows() == m && kuu.cols() == m,
          "collapsed_bound: shape mismatch");
  require(noise_variance > 0, "collapsed_bound: noise variance must be positive");
  const double s2 = noise_variance;

  const CholeskyFactor lk = robust_cholesky(kuu);
  // A = Lk^-1 Psi2 Lk^-T, S = Lk (s2 I + A) Lk^T
  const Matrix half = lk.half_solve(psi2);
  Matrix a = lk.half_solve(Matrix(half.transpose()));
  a = 0.5 * (a + a.transpose());
  Matrix b = a;
  b.diagonal().array() += s2;
  const CholeskyFactor lb = robust_cholesky(b);

  const Vector py = psi1.transpose() * y;
  const Vector c = lb.half_solve(Matrix(lk.half_solve(Matrix(py))));
  const double yy = y.squaredNorm();
  const double tr_a = a.trace();

  CollapsedBound out;
  out.data_fit = -yy / (2 * s2) + c.squaredNorm() / (2 * s2);
  out.trace_term = -(psi0 - tr_a) / (2 * s2);
  out.log_det = -0.5 * lb.log_det() + 0.5 * static_cast<double>(m) * std::log(s2);
  out.normalizer = -0.5 * static_cast<double>(n) * (kLog2Pi + std::log(s2));
  out.value = out.data_fit + out.trace_term + out.log_det + out.normalizer;

  const Matrix lk_inv = lk.half_solve(Matrix(Matrix::Identity(m, m)));
  out.kuu_inv = lk_inv.transpose() * lk_inv;
  const Matrix lb_inv_lk_inv = lb.half_solve(lk_inv);
  out.sigma_inv = lb_inv_lk_inv.transpose() * lb_inv_lk_inv;
  out.alpha = lb_inv_lk_inv.transpose() * c;

  if (!with_gradient) {
    return out;
  }

  const Matrix g_sigma =
      -out.alpha * out.alpha.transpose() / (2 * s2) - 0.5 * out.sigma_inv;
  out.d_psi1 = y * out.alpha.transpose() / s2;
  out.d_psi2 = out.kuu_inv / (2 * s2) + g_sigma;
  out.d_kuu = -out.kuu_inv * psi2 * out.kuu_inv / (2 * s2) + s2 * g_sigma + 0.5 * out.kuu_inv;
  out.d_noise = (yy + psi0 - tr_a) / (2 * s2 * s2) - static_cast<double>(n) / (2 * s2) -
                c.squaredNorm() / (2 * s2 * s2) + static_cast<double>(m) / (2 * s2) +
                (g_sigma.cwiseProduct(kuu)).sum();
  out.d_psi0 = -1.0 / (2 * s2);
  return out;
}

} // namespace thindeep
