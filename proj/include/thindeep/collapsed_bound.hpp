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

#ifndef THINDEEP_COLLAPSED_BOUND_HPP
#define THINDEEP_COLLAPSED_BOUND_HPP

#include "thindeep/common.hpp"
#include "thindeep/gp_core.hpp"

namespace thindeep {

/// Collapsed sparse-GP bound with the inducing distribution q(u) optimized
/// out, written in terms of expected kernel statistics:
///
///   F = -(y'y + psi0 - tr(Ku^-1 Psi2)) / (2 s2) - n/2 log(2 pi s2)
///       + y'Psi1 S^-1 Psi1'y / (2 s2) + m/2 log s2 - 1/2 log|S| + 1/2 log|Ku|
///
/// with S = s2 Ku + Psi2 and s2 the noise variance. Deterministic inputs give
/// psi0 = tr Kff, Psi1 = Kfu, Psi2 = Kfu'Kfu.
struct CollapsedBound {
  double value = 0.0;

  // Individual terms; they sum to `value`.
  double data_fit = 0.0;   ///< -y'y/(2 s2) + y'Psi1 S^-1 Psi1'y/(2 s2)
  double trace_term = 0.0; ///< -(psi0 - tr(Ku^-1 Psi2)) / (2 s2)
  double log_det = 0.0;    ///< -1/2 log|S| + 1/2 log|Ku| + m/2 log s2
  double normalizer = 0.0; ///< -n/2 log(2 pi s2)

  /// S^-1 Psi1' y, which is also Ku^-1 E[u] under the optimal q(u).
  Vector alpha;
  Matrix sigma_inv; ///< S^-1
  Matrix kuu_inv;

  // Gradients of `value`, filled when requested. Matrix gradients treat
  // every entry as independent (no symmetrization).
  Matrix d_psi1;
  Matrix d_psi2;
  Matrix d_kuu;
  double d_noise = 0.0;
  double d_psi0 = 0.0;
};

CollapsedBound collapsed_bound(double psi0, const Matrix &psi1, const Matrix &psi2,
                               const Matrix &kuu, double noise_variance, const Vector &y,
                               bool with_gradient);

} // namespace thindeep

#endif
