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

#ifndef THINDEEP_KERNELS_HPP
#define THINDEEP_KERNELS_HPP

#include <functional>
#include <vector>

#include "thindeep/common.hpp"

namespace thindeep::kernels {

/// Squared Euclidean distance, accumulated term by term so that
/// d(u, v) == d(v, u) bitwise. Never negative.
double squared_distance(const Vector &u, const Vector &v);

/// Signal variance plus a lengthscale matrix Delta for the squared
/// exponential kernel. Full matrices are held by their Cholesky factor,
/// diagonal (ARD) ones by the log of the diagonal.
class SeParams {
public:
  /// ARD form: `delta_diagonal` holds the diagonal of Delta, i.e. the squared
  /// lengthscales.
  static SeParams diagonal(double variance, const Vector &delta_diagonal);
  static SeParams isotropic(double variance, double lengthscale, int dim);
  static SeParams full(double variance, const Matrix &delta);

  double variance() const { return variance_; }
  int dim() const { return dim_; }
  bool is_diagonal() const { return diagonal_; }
  Matrix lengthscale_matrix() const;

  /// r^T Delta^{-1} r
  double quadratic_form(const Vector &r) const;

private:
  SeParams() = default;

  double variance_ = 1.0;
  int dim_ = 0;
  bool diagonal_ = true;
  Vector log_diagonal_;
  Matrix chol_;
};

double se_kernel(const Vector &a, const Vector &b, const SeParams &p);

/// pi(d^2) = variance * exp(-d^2 / 2). The only profile with closed-form
/// expectations under Gaussian inputs, hence the only one offered.
struct SquaredExponentialProfile {
  double variance = 1.0;

  double operator()(double d2) const { return variance * std::exp(-0.5 * d2); }
};

using IsotropicProfile = SquaredExponentialProfile;

using MatrixField = std::function<Matrix(const Vector &)>;

/// x -> Delta(x), a D x D symmetric positive-definite lengthscale matrix.
class LengthscaleField {
public:
  LengthscaleField(int dim, MatrixField fn);

  static LengthscaleField constant(const Matrix &delta);

  /// Piecewise-constant field: each query takes the matrix of its nearest
  /// grid point.
  static LengthscaleField grid(const Matrix &points, std::vector<Matrix> matrices);

  /// Field induced by a locally-linear deformation, [W(x)^T W(x)]^+. Uses
  /// the pseudo-inverse since pruned latent rows leave W^T W singular.
  static LengthscaleField induced_by(int dim, MatrixField w_field);

  Matrix operator()(const Vector &x) const;
  int dim() const { return dim_; }

private:
  int dim_;
  MatrixField fn_;
};

/// tau: R^D -> R^Q.
class Deformation {
public:
  static Deformation linear(const Matrix &w);
  /// x -> W(x) x, with W(x) a Q x D matrix.
  static Deformation locally_linear(int input_dim, int output_dim, MatrixField w_field);

  Vector operator()(const Vector &x) const;

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  /// W(x). For the linear case, the constant matrix.
  Matrix local_matrix(const Vector &x) const { return w_field_(x); }

private:
  Deformation(int input_dim, int output_dim, MatrixField w_field)
      : input_dim_(input_dim), output_dim_(output_dim), w_field_(std::move(w_field)) {}

  int input_dim_;
  int output_dim_;
  MatrixField w_field_;
};

/// delta(a, b) = 2 (a-b)^T (Delta(a) + Delta(b))^{-1} (a-b)
double lengthscale_mixture_distance(const Vector &a, const Vector &b,
                                    const LengthscaleField &field);

double lengthscale_mixture_kernel(const Vector &a, const Vector &b,
                                  const LengthscaleField &field,
                                  const IsotropicProfile &profile);

/// || W(a) a - W(b) b ||
double deformation_distance(const Vector &a, const Vector &b, const Deformation &tau);

double tdgp_kernel(const Vector &a, const Vector &b, const Deformation &w_field,
                   const IsotropicProfile &profile);

/// Eigenvalues of W^T W, descending: the local inverse squared lengthscales.
Vector inverse_lengthscale_eigenvalues(const Matrix &w);

enum class KernelKind { Stationary, LengthscaleMixture, Tdgp };

/// A scalar lengthscale function l(x) together with l'(x).
struct ScalarLengthscale {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

/// Var[f'(x)] for a unit-variance SE-based 1D process:
///   stationary:  1 / l^2
///   mixture:     (2 + l'(x)^2) / (2 l(x)^2)
///   tdgp:        (l(x) - x l'(x))^2 / l(x)^4
double derivative_variance_1d(KernelKind kind, double x, const ScalarLengthscale &l);

/// Rows of `points` are inputs. Only the lower triangle is evaluated and then
/// mirrored, so the result is exactly symmetric.
template <class Kernel> Matrix gram(const Matrix &points, Kernel &&kernel) {
  const Eigen::Index n = points.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector a = points.row(i).transpose();
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = kernel(a, Vector(points.row(j).transpose()));
      k(j, i) = k(i, j);
    }
  }
  return k;
}

template <class Kernel>
Matrix cross_gram(const Matrix &a, const Matrix &b, Kernel &&kernel) {
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Vector ai = a.row(i).transpose();
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = kernel(ai, Vector(b.row(j).transpose()));
    }
  }
  return k;
}

/// ARD squared exponential between row sets with per-dimension lengthscales
/// (not squared). The workhorse for the sparse models.
Matrix ard_cross(const Matrix &a, const Matrix &b, double variance, const Vector &lengthscales);

/// Reverse pass of ard_cross: given K = ard_cross(a, b, ...) and its adjoint
/// kbar, accumulates into da, db (either may be null, or both the same matrix
/// when a and b are) and dl, the lengthscale gradient.
void ard_cross_backward(const Matrix &a, const Matrix &b, const Matrix &k, const Matrix &kbar,
                        const Vector &lengthscales, Matrix *da, Matrix *db, Vector &dl);

} // namespace thindeep::kernels

#endif
