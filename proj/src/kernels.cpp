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

#include "thindeep/kernels.hpp"

#include <algorithm>
#include <limits>

namespace thindeep::kernels {

namespace {

void check_dims(const Vector &a, const Vector &b, Eigen::Index d, const char *what) {
  if (a.size() != d || b.size() != d) {
    throw ParameterError(std::string(what) + ": input dimension mismatch");
  }
}

bool is_symmetric(const Matrix &m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <=
                                     tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

} // namespace

double squared_distance(const Vector &u, const Vector &v) {
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double r = u[i] - v[i];
    d2 += r * r;
  }
  return std::max(d2, 0.0);
}

SeParams SeParams::diagonal(double variance, const Vector &delta_diagonal) {
  require(variance > 0, "SeParams: variance must be positive");
  require(delta_diagonal.size() > 0, "SeParams: empty lengthscale");
  if ((delta_diagonal.array() <= 0).any() || !delta_diagonal.allFinite()) {
    throw ParameterError("SeParams: lengthscale matrix is not positive definite");
  }
  SeParams p;
  p.variance_ = variance;
  p.dim_ = static_cast<int>(delta_diagonal.size());
  p.diagonal_ = true;
  p.log_diagonal_ = delta_diagonal.array().log();
  return p;
}

SeParams SeParams::isotropic(double variance, double lengthscale, int dim) {
  return diagonal(variance, Vector::Constant(dim, lengthscale * lengthscale));
}

SeParams SeParams::full(double variance, const Matrix &delta) {
  require(variance > 0, "SeParams: variance must be positive");
  if (!is_symmetric(delta, 1e-12)) {
    throw ParameterError("SeParams: lengthscale matrix is not symmetric");
  }
  Eigen::LLT<Matrix> llt(delta);
  if (llt.info() != Eigen::Success) {
    throw ParameterError("SeParams: lengthscale matrix is not positive definite");
  }
  SeParams p;
  p.variance_ = variance;
  p.dim_ = static_cast<int>(delta.rows());
  p.diagonal_ = false;
  p.chol_ = llt.matrixL();
  return p;
}

Matrix SeParams::lengthscale_matrix() const {
  if (diagonal_) {
    return log_diagonal_.array().exp().matrix().asDiagonal();
  }
  return chol_ * chol_.transpose();
}

double SeParams::quadratic_form(const Vector &r) const {
  if (diagonal_) {
    return (r.array().square() * (-log_diagonal_.array()).exp()).sum();
  }
  const Vector s = chol_.triangularView<Eigen::Lower>().solve(r);
  return s.squaredNorm();
}

double se_kernel(const Vector &a, const Vector &b, const SeParams &p) {
  check_dims(a, b, p.dim(), "se_kernel");
  return p.variance() * std::exp(-0.5 * p.quadratic_form(a - b));
}

LengthscaleField::LengthscaleField(int dim, MatrixField fn) : dim_(dim), fn_(std::move(fn)) {
  require(dim > 0, "LengthscaleField: dimension must be positive");
}

LengthscaleField LengthscaleField::constant(const Matrix &delta) {
  require(delta.rows() == delta.cols(), "LengthscaleField: matrix must be square");
  return {static_cast<int>(delta.rows()), [delta](const Vector &) { return delta; }};
}

LengthscaleField LengthscaleField::grid(const Matrix &points, std::vector<Matrix> matrices) {
  require(points.rows() == static_cast<Eigen::Index>(matrices.size()) && points.rows() > 0,
          "LengthscaleField::grid: one matrix per grid point required");
  const int dim = static_cast<int>(points.cols());
  return {dim, [points, matrices = std::move(matrices)](const Vector &x) {
            Eigen::Index best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < points.rows(); ++i) {
              const double d = squared_distance(points.row(i).transpose(), x);
              if (d < best_d) {
                best_d = d;
                best = i;
              }
            }
            return matrices[static_cast<std::size_t>(best)];
          }};
}

LengthscaleField LengthscaleField::induced_by(int dim, MatrixField w_field) {
  return {dim, [w_field = std::move(w_field)](const Vector &x) {
            const Matrix w = w_field(x);
            const Matrix wtw = w.transpose() * w;
            return Matrix(wtw.completeOrthogonalDecomposition().pseudoInverse());
          }};
}

Matrix LengthscaleField::operator()(const Vector &x) const {
  if (x.size() != dim_) {
    throw ParameterError("LengthscaleField: input dimension mismatch");
  }
  return fn_(x);
}

Deformation Deformation::linear(const Matrix &w) {
  return {static_cast<int>(w.cols()), static_cast<int>(w.rows()),
          [w](const Vector &) { return w; }};
}

Deformation Deformation::locally_linear(int input_dim, int output_dim, MatrixField w_field) {
  require(input_dim > 0 && output_dim > 0, "Deformation: dimensions must be positive");
  return {input_dim, output_dim, std::move(w_field)};
}

Vector Deformation::operator()(const Vector &x) const {
  if (x.size() != input_dim_) {
    throw ParameterError("Deformation: input dimension mismatch");
  }
  const Matrix w = w_field_(x);
  if (w.rows() != output_dim_ || w.cols() != input_dim_) {
    throw ParameterError("Deformation: W(x) has the wrong shape");
  }
  return w * x;
}

double lengthscale_mixture_distance(const Vector &a, const Vector &b,
                                    const LengthscaleField &field) {
  check_dims(a, b, field.dim(), "lengthscale_mixture_kernel");
  const Matrix sum = field(a) + field(b);
  Eigen::LLT<Matrix> llt(sum);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("lengthscale_mixture_kernel: Delta(a) + Delta(b) is singular");
  }
  const Vector r = a - b;
  return 2.0 * r.dot(llt.solve(r));
}

double lengthscale_mixture_kernel(const Vector &a, const Vector &b,
                                  const LengthscaleField &field,
                                  const IsotropicProfile &profile) {
  check_dims(a, b, field.dim(), "lengthscale_mixture_kernel");
  const Matrix da = field(a);
  const Matrix db = field(b);
  Eigen::LLT<Matrix> lla(da);
  Eigen::LLT<Matrix> llb(db);
  if (lla.info() != Eigen::Success || llb.info() != Eigen::Success) {
    throw ParameterError("lengthscale_mixture_kernel: field is not positive definite");
  }
  const Matrix half_sum = 0.5 * (da + db);
  Eigen::LLT<Matrix> lls(half_sum);
  if (lls.info() != Eigen::Success) {
    throw NumericalError("lengthscale_mixture_kernel: Delta(a) + Delta(b) is singular");
  }
  auto logdet = [](const Eigen::LLT<Matrix> &l) {
    return 2.0 * l.matrixL().toDenseMatrix().diagonal().array().log().sum();
  };
  const double log_prefactor = 0.25 * logdet(lla) + 0.25 * logdet(llb) - 0.5 * logdet(lls);
  const Vector r = a - b;
  // 2 r^T (Da + Db)^{-1} r == r^T ((Da + Db)/2)^{-1} r
  const double delta = r.dot(lls.solve(r));
  return std::exp(log_prefactor) * profile(delta);
}

double deformation_distance(const Vector &a, const Vector &b, const Deformation &tau) {
  return std::sqrt(squared_distance(tau(a), tau(b)));
}

double tdgp_kernel(const Vector &a, const Vector &b, const Deformation &w_field,
                   const IsotropicProfile &profile) {
  return profile(squared_distance(w_field(a), w_field(b)));
}

Vector inverse_lengthscale_eigenvalues(const Matrix &w) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(w.transpose() * w, Eigen::EigenvaluesOnly);
  Vector ev = es.eigenvalues().reverse();
  return ev.cwiseMax(0.0);
}

double derivative_variance_1d(KernelKind kind, double x, const ScalarLengthscale &l) {
  const double lx = l.value(x);
  if (!(lx > 0)) {
    throw ParameterError("derivative_variance_1d: lengthscale must be positive");
  }
  switch (kind) {
  case KernelKind::Stationary:
    return 1.0 / (lx * lx);
  case KernelKind::LengthscaleMixture: {
    const double dl = l.derivative(x);
    return (2.0 + dl * dl) / (2.0 * lx * lx);
  }
  case KernelKind::Tdgp: {
    const double num = lx - x * l.derivative(x);
    return num * num / (lx * lx * lx * lx);
  }
  }
  throw ParameterError("derivative_variance_1d: unknown kernel kind");
}

Matrix ard_cross(const Matrix &a, const Matrix &b, double variance, const Vector &lengthscales) {
  require(a.cols() == b.cols() && a.cols() == lengthscales.size(),
          "ard_cross: dimension mismatch");
  const Vector inv = lengthscales.cwiseInverse();
  const Matrix as = a * inv.asDiagonal();
  const Matrix bs = b * inv.asDiagonal();
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double d2 = 0.0;
      for (Eigen::Index d = 0; d < a.cols(); ++d) {
        const double r = as(i, d) - bs(j, d);
        d2 += r * r;
      }
      k(i, j) = variance * std::exp(-0.5 * d2);
    }
  }
  return k;
}

void ard_cross_backward(const Matrix &a, const Matrix &b, const Matrix &k, const Matrix &kbar,
                        const Vector &lengthscales, Matrix *da, Matrix *db, Vector &dl) {
  const Vector inv2 = lengthscales.array().square().inverse();
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      const double coef = kbar(j, i) * k(j, i);
      if (coef == 0.0) {
        continue;
      }
      for (Eigen::Index d = 0; d < a.cols(); ++d) {
        const double diff = a(j, d) - b(i, d);
        const double g = coef * diff * inv2[d];
        if (da != nullptr) {
          (*da)(j, d) -= g;
        }
        if (db != nullptr) {
          (*db)(i, d) += g;
        }
        dl[d] += g * diff / lengthscales[d];
      }
    }
  }
}

} // namespace thindeep::kernels
