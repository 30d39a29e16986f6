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

#ifndef THINDEEP_DATA_HPP
#define THINDEEP_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "thindeep/common.hpp"

namespace thindeep::data {

struct Normalization {
  Vector x_mean;
  Vector x_std;
  double y_mean = 0.0;
  double y_std = 1.0;

  Matrix apply_x(const Matrix &x) const;
  Vector apply_y(const Vector &y) const;
  Matrix invert_x(const Matrix &x) const;
  Vector invert_y(const Vector &y) const;
};

struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> feature_names;
  std::string target_name = "y";
  /// Per-row fold or split label; empty when unassigned.
  std::vector<int> fold;
  /// Set once normalize() has run.
  bool normalized = false;
  Normalization norm;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
  /// Rows whose label is (or is not) `label`.
  Dataset subset(const std::vector<int> &label, int value, bool equal) const;
  Dataset rows(const std::vector<Eigen::Index> &index) const;
};

/// h(x) = 2 x0 sin(pi x0) + 2 cos(pi x0)
double synthetic_h(double x0);
/// g(z) = sin(z) / z - z^2, with g(0) = 1.
double synthetic_g(double z);

/// x ~ U[-1, 1]^2, y = g(h(x)). The first half of the rows is labelled
/// 0 (train), the rest 1 (validation).
Dataset gen_synthetic(int n, std::uint64_t seed);

/// Numeric CSV with a header row. Every column except `target_column`
/// becomes an input.
Dataset load_csv(const std::string &path, const std::string &target_column);
void write_csv(const Dataset &ds, const std::string &path);

/// All columns of a numeric CSV with a header row, e.g. an export grid.
Matrix load_csv_matrix(const std::string &path);

/// Fits constants on rows where train_mask is true and transforms all rows.
Dataset normalize(const Dataset &ds, const std::vector<bool> &train_mask);
Dataset normalize(const Dataset &ds);
Dataset denormalize(const Dataset &ds);

/// Balanced fold labels 0..k-1, a seeded permutation of the rows.
std::vector<int> kfold(Eigen::Index n, int k, std::uint64_t seed);

} // namespace thindeep::data

#endif
