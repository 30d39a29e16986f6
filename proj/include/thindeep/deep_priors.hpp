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

#ifndef THINDEEP_DEEP_PRIORS_HPP
#define THINDEEP_DEEP_PRIORS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "thindeep/common.hpp"

namespace thindeep::priors {

enum class ModelKind { Cdgp, Tdgp, TdgpAugmented };
enum class MeanMode { Zero, LinearIdentity };

ModelKind parse_model_kind(const std::string &s);
MeanMode parse_mean_mode(const std::string &s);
std::string to_string(ModelKind kind);
std::string to_string(MeanMode mode);

/// Depth L counts every GP layer including the output f, so L = 1 is a
/// shallow GP and layers 1..L-1 produce hidden representations.
struct DepthConfig {
  int depth = 1;
  ModelKind kind = ModelKind::Cdgp;
  MeanMode mean_mode = MeanMode::Zero;
  /// Width of each hidden representation h^1..h^{L-1}; empty means every
  /// width equals the input dimension.
  std::vector<int> widths;
  /// Per-layer SE variance and lengthscale, layers 1..L. Empty means 1.
  std::vector<double> variances;
  std::vector<double> lengthscales;
  /// Augmented mode only: kernel variance of the W block per hidden layer.
  /// Empty means the layer variance.
  std::vector<double> w_block_variances;

  void validate(int input_dim) const;
  int width(int layer, int input_dim) const; ///< layer 0 is the input
  double variance(int layer) const;
  double lengthscale(int layer) const;
  double w_block_variance(int layer) const;
};

struct PriorSampleGrid {
  Matrix grid;
  /// h^0 .. h^{L-1}; h^0 is the grid. Augmented layers carry a trailing
  /// constant-1 column.
  std::vector<Matrix> layers;
  Vector f;
  /// Kernel matrix of layer l = 1..L on h^{l-1}; the last one is the
  /// covariance of f.
  std::vector<Matrix> covariances;
};

/// Deterministic per seed. Every GP draw owns a normal stream keyed by
/// (seed, layer, row, column), and the compositional draws of the augmented
/// kind share their keys with the matching CDGP draws.
PriorSampleGrid sample_prior(const DepthConfig &cfg, const Matrix &grid, std::uint64_t seed);

/// W x + d; the augmented layer with bottom row [0 ... 0 1] dropped.
Vector augmented_layer(const Matrix &w_block, const Vector &d_block, const Vector &x);

struct SaturationStats {
  Vector mean;           ///< per depth 1..L
  Vector standard_error; ///< per depth 1..L
};

/// Mean |off-diagonal correlation| of the depth-l output kernel, averaged
/// over seeds, for l = 1..cfg.depth.
SaturationStats saturation_stats(const DepthConfig &cfg, const Matrix &grid,
                                 const std::vector<std::uint64_t> &seeds);

/// Mean absolute off-diagonal correlation of one kernel matrix.
double mean_abs_offdiag_correlation(const Matrix &k);

double sample_std(const Vector &v);

/// Flat files for external plotting in `dir`: layers.csv (every layer
/// h0_*, h1_*, ... followed by f) and cov_<l>.csv per layer.
void write_csv(const PriorSampleGrid &sample, const std::string &dir);

/// Evenly spaced 1D grid as an n x 1 matrix.
Matrix linspace_grid(double lo, double hi, int n);

} // namespace thindeep::priors

#endif
