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

#include "thindeep/deep_priors.hpp"

#include <filesystem>
#include <fstream>
#include <random>

#include "thindeep/gp_core.hpp"
#include "thindeep/kernels.hpp"

namespace thindeep::priors {

namespace {

/// Column key of the compositional (d-block) draws, distinct from any W
/// column index.
constexpr std::uint32_t kCompositional = 0xFFFFu;

Vector stream_normals(Eigen::Index n, std::uint64_t seed, int layer, int row, std::uint32_t col) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(layer), static_cast<std::uint32_t>(row), col};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return standard_normals(n, (static_cast<std::uint64_t>(words[0]) << 32) | words[1]);
}

Matrix layer_kernel(const Matrix &h, double variance, double lengthscale) {
  return kernels::ard_cross(h, h, variance, Vector::Constant(h.cols(), lengthscale));
}

/// Representation fed to the next kernel: drops the constant column of
/// augmented layers.
Matrix kernel_input(const Matrix &h, bool augmented) {
  return augmented ? Matrix(h.leftCols(h.cols() - 1)) : h;
}

} // namespace

ModelKind parse_model_kind(const std::string &s) {
  if (s == "cdgp") {
    return ModelKind::Cdgp;
  }
  if (s == "tdgp") {
    return ModelKind::Tdgp;
  }
  if (s == "tdgp-augmented") {
    return ModelKind::TdgpAugmented;
  }
  throw ParameterError("unknown prior kind '" + s + "' (cdgp, tdgp, tdgp-augmented)");
}

MeanMode parse_mean_mode(const std::string &s) {
  if (s == "zero") {
    return MeanMode::Zero;
  }
  if (s == "linear-identity") {
    return MeanMode::LinearIdentity;
  }
  throw ParameterError("unknown mean mode '" + s + "' (zero, linear-identity)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::Cdgp:
    return "cdgp";
  case ModelKind::Tdgp:
    return "tdgp";
  case ModelKind::TdgpAugmented:
    return "tdgp-augmented";
  }
  return "?";
}

std::string to_string(MeanMode mode) {
  return mode == MeanMode::Zero ? "zero" : "linear-identity";
}

void DepthConfig::validate(int input_dim) const {
  require(depth >= 1, "DepthConfig: depth must be at least 1");
  require(input_dim >= 1, "DepthConfig: grid must have at least one column");
  require(widths.empty() || static_cast<int>(widths.size()) == depth - 1,
          "DepthConfig: need one width per hidden layer");
  for (int w : widths) {
    require(w >= 1, "DepthConfig: widths must be positive");
  }
  require(variances.empty() || static_cast<int>(variances.size()) == depth,
          "DepthConfig: need one variance per layer");
  require(lengthscales.empty() || static_cast<int>(lengthscales.size()) == depth,
          "DepthConfig: need one lengthscale per layer");
  require(w_block_variances.empty() || static_cast<int>(w_block_variances.size()) == depth - 1,
          "DepthConfig: need one W-block variance per hidden layer");
  for (double v : variances) {
    require(v >= 0, "DepthConfig: variances must be non-negative");
  }
  for (double v : w_block_variances) {
    require(v >= 0, "DepthConfig: W-block variances must be non-negative");
  }
  for (double l : lengthscales) {
    require(l > 0, "DepthConfig: lengthscales must be positive");
  }
}

int DepthConfig::width(int layer, int input_dim) const {
  if (layer == 0 || widths.empty()) {
    return input_dim;
  }
  return widths[static_cast<std::size_t>(layer - 1)];
}

double DepthConfig::variance(int layer) const {
  return variances.empty() ? 1.0 : variances[static_cast<std::size_t>(layer - 1)];
}

double DepthConfig::lengthscale(int layer) const {
  return lengthscales.empty() ? 1.0 : lengthscales[static_cast<std::size_t>(layer - 1)];
}

double DepthConfig::w_block_variance(int layer) const {
  return w_block_variances.empty() ? variance(layer)
                                   : w_block_variances[static_cast<std::size_t>(layer - 1)];
}

Vector augmented_layer(const Matrix &w_block, const Vector &d_block, const Vector &x) {
  require(w_block.cols() == x.size() && w_block.rows() == d_block.size(),
          "augmented_layer: shape mismatch");
  return w_block * x + d_block;
}

PriorSampleGrid sample_prior(const DepthConfig &cfg, const Matrix &grid, std::uint64_t seed) {
  const int dim = static_cast<int>(grid.cols());
  cfg.validate(dim);
  require(grid.rows() >= 1 && grid.rows() <= 512, "sample_prior: grid must have 1..512 rows");
  require(grid.allFinite(), "sample_prior: grid must be finite");
  const Eigen::Index g = grid.rows();
  const bool augmented = cfg.kind == ModelKind::TdgpAugmented;
  const bool identity = cfg.mean_mode == MeanMode::LinearIdentity;

  PriorSampleGrid out;
  out.grid = grid;
  out.layers.push_back(grid);

  for (int layer = 1; layer < cfg.depth; ++layer) {
    const Matrix hin = kernel_input(out.layers.back(), augmented && layer > 1);
    const int width = cfg.width(layer, dim);
    const Matrix k = layer_kernel(hin, cfg.variance(layer), cfg.lengthscale(layer));
    out.covariances.push_back(k);
    Matrix h(g, width + (augmented ? 1 : 0));

    if (cfg.kind == ModelKind::Cdgp || augmented) {
      // h_q = d_q(h^{l-1}), identity mean takes the matching input column
      for (int q = 0; q < width; ++q) {
        Vector mean = Vector::Zero(g);
        if (identity && q < hin.cols()) {
          mean = hin.col(q);
        }
        h.col(q) = sample_mvn(mean, k, stream_normals(g, seed, layer, q, kCompositional));
      }
    } else {
      h.leftCols(width).setZero();
    }

    if (cfg.kind == ModelKind::Tdgp || augmented) {
      const Matrix kw =
          augmented ? layer_kernel(hin, cfg.w_block_variance(layer), cfg.lengthscale(layer)) : k;
      for (int q = 0; q < width; ++q) {
        for (int d = 0; d < dim; ++d) {
          Vector mean = Vector::Zero(g);
          if (identity && !augmented && q == d) {
            mean.setOnes();
          }
          const Vector w =
              sample_mvn(mean, kw, stream_normals(g, seed, layer, q, static_cast<std::uint32_t>(d)));
          h.col(q) += w.cwiseProduct(grid.col(d));
        }
      }
    }
    if (augmented) {
      h.col(width).setOnes();
    }
    out.layers.push_back(std::move(h));
  }

  const Matrix hin = kernel_input(out.layers.back(), augmented && cfg.depth > 1);
  const Matrix k = layer_kernel(hin, cfg.variance(cfg.depth), cfg.lengthscale(cfg.depth));
  out.covariances.push_back(k);
  out.f = sample_mvn(Vector::Zero(g), k, stream_normals(g, seed, cfg.depth, 0, kCompositional));
  return out;
}

double mean_abs_offdiag_correlation(const Matrix &k) {
  const Eigen::Index n = k.rows();
  if (n < 2) {
    return 0.0;
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) {
        const double denom = std::sqrt(k(i, i) * k(j, j));
        total += denom > 0 ? std::abs(k(i, j)) / denom : 0.0;
      }
    }
  }
  return total / static_cast<double>(n * (n - 1));
}

double sample_std(const Vector &v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

SaturationStats saturation_stats(const DepthConfig &cfg, const Matrix &grid,
                                 const std::vector<std::uint64_t> &seeds) {
  require(seeds.size() >= 30, "saturation_stats: need at least 30 seeds");
  const auto n = static_cast<double>(seeds.size());
  Matrix values(static_cast<Eigen::Index>(seeds.size()), cfg.depth);
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const PriorSampleGrid sample = sample_prior(cfg, grid, seeds[s]);
    for (int l = 0; l < cfg.depth; ++l) {
      values(static_cast<Eigen::Index>(s), l) =
          mean_abs_offdiag_correlation(sample.covariances[static_cast<std::size_t>(l)]);
    }
  }
  SaturationStats out;
  out.mean = values.colwise().mean().transpose();
  out.standard_error.resize(cfg.depth);
  for (int l = 0; l < cfg.depth; ++l) {
    out.standard_error[l] = sample_std(values.col(l)) / std::sqrt(n);
  }
  return out;
}

Matrix linspace_grid(double lo, double hi, int n) {
  require(n >= 1, "linspace_grid: need at least one point");
  return Vector::LinSpaced(n, lo, hi);
}

namespace {

void write_matrix(const std::filesystem::path &path, const std::vector<std::string> &header,
                  const Matrix &m) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot write " + path.string());
  }
  os.precision(17);
  for (std::size_t j = 0; j < header.size(); ++j) {
    os << (j ? "," : "") << header[j];
  }
  os << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << (j ? "," : "") << m(i, j);
    }
    os << '\n';
  }
}

} // namespace

void write_csv(const PriorSampleGrid &sample, const std::string &dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  std::vector<std::string> header;
  Eigen::Index cols = 0;
  for (std::size_t l = 0; l < sample.layers.size(); ++l) {
    for (Eigen::Index q = 0; q < sample.layers[l].cols(); ++q) {
      header.push_back("h" + std::to_string(l) + "_" + std::to_string(q));
    }
    cols += sample.layers[l].cols();
  }
  header.push_back("f");
  Matrix all(sample.grid.rows(), cols + 1);
  Eigen::Index c = 0;
  for (const Matrix &h : sample.layers) {
    all.middleCols(c, h.cols()) = h;
    c += h.cols();
  }
  all.col(c) = sample.f;
  write_matrix(root / "layers.csv", header, all);

  for (std::size_t l = 0; l < sample.covariances.size(); ++l) {
    std::vector<std::string> cheader;
    for (Eigen::Index j = 0; j < sample.covariances[l].cols(); ++j) {
      cheader.push_back("c" + std::to_string(j));
    }
    write_matrix(root / ("cov_" + std::to_string(l + 1) + ".csv"), cheader, sample.covariances[l]);
  }
}

} // namespace thindeep::priors
