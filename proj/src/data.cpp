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

#include "thindeep/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace thindeep::data {

Matrix Normalization::apply_x(const Matrix &x) const {
  require(x.cols() == x_mean.size(), "Normalization: input dimension mismatch");
  return (x.rowwise() - x_mean.transpose()).array().rowwise() / x_std.transpose().array();
}

Vector Normalization::apply_y(const Vector &y) const {
  return (y.array() - y_mean) / y_std;
}

Matrix Normalization::invert_x(const Matrix &x) const {
  require(x.cols() == x_mean.size(), "Normalization: input dimension mismatch");
  return (x.array().rowwise() * x_std.transpose().array()).matrix().rowwise() +
         x_mean.transpose();
}

Vector Normalization::invert_y(const Vector &y) const {
  return (y.array() * y_std + y_mean).matrix();
}

Dataset Dataset::rows(const std::vector<Eigen::Index> &index) const {
  Dataset out = *this;
  out.x.resize(static_cast<Eigen::Index>(index.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(index.size()));
  out.fold.clear();
  for (std::size_t r = 0; r < index.size(); ++r) {
    const Eigen::Index i = index[r];
    require(i >= 0 && i < x.rows(), "Dataset::rows: index out of range");
    out.x.row(static_cast<Eigen::Index>(r)) = x.row(i);
    out.y[static_cast<Eigen::Index>(r)] = y[i];
    if (!fold.empty()) {
      out.fold.push_back(fold[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

Dataset Dataset::subset(const std::vector<int> &label, int value, bool equal) const {
  require(static_cast<Eigen::Index>(label.size()) == x.rows(), "Dataset::subset: label size");
  std::vector<Eigen::Index> index;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if ((label[i] == value) == equal) {
      index.push_back(static_cast<Eigen::Index>(i));
    }
  }
  return rows(index);
}

double synthetic_h(double x0) {
  const double pi = std::numbers::pi;
  return 2.0 * x0 * std::sin(x0 * pi) + 2.0 * std::cos(x0 * pi);
}

double synthetic_g(double z) {
  const double sinc = std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z;
  return sinc - z * z;
}

Dataset gen_synthetic(int n, std::uint64_t seed) {
  require(n >= 2, "gen_synthetic: need n >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dataset ds;
  ds.x.resize(n, 2);
  ds.y.resize(n);
  ds.feature_names = {"x0", "x1"};
  ds.target_name = "y";
  for (int i = 0; i < n; ++i) {
    ds.x(i, 0) = u(rng);
    ds.x(i, 1) = u(rng);
    ds.y[i] = synthetic_g(synthetic_h(ds.x(i, 0)));
    ds.fold.push_back(i < n / 2 ? 0 : 1);
  }
  return ds;
}

namespace {

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

} // namespace

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string &path) {
  std::ifstream is(path);
  if (!is) {
    throw ParseError(path + ": cannot open");
  }
  std::string line;
  if (!std::getline(is, line)) {
    throw ParseError(path + ":1: missing header row");
  }
  Table t;
  t.header = split_line(line);
  for (auto &h : t.header) {
    h = trim(h);
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      char *end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE ||
          !std::isfinite(v)) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": column '" + t.header[c] +
                         "' is not a finite number: '" + cell + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) {
    throw ParseError(path + ": no data rows");
  }
  return t;
}

} // namespace

Dataset load_csv(const std::string &path, const std::string &target_column) {
  const Table t = read_table(path);
  const auto target_it = std::find(t.header.begin(), t.header.end(), target_column);
  if (target_it == t.header.end()) {
    throw ParseError(path + ":1: no column named '" + target_column + "'");
  }
  if (t.header.size() < 2) {
    throw ParseError(path + ":1: need at least one input column besides the target");
  }
  const auto target = static_cast<std::size_t>(target_it - t.header.begin());

  Dataset ds;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  const auto d = static_cast<Eigen::Index>(t.header.size() - 1);
  ds.x.resize(n, d);
  ds.y.resize(n);
  ds.target_name = target_column;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c != target) {
      ds.feature_names.push_back(t.header[c]);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &row = t.rows[static_cast<std::size_t>(i)];
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == target) {
        ds.y[i] = row[c];
      } else {
        ds.x(i, col++) = row[c];
      }
    }
  }
  return ds;
}

Matrix load_csv_matrix(const std::string &path) {
  const Table t = read_table(path);
  Matrix out(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

void write_csv(const Dataset &ds, const std::string &path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot write " + path);
  }
  os.precision(17);
  for (const auto &name : ds.feature_names) {
    os << name << ',';
  }
  os << ds.target_name << '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.dim(); ++j) {
      os << ds.x(i, j) << ',';
    }
    os << ds.y[i] << '\n';
  }
}

Dataset normalize(const Dataset &ds, const std::vector<bool> &train_mask) {
  require(!ds.normalized, "normalize: dataset is already normalized");
  require(static_cast<Eigen::Index>(train_mask.size()) == ds.size(),
          "normalize: mask length must equal the row count");
  std::vector<Eigen::Index> train;
  for (std::size_t i = 0; i < train_mask.size(); ++i) {
    if (train_mask[i]) {
      train.push_back(static_cast<Eigen::Index>(i));
    }
  }
  require(train.size() >= 2, "normalize: need at least two training rows");
  const Dataset fit = ds.rows(train);
  const double m = static_cast<double>(fit.size());

  Normalization norm;
  norm.x_mean = fit.x.colwise().mean().transpose();
  norm.x_std.resize(ds.dim());
  for (Eigen::Index j = 0; j < ds.dim(); ++j) {
    const double var = (fit.x.col(j).array() - norm.x_mean[j]).square().sum() / m;
    norm.x_std[j] = std::sqrt(var);
    const std::string name =
        j < static_cast<Eigen::Index>(ds.feature_names.size()) ? ds.feature_names[j]
                                                               : "column " + std::to_string(j);
    require(norm.x_std[j] >= 1e-12, "normalize: column '" + name + "' has zero std");
  }
  norm.y_mean = fit.y.mean();
  norm.y_std = std::sqrt((fit.y.array() - norm.y_mean).square().sum() / m);
  require(norm.y_std >= 1e-12, "normalize: target '" + ds.target_name + "' has zero std");

  Dataset out = ds;
  out.x = norm.apply_x(ds.x);
  out.y = norm.apply_y(ds.y);
  out.norm = norm;
  out.normalized = true;
  return out;
}

Dataset normalize(const Dataset &ds) {
  return normalize(ds, std::vector<bool>(static_cast<std::size_t>(ds.size()), true));
}

Dataset denormalize(const Dataset &ds) {
  require(ds.normalized, "denormalize: dataset is not normalized");
  Dataset out = ds;
  out.x = ds.norm.invert_x(ds.x);
  out.y = ds.norm.invert_y(ds.y);
  out.normalized = false;
  out.norm = Normalization{};
  return out;
}

std::vector<int> kfold(Eigen::Index n, int k, std::uint64_t seed) {
  require(k >= 2, "kfold: need k >= 2");
  require(n >= k, "kfold: need at least k rows");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < order.size(); ++r) {
    fold[static_cast<std::size_t>(order[r])] = static_cast<int>(r % static_cast<std::size_t>(k));
  }
  return fold;
}

} // namespace thindeep::data
