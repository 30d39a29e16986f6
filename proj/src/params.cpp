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

#include "thindeep/params.hpp"

namespace thindeep {

void ParamVector::append(const std::string &name, const Vector &values) {
  require(!has(name), "ParamVector: duplicate slot " + name);
  ParamSlot slot{name, values_.size(), values.size()};
  Vector grown(values_.size() + values.size());
  grown << values_, values;
  values_ = std::move(grown);
  slots_.push_back(std::move(slot));
}

bool ParamVector::has(const std::string &name) const {
  for (const auto &s : slots_) {
    if (s.name == name) {
      return true;
    }
  }
  return false;
}

const ParamSlot &ParamVector::slot(const std::string &name) const {
  for (const auto &s : slots_) {
    if (s.name == name) {
      return s;
    }
  }
  throw ParameterError("ParamVector: unknown slot " + name);
}

Vector ParamVector::get(const std::string &name) const {
  const auto &s = slot(name);
  return values_.segment(s.offset, s.size);
}

std::string ParamVector::label(Eigen::Index index) const {
  for (const auto &s : slots_) {
    if (index >= s.offset && index < s.offset + s.size) {
      return s.name + "[" + std::to_string(index - s.offset) + "]";
    }
  }
  return "?[" + std::to_string(index) + "]";
}

Vector ParamReader::next(const std::string &name) {
  require(index_ < p_.slots().size(), "ParamReader: ran past the end");
  const auto &s = p_.slots()[index_++];
  require(s.name == name, "ParamReader: expected slot " + name + ", found " + s.name);
  return p_.values().segment(s.offset, s.size);
}

Vector pack_cholesky(const Matrix &lower) {
  const Eigen::Index n = lower.rows();
  Vector out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    out[k++] = inverse_softplus(lower(j, j));
    for (Eigen::Index i = j + 1; i < n; ++i) {
      out[k++] = lower(i, j);
    }
  }
  return out;
}

Matrix unpack_cholesky(const Vector &packed, Eigen::Index n) {
  require(packed.size() == n * (n + 1) / 2, "unpack_cholesky: size mismatch");
  Matrix lower = Matrix::Zero(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    lower(j, j) = softplus(packed[k++]);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      lower(i, j) = packed[k++];
    }
  }
  return lower;
}

Vector pack_cholesky_gradient(const Matrix &d_lower, const Vector &packed, Eigen::Index n) {
  Vector out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    out[k] = d_lower(j, j) * sigmoid(packed[k]);
    ++k;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      out[k++] = d_lower(i, j);
    }
  }
  return out;
}

} // namespace thindeep
