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

#ifndef THINDEEP_PARAMS_HPP
#define THINDEEP_PARAMS_HPP

#include <string>
#include <vector>

#include "thindeep/common.hpp"

namespace thindeep {

struct ParamSlot {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
};

/// Flat vector of unconstrained trainable parameters with a name registry.
/// Each model defines its own packing order and transforms.
class ParamVector {
public:
  void append(const std::string &name, const Vector &values);

  Eigen::Index size() const { return values_.size(); }
  Vector &values() { return values_; }
  const Vector &values() const { return values_; }
  const std::vector<ParamSlot> &slots() const { return slots_; }

  bool has(const std::string &name) const;
  const ParamSlot &slot(const std::string &name) const;
  Vector get(const std::string &name) const;

  /// Human-readable label of one flat entry, e.g. "q_chol[12]".
  std::string label(Eigen::Index index) const;

private:
  Vector values_;
  std::vector<ParamSlot> slots_;
};

/// Sequential reader over a ParamVector in packing order.
class ParamReader {
public:
  explicit ParamReader(const ParamVector &p) : p_(p) {}

  Vector next(const std::string &name);

private:
  const ParamVector &p_;
  std::size_t index_ = 0;
};

/// Column-major flatten helpers.
inline Vector flatten(const Matrix &m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unflatten(const Vector &v, Eigen::Index rows, Eigen::Index cols) {
  require(v.size() == rows * cols, "unflatten: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

/// Lower triangle of a square factor, diagonal entries through
/// inverse_softplus.
Vector pack_cholesky(const Matrix &lower);
Matrix unpack_cholesky(const Vector &packed, Eigen::Index n);
/// Gradient w.r.t. the packed representation given d/dL and the packed raw
/// values.
Vector pack_cholesky_gradient(const Matrix &d_lower, const Vector &packed, Eigen::Index n);

} // namespace thindeep

#endif
