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

#ifndef THINDEEP_SERIALIZE_HPP
#define THINDEEP_SERIALIZE_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thindeep/common.hpp"
#include "thindeep/data.hpp"
#include "thindeep/sgp.hpp"
#include "thindeep/tdgp.hpp"

namespace thindeep::io {

inline constexpr const char *kCheckpointFormat = "thindeep-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// A trained model with its q(u), the normalization it was trained under,
/// and the run configuration.
struct Checkpoint {
  std::string model_kind; ///< "tdgp" or "sgp"
  std::optional<tdgp::TdgpModel> tdgp;
  std::optional<sgp::SgpModel> sgp;
  Vector qu_mean;
  Matrix qu_covariance;
  data::Normalization norm;
  std::vector<std::string> feature_names;
  std::string target_name;
  nlohmann::json config;
};

nlohmann::json matrix_to_json(const Matrix &m);
Matrix matrix_from_json(const nlohmann::json &j);
nlohmann::json vector_to_json(const Vector &v);
Vector vector_from_json(const nlohmann::json &j);

nlohmann::json to_json(const tdgp::TdgpModel &m);
tdgp::TdgpModel tdgp_from_json(const nlohmann::json &j);
nlohmann::json to_json(const sgp::SgpModel &m);
sgp::SgpModel sgp_from_json(const nlohmann::json &j);

nlohmann::json to_json(const Checkpoint &c);
/// Throws ParseError on a missing field, wrong format tag, unknown version or
/// inconsistent shape.
Checkpoint checkpoint_from_json(const nlohmann::json &j);

void save_checkpoint(const Checkpoint &c, const std::string &path);
Checkpoint load_checkpoint(const std::string &path);

} // namespace thindeep::io

#endif
