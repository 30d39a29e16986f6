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

#include "thindeep/serialize.hpp"

#include <fstream>

namespace thindeep::io {

using nlohmann::json;

namespace {

const json &field(const json &j, const char *name) {
  if (!j.is_object() || !j.contains(name)) {
    throw ParseError(std::string("checkpoint: missing field '") + name + "'");
  }
  return j.at(name);
}

} // namespace

json matrix_to_json(const Matrix &m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from_json(const json &j) {
  try {
    const auto rows = field(j, "rows").get<Eigen::Index>();
    const auto cols = field(j, "cols").get<Eigen::Index>();
    const json &data = field(j, "data");
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows) {
      throw ParseError("checkpoint: matrix row count does not match its shape");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const json &row = data[static_cast<std::size_t>(i)];
      if (static_cast<Eigen::Index>(row.size()) != cols) {
        throw ParseError("checkpoint: matrix column count does not match its shape");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
    return m;
  } catch (const json::exception &e) {
    throw ParseError(std::string("checkpoint: bad matrix: ") + e.what());
  }
}

json vector_to_json(const Vector &v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const json &j) {
  try {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  } catch (const json::exception &e) {
    throw ParseError(std::string("checkpoint: bad vector: ") + e.what());
  }
}

json to_json(const tdgp::TdgpModel &m) {
  json qm = json::array();
  json qc = json::array();
  for (int q = 0; q < m.latent_dim; ++q) {
    qm.push_back(matrix_to_json(m.q_mean[static_cast<std::size_t>(q)]));
    qc.push_back(matrix_to_json(m.q_chol[static_cast<std::size_t>(q)]));
  }
  return {{"input_dim", m.input_dim},
          {"latent_dim", m.latent_dim},
          {"augment_bias", m.augment_bias},
          {"output_variance", m.output_variance},
          {"hidden_variances", vector_to_json(m.hidden_variances)},
          {"lengthscales", vector_to_json(m.lengthscales)},
          {"prior_mean", matrix_to_json(m.prior_mean)},
          {"noise_variance", m.noise_variance},
          {"inducing_out", matrix_to_json(m.inducing_out)},
          {"inducing_hidden", matrix_to_json(m.inducing_hidden)},
          {"q_mean", qm},
          {"q_chol", qc},
          {"jitter", m.jitter}};
}

tdgp::TdgpModel tdgp_from_json(const json &j) {
  tdgp::TdgpModel m;
  try {
    m.input_dim = field(j, "input_dim").get<int>();
    m.latent_dim = field(j, "latent_dim").get<int>();
    m.augment_bias = field(j, "augment_bias").get<bool>();
    m.output_variance = field(j, "output_variance").get<double>();
    m.hidden_variances = vector_from_json(field(j, "hidden_variances"));
    m.lengthscales = vector_from_json(field(j, "lengthscales"));
    m.prior_mean = matrix_from_json(field(j, "prior_mean"));
    m.noise_variance = field(j, "noise_variance").get<double>();
    m.inducing_out = matrix_from_json(field(j, "inducing_out"));
    m.inducing_hidden = matrix_from_json(field(j, "inducing_hidden"));
    for (const json &e : field(j, "q_mean")) {
      m.q_mean.push_back(matrix_from_json(e));
    }
    for (const json &e : field(j, "q_chol")) {
      m.q_chol.push_back(matrix_from_json(e));
    }
    m.jitter = field(j, "jitter").get<double>();
  } catch (const json::exception &e) {
    throw ParseError(std::string("checkpoint: bad tdgp model: ") + e.what());
  }
  try {
    m.validate();
  } catch (const ParameterError &e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  return m;
}

json to_json(const sgp::SgpModel &m) {
  return {{"input_dim", m.input_dim},
          {"variance", m.variance},
          {"lengthscales", vector_to_json(m.lengthscales)},
          {"noise_variance", m.noise_variance},
          {"inducing", matrix_to_json(m.inducing)},
          {"jitter", m.jitter}};
}

sgp::SgpModel sgp_from_json(const json &j) {
  sgp::SgpModel m;
  try {
    m.input_dim = field(j, "input_dim").get<int>();
    m.variance = field(j, "variance").get<double>();
    m.lengthscales = vector_from_json(field(j, "lengthscales"));
    m.noise_variance = field(j, "noise_variance").get<double>();
    m.inducing = matrix_from_json(field(j, "inducing"));
    m.jitter = field(j, "jitter").get<double>();
  } catch (const json::exception &e) {
    throw ParseError(std::string("checkpoint: bad sgp model: ") + e.what());
  }
  try {
    m.validate();
  } catch (const ParameterError &e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  return m;
}

json to_json(const Checkpoint &c) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["model_kind"] = c.model_kind;
  if (c.model_kind == "tdgp") {
    require(c.tdgp.has_value(), "checkpoint: tdgp model missing");
    j["model"] = to_json(*c.tdgp);
  } else if (c.model_kind == "sgp") {
    require(c.sgp.has_value(), "checkpoint: sgp model missing");
    j["model"] = to_json(*c.sgp);
  } else {
    throw ParameterError("checkpoint: unknown model kind '" + c.model_kind + "'");
  }
  j["q_u"] = {{"mean", vector_to_json(c.qu_mean)},
              {"covariance", matrix_to_json(c.qu_covariance)}};
  j["normalization"] = {{"x_mean", vector_to_json(c.norm.x_mean)},
                        {"x_std", vector_to_json(c.norm.x_std)},
                        {"y_mean", c.norm.y_mean},
                        {"y_std", c.norm.y_std}};
  j["feature_names"] = c.feature_names;
  j["target_name"] = c.target_name;
  j["config"] = c.config;
  return j;
}

Checkpoint checkpoint_from_json(const json &j) {
  if (field(j, "format") != kCheckpointFormat) {
    throw ParseError("checkpoint: unexpected format tag");
  }
  if (field(j, "version") != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + field(j, "version").dump());
  }
  Checkpoint c;
  try {
    c.model_kind = field(j, "model_kind").get<std::string>();
    if (c.model_kind == "tdgp") {
      c.tdgp = tdgp_from_json(field(j, "model"));
    } else if (c.model_kind == "sgp") {
      c.sgp = sgp_from_json(field(j, "model"));
    } else {
      throw ParseError("checkpoint: unknown model kind '" + c.model_kind + "'");
    }
    const json &qu = field(j, "q_u");
    c.qu_mean = vector_from_json(field(qu, "mean"));
    c.qu_covariance = matrix_from_json(field(qu, "covariance"));
    const json &norm = field(j, "normalization");
    c.norm.x_mean = vector_from_json(field(norm, "x_mean"));
    c.norm.x_std = vector_from_json(field(norm, "x_std"));
    c.norm.y_mean = field(norm, "y_mean").get<double>();
    c.norm.y_std = field(norm, "y_std").get<double>();
    c.feature_names = field(j, "feature_names").get<std::vector<std::string>>();
    c.target_name = field(j, "target_name").get<std::string>();
    c.config = j.value("config", json::object());
  } catch (const json::exception &e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  const Eigen::Index m = c.model_kind == "tdgp" ? c.tdgp->num_inducing_out()
                                                : c.sgp->num_inducing();
  if (c.qu_mean.size() != m || c.qu_covariance.rows() != m || c.qu_covariance.cols() != m) {
    throw ParseError("checkpoint: q(u) shape does not match the inducing set");
  }
  return c;
}

void save_checkpoint(const Checkpoint &c, const std::string &path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot write " + path);
  }
  os << to_json(c).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::string &path) {
  std::ifstream is(path);
  if (!is) {
    throw ParseError(path + ": cannot open");
  }
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception &e) {
    throw ParseError(path + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

} // namespace thindeep::io
