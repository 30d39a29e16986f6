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

#ifndef THINDEEP_TOOLS_COMMANDS_HPP
#define THINDEEP_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "thindeep/data.hpp"
#include "thindeep/metrics.hpp"
#include "thindeep/serialize.hpp"
#include "thindeep/train.hpp"

namespace thindeep::cli {

/// Everything a run depends on. Written verbatim to <out>/config.json so the
/// run can be replayed from that file alone.
struct RunConfig {
  std::string command;
  std::string out = "out";
  std::uint64_t seed = 0;

  // data
  std::string data;
  std::string target_col = "y";
  int n = 200;

  // model
  std::string model = "tdgp";
  int latent_dim = 0; ///< 0 means Q = D
  int inducing_out = 50;
  int inducing_hidden = 25;
  bool augment_bias = false;

  // schedule
  int epochs[3] = {500, 1500, 5000};
  double lr[3] = {0.1, 0.01, 0.001};

  // eval / cv
  std::string checkpoint;
  std::string mrae_mode = "per-point";
  int folds = 10;
  int jobs = 1;

  // sample-prior / export
  std::string kind = "tdgp";
  std::string mean_mode = "zero";
  int depth = 5;
  std::string grid; ///< CSV of raw inputs; empty means a regular grid
  int grid_points = 101;
  double grid_lo = -5.0;
  double grid_hi = 5.0;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json &j);
  void validate() const;
  train::Schedule schedule() const;
};

struct FitOutcome {
  io::Checkpoint checkpoint;
  train::LossTrace trace;
};

/// Normalizes `raw` on all of its rows, initializes and trains the model
/// named by cfg.model, and packages it with its optimal q(u).
FitOutcome fit_model(const RunConfig &cfg, const data::Dataset &raw, std::uint64_t seed);

/// Predicts on raw (unnormalized) rows with the checkpoint's normalization;
/// metrics are on the normalized target scale.
metrics::FoldResult evaluate(const io::Checkpoint &ckpt, const data::Dataset &raw,
                             metrics::MraeMode mode);

void cmd_gen(const RunConfig &cfg);
void cmd_fit(const RunConfig &cfg);
metrics::EvalReport cmd_eval(const RunConfig &cfg);
metrics::EvalReport cmd_cv(const RunConfig &cfg);
void cmd_sample_prior(const RunConfig &cfg);
void cmd_export(const RunConfig &cfg);

/// Validates, snapshots the config, dispatches on cfg.command. On failure a
/// FAILED marker with the message is left in the output directory and a
/// non-zero code returned.
int run(const RunConfig &cfg);

} // namespace thindeep::cli

#endif
