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

// thindeep: generate data, fit, evaluate, cross-validate, sample deep priors
// and export interpretability artifacts.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

using thindeep::cli::RunConfig;

void set_log_level() {
  const char *env = std::getenv("THINDEEP_LOG");
  spdlog::set_level(env != nullptr ? spdlog::level::from_str(env) : spdlog::level::info);
}

void add_out_seed(CLI::App *sub, RunConfig &cfg) {
  sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
}

void add_data(CLI::App *sub, RunConfig &cfg) {
  sub->add_option("--data", cfg.data, "CSV with a header row")->required();
  sub->add_option("--target-col", cfg.target_col, "target column name")->capture_default_str();
}

void add_model(CLI::App *sub, RunConfig &cfg) {
  sub->add_option("--model", cfg.model, "tdgp or sgp")
      ->check(CLI::IsMember({"tdgp", "sgp"}))
      ->capture_default_str();
  sub->add_option("--latent-dim", cfg.latent_dim, "Q, 0 for Q = D")->capture_default_str();
  sub->add_option("--inducing-out", cfg.inducing_out, "output-layer inducing points")
      ->capture_default_str();
  sub->add_option("--inducing-hidden", cfg.inducing_hidden, "hidden-layer inducing points")
      ->capture_default_str();
  sub->add_flag("--augment-bias", cfg.augment_bias, "append a constant input to W(x) x");
  for (int i = 0; i < 3; ++i) {
    const std::string p = std::to_string(i + 1);
    sub->add_option("--epochs-phase" + p, cfg.epochs[i], "epochs in phase " + p)
        ->capture_default_str();
    sub->add_option("--lr-phase" + p, cfg.lr[i], "Adam step size in phase " + p)
        ->capture_default_str();
  }
}

void add_grid(CLI::App *sub, RunConfig &cfg) {
  sub->add_option("--grid", cfg.grid, "CSV of grid inputs (header row)");
  sub->add_option("--grid-points", cfg.grid_points, "points per axis of the regular grid")
      ->capture_default_str();
  sub->add_option("--grid-lo", cfg.grid_lo, "regular grid lower bound")->capture_default_str();
  sub->add_option("--grid-hi", cfg.grid_hi, "regular grid upper bound")->capture_default_str();
}

} // namespace

int main(int argc, char **argv) {
  set_log_level();
  CLI::App app{"Thin-and-deep Gaussian processes"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto *gen = app.add_subcommand("gen", "write the synthetic train/validation CSVs");
  gen->add_option("--n", cfg.n, "total rows, split 50/50")->capture_default_str();
  add_out_seed(gen, cfg);

  auto *fit = app.add_subcommand("fit", "train a model and write a checkpoint");
  add_data(fit, cfg);
  add_model(fit, cfg);
  add_out_seed(fit, cfg);

  auto *eval = app.add_subcommand("eval", "evaluate a checkpoint on a CSV");
  add_data(eval, cfg);
  eval->add_option("--checkpoint", cfg.checkpoint, "checkpoint.json from fit")->required();
  eval->add_option("--mrae-mode", cfg.mrae_mode, "per-point or mean-deviation")
      ->capture_default_str();
  add_out_seed(eval, cfg);

  auto *cv = app.add_subcommand("cv", "k-fold cross-validation");
  add_data(cv, cfg);
  add_model(cv, cfg);
  cv->add_option("--folds", cfg.folds, "number of folds")->capture_default_str();
  cv->add_option("--jobs", cfg.jobs, "folds trained in parallel")->capture_default_str();
  cv->add_option("--mrae-mode", cfg.mrae_mode, "per-point or mean-deviation")
      ->capture_default_str();
  add_out_seed(cv, cfg);

  auto *prior = app.add_subcommand("sample-prior", "draw a deep prior sample on a grid");
  prior->add_option("--kind", cfg.kind, "cdgp, tdgp or tdgp-augmented")->capture_default_str();
  prior->add_option("--depth", cfg.depth, "number of GP layers")->capture_default_str();
  prior->add_option("--mean-mode", cfg.mean_mode, "zero or linear-identity")
      ->capture_default_str();
  add_grid(prior, cfg);
  add_out_seed(prior, cfg);

  auto *exp = app.add_subcommand("export", "latent space, lengthscale field and relevances");
  exp->add_option("--checkpoint", cfg.checkpoint, "checkpoint.json from fit")->required();
  add_grid(exp, cfg);
  add_out_seed(exp, cfg);

  std::string replay_path;
  std::string replay_out;
  auto *replay = app.add_subcommand("replay", "rerun from a saved config.json");
  replay->add_option("--config", replay_path, "config.json written by an earlier run")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "override the output directory");

  CLI11_PARSE(app, argc, argv);

  if (replay->parsed()) {
    std::ifstream is(replay_path);
    try {
      cfg = RunConfig::from_json(nlohmann::json::parse(is));
    } catch (const std::exception &e) {
      spdlog::error("replay: {}", e.what());
      return 2;
    }
    if (!replay_out.empty()) {
      cfg.out = replay_out;
    }
  } else {
    cfg.command = app.get_subcommands().front()->get_name();
  }
  return thindeep::cli::run(cfg);
}
