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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "thindeep/deep_priors.hpp"
#include "thindeep/sgp.hpp"
#include "thindeep/tdgp.hpp"

namespace thindeep::cli {

namespace fs = std::filesystem;
using nlohmann::json;

json RunConfig::to_json() const {
  return {{"command", command},
          {"out", out},
          {"seed", seed},
          {"data", data},
          {"target_col", target_col},
          {"n", n},
          {"model", model},
          {"latent_dim", latent_dim},
          {"inducing_out", inducing_out},
          {"inducing_hidden", inducing_hidden},
          {"augment_bias", augment_bias},
          {"epochs", {epochs[0], epochs[1], epochs[2]}},
          {"lr", {lr[0], lr[1], lr[2]}},
          {"checkpoint", checkpoint},
          {"mrae_mode", mrae_mode},
          {"folds", folds},
          {"jobs", jobs},
          {"kind", kind},
          {"mean_mode", mean_mode},
          {"depth", depth},
          {"grid", grid},
          {"grid_points", grid_points},
          {"grid_lo", grid_lo},
          {"grid_hi", grid_hi}};
}

RunConfig RunConfig::from_json(const json &j) {
  RunConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    c.out = j.value("out", c.out);
    c.seed = j.value("seed", c.seed);
    c.data = j.value("data", c.data);
    c.target_col = j.value("target_col", c.target_col);
    c.n = j.value("n", c.n);
    c.model = j.value("model", c.model);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.inducing_out = j.value("inducing_out", c.inducing_out);
    c.inducing_hidden = j.value("inducing_hidden", c.inducing_hidden);
    c.augment_bias = j.value("augment_bias", c.augment_bias);
    if (j.contains("epochs")) {
      for (int i = 0; i < 3; ++i) {
        c.epochs[i] = j.at("epochs").at(static_cast<std::size_t>(i)).get<int>();
      }
    }
    if (j.contains("lr")) {
      for (int i = 0; i < 3; ++i) {
        c.lr[i] = j.at("lr").at(static_cast<std::size_t>(i)).get<double>();
      }
    }
    c.checkpoint = j.value("checkpoint", c.checkpoint);
    c.mrae_mode = j.value("mrae_mode", c.mrae_mode);
    c.folds = j.value("folds", c.folds);
    c.jobs = j.value("jobs", c.jobs);
    c.kind = j.value("kind", c.kind);
    c.mean_mode = j.value("mean_mode", c.mean_mode);
    c.depth = j.value("depth", c.depth);
    c.grid = j.value("grid", c.grid);
    c.grid_points = j.value("grid_points", c.grid_points);
    c.grid_lo = j.value("grid_lo", c.grid_lo);
    c.grid_hi = j.value("grid_hi", c.grid_hi);
  } catch (const json::exception &e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

void RunConfig::validate() const {
  static const std::vector<std::string> commands = {"gen", "fit",          "eval",
                                                    "cv",  "sample-prior", "export"};
  require(std::find(commands.begin(), commands.end(), command) != commands.end(),
          "unknown command '" + command + "'");
  require(!out.empty(), "--out must not be empty");
  require(model == "tdgp" || model == "sgp", "--model must be tdgp or sgp");
  require(latent_dim >= 0, "--latent-dim must be non-negative");
  require(inducing_out >= 1 && inducing_hidden >= 1, "inducing counts must be positive");
  for (int i = 0; i < 3; ++i) {
    require(epochs[i] >= 0, "epoch counts must be non-negative");
    require(lr[i] > 0, "step sizes must be positive");
  }
  metrics::parse_mrae_mode(mrae_mode);
  require(jobs >= 1, "--jobs must be at least 1");
  require(grid_points >= 1 && grid_lo < grid_hi, "grid range must be non-empty");
  if (command == "gen") {
    require(n >= 2, "--n must be at least 2");
  }
  if (command == "fit" || command == "eval" || command == "cv") {
    require(!data.empty(), "--data is required");
  }
  if (command == "eval" || command == "export") {
    require(!checkpoint.empty(), "--checkpoint is required");
  }
  if (command == "cv") {
    require(folds >= 2, "--folds must be at least 2");
  }
  if (command == "sample-prior") {
    priors::parse_model_kind(kind);
    priors::parse_mean_mode(mean_mode);
    require(depth >= 1, "--depth must be at least 1");
    require(grid_points <= 512, "--grid-points is capped at 512 for prior sampling");
  }
}

train::Schedule RunConfig::schedule() const {
  return train::Schedule::standard(epochs[0], epochs[1], epochs[2], lr[0], lr[1], lr[2]);
}

namespace {

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot write " + path.string());
  }
  os << text;
}

std::string dataset_name(const std::string &path) { return fs::path(path).stem().string(); }

/// Regular grid over [lo, hi]^dim with `points` per axis (dim <= 2).
Matrix regular_grid(int dim, int points, double lo, double hi) {
  require(dim >= 1 && dim <= 2, "regular grids are only built for 1 or 2 inputs; pass --grid");
  const Vector axis = Vector::LinSpaced(points, lo, hi);
  if (dim == 1) {
    return axis;
  }
  Matrix g(static_cast<Eigen::Index>(points) * points, 2);
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      g(i * points + j, 0) = axis[i];
      g(i * points + j, 1) = axis[j];
    }
  }
  return g;
}

void write_table(const fs::path &path, const std::vector<std::string> &header, const Matrix &m) {
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

std::uint64_t fold_seed(std::uint64_t seed, int fold) {
  return seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(fold + 1));
}

} // namespace

FitOutcome fit_model(const RunConfig &cfg, const data::Dataset &raw, std::uint64_t seed) {
  const data::Dataset ds = data::normalize(raw);
  FitOutcome out;
  io::Checkpoint &c = out.checkpoint;
  c.model_kind = cfg.model;
  c.norm = ds.norm;
  c.feature_names = ds.feature_names;
  c.target_name = ds.target_name;
  c.config = cfg.to_json();
  const train::Schedule schedule = cfg.schedule();
  if (cfg.model == "tdgp") {
    tdgp::TdgpConfig tc;
    tc.latent_dim = cfg.latent_dim;
    tc.inducing_out = cfg.inducing_out;
    tc.inducing_hidden = cfg.inducing_hidden;
    tc.augment_bias = cfg.augment_bias;
    const tdgp::TdgpModel init = tdgp::initialize(ds.x, tc, seed);
    train::TdgpFit fit = train::fit(init, ds.x, ds.y, schedule);
    const tdgp::TdgpPredictor pred = tdgp::TdgpPredictor::fit(fit.model, ds.x, ds.y);
    c.qu_mean = pred.qu().mean();
    c.qu_covariance = pred.qu().covariance();
    c.tdgp = fit.model;
    out.trace = std::move(fit.trace);
  } else {
    sgp::SgpConfig sc;
    sc.inducing = cfg.inducing_out;
    const sgp::SgpModel init = sgp::initialize(ds.x, sc, seed);
    train::SgpFit fit = train::fit(init, ds.x, ds.y, schedule);
    const sgp::SgpPredictor pred = sgp::SgpPredictor::fit(fit.model, ds.x, ds.y);
    c.qu_mean = pred.qu().mean();
    c.qu_covariance = pred.qu().covariance();
    c.sgp = fit.model;
    out.trace = std::move(fit.trace);
  }
  return out;
}

metrics::FoldResult evaluate(const io::Checkpoint &ckpt, const data::Dataset &raw,
                             metrics::MraeMode mode) {
  require(raw.dim() == ckpt.norm.x_mean.size(), "evaluate: input dimension mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  const Matrix x = ckpt.norm.apply_x(raw.x);
  const Vector y = ckpt.norm.apply_y(raw.y);
  const GaussianDist qu(ckpt.qu_mean, ckpt.qu_covariance);
  Vector mean;
  Vector var;
  int clamps = 0;
  if (ckpt.model_kind == "tdgp") {
    const tdgp::Prediction p = tdgp::TdgpPredictor(*ckpt.tdgp, qu).predict(x);
    mean = p.mean;
    var = p.observed_variance;
    clamps = p.clamp_count;
  } else {
    const sgp::Prediction p = sgp::SgpPredictor(*ckpt.sgp, qu).predict(x);
    mean = p.mean;
    var = p.observed_variance;
    clamps = p.clamp_count;
  }
  metrics::FoldResult r;
  r.model = ckpt.model_kind;
  r.nlpd = metrics::nlpd(mean, var, y);
  r.mrae = metrics::mrae(mean, y, mode);
  r.nlpd_original = r.nlpd + std::log(ckpt.norm.y_std);
  r.clamp_count = clamps;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void cmd_gen(const RunConfig &cfg) {
  const data::Dataset ds = data::gen_synthetic(cfg.n, cfg.seed);
  data::write_csv(ds.subset(ds.fold, 0, true), (fs::path(cfg.out) / "train.csv").string());
  data::write_csv(ds.subset(ds.fold, 1, true), (fs::path(cfg.out) / "valid.csv").string());
  spdlog::info("gen: wrote {} train and {} validation rows to {}", cfg.n / 2, cfg.n - cfg.n / 2,
               cfg.out);
}

void cmd_fit(const RunConfig &cfg) {
  const data::Dataset raw = data::load_csv(cfg.data, cfg.target_col);
  spdlog::info("fit: {} on {} rows x {} inputs, {} epochs", cfg.model, raw.size(), raw.dim(),
               cfg.schedule().total_epochs());
  const FitOutcome fit = fit_model(cfg, raw, cfg.seed);
  io::save_checkpoint(fit.checkpoint, (fs::path(cfg.out) / "checkpoint.json").string());
  fit.trace.write_csv((fs::path(cfg.out) / "loss_trace.csv").string());
  if (!fit.trace.rows.empty()) {
    spdlog::info("fit: final loss {:.6f}", fit.trace.rows.back().loss);
  }
}

metrics::EvalReport cmd_eval(const RunConfig &cfg) {
  const io::Checkpoint ckpt = io::load_checkpoint(cfg.checkpoint);
  const data::Dataset raw = data::load_csv(cfg.data, cfg.target_col);
  const metrics::MraeMode mode = metrics::parse_mrae_mode(cfg.mrae_mode);
  metrics::EvalReport report;
  report.mrae_mode = cfg.mrae_mode;
  metrics::FoldResult r = evaluate(ckpt, raw, mode);
  r.dataset = dataset_name(cfg.data);
  report.folds.push_back(r);
  report.write((fs::path(cfg.out) / "report.json").string(),
               (fs::path(cfg.out) / "report.csv").string());
  spdlog::info("eval: NLPD {:.4f}, MRAE {:.4f}, {} variance clamps", r.nlpd, r.mrae,
               r.clamp_count);
  return report;
}

metrics::EvalReport cmd_cv(const RunConfig &cfg) {
  const data::Dataset raw = data::load_csv(cfg.data, cfg.target_col);
  const std::vector<int> folds = data::kfold(raw.size(), cfg.folds, cfg.seed);
  const metrics::MraeMode mode = metrics::parse_mrae_mode(cfg.mrae_mode);
  std::vector<metrics::FoldResult> results(static_cast<std::size_t>(cfg.folds));
  std::vector<std::string> errors(static_cast<std::size_t>(cfg.folds));
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (int k = next++; k < cfg.folds; k = next++) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const fs::path dir = fs::path(cfg.out) / ("fold_" + std::to_string(k));
        fs::create_directories(dir);
        const FitOutcome fit = fit_model(cfg, raw.subset(folds, k, false), fold_seed(cfg.seed, k));
        io::save_checkpoint(fit.checkpoint, (dir / "checkpoint.json").string());
        fit.trace.write_csv((dir / "loss_trace.csv").string());
        metrics::FoldResult r = evaluate(fit.checkpoint, raw.subset(folds, k, true), mode);
        r.dataset = dataset_name(cfg.data);
        r.fold = k;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        results[static_cast<std::size_t>(k)] = r;
        spdlog::info("cv: fold {} NLPD {:.4f} MRAE {:.4f}", k, r.nlpd, r.mrae);
      } catch (const std::exception &e) {
        errors[static_cast<std::size_t>(k)] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::min(cfg.jobs, cfg.folds); ++j) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto &t : pool) {
    t.join();
  }
  for (int k = 0; k < cfg.folds; ++k) {
    if (!errors[static_cast<std::size_t>(k)].empty()) {
      throw std::runtime_error("fold " + std::to_string(k) + ": " +
                               errors[static_cast<std::size_t>(k)]);
    }
  }
  metrics::EvalReport report;
  report.mrae_mode = cfg.mrae_mode;
  report.folds = std::move(results);
  report.write((fs::path(cfg.out) / "report.json").string(),
               (fs::path(cfg.out) / "report.csv").string());
  spdlog::info("cv: NLPD {:.4f} +- {:.4f}, MRAE {:.4f} +- {:.4f}", report.nlpd().mean,
               report.nlpd().std, report.mrae().mean, report.mrae().std);
  return report;
}

void cmd_sample_prior(const RunConfig &cfg) {
  priors::DepthConfig dc;
  dc.depth = cfg.depth;
  dc.kind = priors::parse_model_kind(cfg.kind);
  dc.mean_mode = priors::parse_mean_mode(cfg.mean_mode);
  const Matrix grid = cfg.grid.empty() ? priors::linspace_grid(cfg.grid_lo, cfg.grid_hi,
                                                               cfg.grid_points)
                                       : data::load_csv_matrix(cfg.grid);
  const priors::PriorSampleGrid sample = priors::sample_prior(dc, grid, cfg.seed);
  priors::write_csv(sample, cfg.out);
  spdlog::info("sample-prior: {} depth {} on {} points, f std {:.4f}", cfg.kind, cfg.depth,
               grid.rows(), priors::sample_std(sample.f));
}

void cmd_export(const RunConfig &cfg) {
  const io::Checkpoint ckpt = io::load_checkpoint(cfg.checkpoint);
  const fs::path out(cfg.out);
  std::vector<std::string> xh = ckpt.feature_names;
  const int dim = static_cast<int>(ckpt.norm.x_mean.size());
  const Matrix raw_grid = cfg.grid.empty()
                              ? regular_grid(dim, cfg.grid_points, cfg.grid_lo, cfg.grid_hi)
                              : data::load_csv_matrix(cfg.grid);
  require(raw_grid.cols() == dim, "export: grid dimension does not match the model");
  const Matrix grid = ckpt.norm.apply_x(raw_grid);

  if (ckpt.model_kind == "tdgp") {
    const tdgp::TdgpModel &m = *ckpt.tdgp;
    const Matrix h = tdgp::export_latent(m, grid);
    const Matrix field = tdgp::export_field(m, grid);
    std::vector<std::string> hh = xh;
    std::vector<std::string> fh = xh;
    Matrix lat(grid.rows(), dim + h.cols());
    lat << raw_grid, h;
    Matrix fl(grid.rows(), dim + field.cols());
    fl << raw_grid, field;
    for (Eigen::Index q = 0; q < h.cols(); ++q) {
      hh.push_back("h" + std::to_string(q));
    }
    for (Eigen::Index q = 0; q < field.cols(); ++q) {
      fh.push_back("eig" + std::to_string(q));
    }
    write_table(out / "latent.csv", hh, lat);
    write_table(out / "field.csv", fh, fl);
    const tdgp::Relevance rel = tdgp::relevance_profile(m);
    Matrix r(rel.relevance.size(), 4);
    for (Eigen::Index q = 0; q < r.rows(); ++q) {
      r.row(q) << static_cast<double>(q), rel.relevance[q], rel.kernel_variance_component[q],
          rel.mean_component[q];
    }
    write_table(out / "relevance.csv", {"dim", "relevance", "kernel_variance", "mean_component"},
                r);
  } else {
    const Vector rel = sgp::relevance_profile(*ckpt.sgp);
    Matrix r(rel.size(), 3);
    for (Eigen::Index q = 0; q < r.rows(); ++q) {
      r.row(q) << static_cast<double>(q), rel[q], 1.0 / ckpt.sgp->lengthscales[q];
    }
    write_table(out / "relevance.csv", {"dim", "relevance", "inverse_lengthscale"}, r);
    spdlog::info("export: sgp has no latent space or lengthscale field; wrote relevance only");
  }
}

int run(const RunConfig &cfg) {
  try {
    cfg.validate();
  } catch (const std::exception &e) {
    spdlog::error("invalid configuration: {}", e.what());
    return 2;
  }
  const fs::path out(cfg.out);
  try {
    fs::create_directories(out);
    fs::remove(out / "FAILED");
    write_text(out / "config.json", cfg.to_json().dump(2) + "\n");
    if (cfg.command == "gen") {
      cmd_gen(cfg);
    } else if (cfg.command == "fit") {
      cmd_fit(cfg);
    } else if (cfg.command == "eval") {
      cmd_eval(cfg);
    } else if (cfg.command == "cv") {
      cmd_cv(cfg);
    } else if (cfg.command == "sample-prior") {
      cmd_sample_prior(cfg);
    } else {
      cmd_export(cfg);
    }
  } catch (const std::exception &e) {
    spdlog::error("{}: {}", cfg.command, e.what());
    try {
      write_text(out / "FAILED", std::string(e.what()) + "\n");
    } catch (const std::exception &) {
      // output directory itself is unusable
    }
    return 1;
  }
  return 0;
}

} // namespace thindeep::cli
