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

#include "thindeep/metrics.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace thindeep::metrics {

double nlpd(const Vector &mean, const Vector &variance, const Vector &y) {
  require(mean.size() == y.size() && variance.size() == y.size() && y.size() > 0,
          "nlpd: lengths must match and be non-zero");
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    require(variance[i] > 0 && std::isfinite(variance[i]), "nlpd: variance must be positive");
    const double r = y[i] - mean[i];
    total += 0.5 * (kLog2Pi + std::log(variance[i])) + r * r / (2.0 * variance[i]);
  }
  return total / static_cast<double>(y.size());
}

MraeMode parse_mrae_mode(const std::string &s) {
  if (s == "per-point") {
    return MraeMode::PerPoint;
  }
  if (s == "mean-deviation") {
    return MraeMode::MeanDeviation;
  }
  throw ParameterError("unknown MRAE mode '" + s + "' (per-point, mean-deviation)");
}

std::string to_string(MraeMode mode) {
  return mode == MraeMode::PerPoint ? "per-point" : "mean-deviation";
}

double mrae(const Vector &mean, const Vector &y, MraeMode mode, double eps) {
  require(mean.size() == y.size() && y.size() > 0, "mrae: lengths must match and be non-zero");
  const Vector err = (mean - y).cwiseAbs();
  if (mode == MraeMode::PerPoint) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      total += err[i] / std::max(std::abs(y[i]), eps);
    }
    return total / static_cast<double>(y.size());
  }
  const double spread = (y.array() - y.mean()).abs().mean();
  return err.mean() / std::max(spread, eps);
}

Aggregate aggregate(const std::vector<double> &values) {
  Aggregate a;
  if (values.empty()) {
    return a;
  }
  const auto n = static_cast<double>(values.size());
  for (double v : values) {
    a.mean += v;
  }
  a.mean /= n;
  double ss = 0.0;
  for (double v : values) {
    ss += (v - a.mean) * (v - a.mean);
  }
  a.std = std::sqrt(ss / n);
  return a;
}

namespace {

template <class F> std::vector<double> collect(const std::vector<FoldResult> &folds, F f) {
  std::vector<double> out;
  for (const auto &r : folds) {
    out.push_back(f(r));
  }
  return out;
}

} // namespace

Aggregate EvalReport::nlpd() const {
  return aggregate(collect(folds, [](const FoldResult &r) { return r.nlpd; }));
}

Aggregate EvalReport::mrae() const {
  return aggregate(collect(folds, [](const FoldResult &r) { return r.mrae; }));
}

Aggregate EvalReport::nlpd_original() const {
  return aggregate(collect(folds, [](const FoldResult &r) { return r.nlpd_original; }));
}

int EvalReport::clamp_count() const {
  int total = 0;
  for (const auto &r : folds) {
    total += r.clamp_count;
  }
  return total;
}

double EvalReport::seconds() const {
  double total = 0.0;
  for (const auto &r : folds) {
    total += r.seconds;
  }
  return total;
}

std::string EvalReport::to_json() const {
  using nlohmann::json;
  json j;
  j["mrae_mode"] = mrae_mode;
  j["folds"] = json::array();
  for (const auto &r : folds) {
    j["folds"].push_back({{"model", r.model},
                          {"dataset", r.dataset},
                          {"fold", r.fold},
                          {"nlpd", r.nlpd},
                          {"mrae", r.mrae},
                          {"nlpd_original", r.nlpd_original},
                          {"clamp_count", r.clamp_count},
                          {"seconds", r.seconds}});
  }
  auto agg = [](const Aggregate &a) { return json{{"mean", a.mean}, {"std", a.std}}; };
  j["aggregate"] = {{"nlpd", agg(nlpd())},
                    {"mrae", agg(mrae())},
                    {"nlpd_original", agg(nlpd_original())},
                    {"clamp_count", clamp_count()},
                    {"seconds", seconds()}};
  return j.dump(2);
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "model,dataset,fold,nlpd,mrae,nlpd_original,clamp_count\n";
  for (const auto &r : folds) {
    os << r.model << ',' << r.dataset << ',' << r.fold << ',' << r.nlpd << ',' << r.mrae << ','
       << r.nlpd_original << ',' << r.clamp_count << '\n';
  }
  return os.str();
}

void EvalReport::write(const std::string &json_path, const std::string &csv_path) const {
  std::ofstream js(json_path);
  std::ofstream cs(csv_path);
  if (!js || !cs) {
    throw std::runtime_error("cannot write report to " + json_path + " / " + csv_path);
  }
  js << to_json() << '\n';
  cs << to_csv();
}

} // namespace thindeep::metrics
