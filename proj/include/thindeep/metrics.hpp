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

#ifndef THINDEEP_METRICS_HPP
#define THINDEEP_METRICS_HPP

#include <string>
#include <vector>

#include "thindeep/common.hpp"

namespace thindeep::metrics {

/// Mean of -log N(y_i | mu_i, v_i).
double nlpd(const Vector &mean, const Vector &variance, const Vector &y);

enum class MraeMode {
  PerPoint,     ///< mean |mu - y| / max(|y|, eps)
  MeanDeviation ///< mean |mu - y| / mean |y - mean(y)|
};

MraeMode parse_mrae_mode(const std::string &s);
std::string to_string(MraeMode mode);

double mrae(const Vector &mean, const Vector &y, MraeMode mode = MraeMode::PerPoint,
            double eps = 1e-8);

struct FoldResult {
  std::string model;
  std::string dataset;
  int fold = 0;
  double nlpd = 0.0;
  double mrae = 0.0;
  /// NLPD in the original target units: nlpd + log(y_std).
  double nlpd_original = 0.0;
  int clamp_count = 0;
  double seconds = 0.0;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0; ///< population std over folds
};

Aggregate aggregate(const std::vector<double> &values);

struct EvalReport {
  std::string mrae_mode = "per-point";
  std::vector<FoldResult> folds;

  Aggregate nlpd() const;
  Aggregate mrae() const;
  Aggregate nlpd_original() const;
  int clamp_count() const;
  double seconds() const;

  std::string to_json() const;
  /// Header plus one row per fold. Wall-clock time is left out so that
  /// reruns produce identical bytes.
  std::string to_csv() const;
  void write(const std::string &json_path, const std::string &csv_path) const;
};

} // namespace thindeep::metrics

#endif
