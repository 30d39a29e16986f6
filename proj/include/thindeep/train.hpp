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

#ifndef THINDEEP_TRAIN_HPP
#define THINDEEP_TRAIN_HPP

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "thindeep/common.hpp"
#include "thindeep/params.hpp"
#include "thindeep/sgp.hpp"
#include "thindeep/tdgp.hpp"

namespace thindeep::train {

struct AdamState {
  Vector m;
  Vector v;
  long long t = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One Adam step that *descends* on `grad`. Entries with frozen[i] set are
/// left untouched, moments included. Throws NumericalError naming the
/// parameter if a gradient entry is not finite.
void adam_step(ParamVector &params, const Vector &grad, AdamState &state, double step_size,
               const std::vector<bool> &frozen = {}, const AdamConfig &config = {});

struct Phase {
  int epochs = 0;
  double step_size = 0.0;
  std::set<std::string> frozen; ///< slot names
};

struct Schedule {
  std::vector<Phase> phases;

  /// 500 @ 0.1 and 1500 @ 0.01 with the noise frozen, then 5000 @ 0.001
  /// with everything trainable.
  static Schedule standard(int e1 = 500, int e2 = 1500, int e3 = 5000, double lr1 = 0.1,
                           double lr2 = 0.01, double lr3 = 0.001);
  void validate() const;
  int total_epochs() const;
};

/// Objective value (to be maximized), its gradient on the unconstrained
/// scale, and named diagnostic terms.
struct Evaluation {
  double value = 0.0;
  Vector gradient;
  std::vector<double> terms;
};

using Objective = std::function<Evaluation(const ParamVector &)>;

struct LossTrace {
  std::vector<std::string> term_names;
  struct Row {
    int epoch = 0;
    int phase = 0;
    double loss = 0.0; ///< negative objective
    std::vector<double> terms;
  };
  std::vector<Row> rows;

  void write_csv(const std::string &path) const;
};

/// Thrown when the loss turns non-finite; holds the last parameters whose
/// loss was finite.
class TrainingAborted : public NumericalError {
public:
  TrainingAborted(const std::string &what, ParamVector last_good)
      : NumericalError(what), last_good_(std::move(last_good)) {}
  const ParamVector &last_good() const { return last_good_; }

private:
  ParamVector last_good_;
};

struct OptimizeResult {
  ParamVector params;
  LossTrace trace;
};

/// Full-batch Adam ascent on `objective` following `schedule`; one epoch is
/// one step. The trace row of each epoch records the loss before its step.
OptimizeResult optimize(ParamVector init, const Objective &objective, const Schedule &schedule,
                        const std::vector<std::string> &term_names);

struct TdgpFit {
  tdgp::TdgpModel model;
  LossTrace trace;
};

struct SgpFit {
  sgp::SgpModel model;
  LossTrace trace;
};

/// Maximizes the collapsed ELBO on (x, y), which should be normalized.
TdgpFit fit(const tdgp::TdgpModel &init, const Matrix &x, const Vector &y,
            const Schedule &schedule);
SgpFit fit(const sgp::SgpModel &init, const Matrix &x, const Vector &y, const Schedule &schedule);

} // namespace thindeep::train

#endif
