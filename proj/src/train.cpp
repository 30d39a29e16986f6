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

#include "thindeep/train.hpp"

#include <fstream>

namespace thindeep::train {

void adam_step(ParamVector &params, const Vector &grad, AdamState &state, double step_size,
               const std::vector<bool> &frozen, const AdamConfig &config) {
  const Eigen::Index n = params.size();
  require(grad.size() == n, "adam_step: gradient size mismatch");
  require(frozen.empty() || static_cast<Eigen::Index>(frozen.size()) == n,
          "adam_step: frozen mask size mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericalError("adam_step: non-finite gradient for " + params.label(i));
    }
  }
  if (state.m.size() != n) {
    state.m = Vector::Zero(n);
    state.v = Vector::Zero(n);
    state.t = 0;
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  Vector &x = params.values();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!frozen.empty() && frozen[static_cast<std::size_t>(i)]) {
      continue;
    }
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    x[i] -= step_size * mhat / (std::sqrt(vhat) + config.epsilon);
  }
}

Schedule Schedule::standard(int e1, int e2, int e3, double lr1, double lr2, double lr3) {
  Schedule s;
  s.phases.push_back({e1, lr1, {"noise_variance"}});
  s.phases.push_back({e2, lr2, {"noise_variance"}});
  s.phases.push_back({e3, lr3, {}});
  s.validate();
  return s;
}

void Schedule::validate() const {
  for (const Phase &p : phases) {
    require(p.epochs >= 0, "Schedule: epoch counts must be non-negative");
    require(p.step_size > 0 && std::isfinite(p.step_size), "Schedule: step sizes must be positive");
  }
}

int Schedule::total_epochs() const {
  int total = 0;
  for (const Phase &p : phases) {
    total += p.epochs;
  }
  return total;
}

void LossTrace::write_csv(const std::string &path) const {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot write " + path);
  }
  os.precision(17);
  os << "epoch,phase,loss,elbo";
  for (const auto &name : term_names) {
    os << ',' << name;
  }
  os << '\n';
  for (const Row &r : rows) {
    os << r.epoch << ',' << r.phase << ',' << r.loss << ',' << -r.loss;
    for (double t : r.terms) {
      os << ',' << t;
    }
    os << '\n';
  }
}

OptimizeResult optimize(ParamVector init, const Objective &objective, const Schedule &schedule,
                        const std::vector<std::string> &term_names) {
  schedule.validate();
  OptimizeResult out{std::move(init), {}};
  out.trace.term_names = term_names;
  AdamState state;
  ParamVector last_good = out.params;
  int epoch = 0;
  for (std::size_t p = 0; p < schedule.phases.size(); ++p) {
    const Phase &phase = schedule.phases[p];
    std::vector<bool> frozen(static_cast<std::size_t>(out.params.size()), false);
    for (const std::string &name : phase.frozen) {
      if (!out.params.has(name)) {
        continue;
      }
      const ParamSlot &slot = out.params.slot(name);
      for (Eigen::Index i = 0; i < slot.size; ++i) {
        frozen[static_cast<std::size_t>(slot.offset + i)] = true;
      }
    }
    for (int e = 0; e < phase.epochs; ++e, ++epoch) {
      Evaluation ev;
      try {
        ev = objective(out.params);
      } catch (const NumericalError &err) {
        throw TrainingAborted("epoch " + std::to_string(epoch) + ": " + err.what(), last_good);
      }
      if (!std::isfinite(ev.value)) {
        throw TrainingAborted("epoch " + std::to_string(epoch) + ": non-finite loss", last_good);
      }
      last_good = out.params;
      out.trace.rows.push_back({epoch, static_cast<int>(p) + 1, -ev.value, ev.terms});
      try {
        adam_step(out.params, -ev.gradient, state, phase.step_size, frozen);
      } catch (const NumericalError &err) {
        throw TrainingAborted("epoch " + std::to_string(epoch) + ": " + err.what(), last_good);
      }
    }
  }
  return out;
}

namespace {

const std::vector<std::string> kTermNames = {"data_fit",        "trace_term",     "log_det",
                                             "normalizer",      "kl_hidden",      "noise_variance",
                                             "output_variance"};

} // namespace

TdgpFit fit(const tdgp::TdgpModel &init, const Matrix &x, const Vector &y,
            const Schedule &schedule) {
  init.validate();
  tdgp::TdgpModel work = init;
  const Objective objective = [&](const ParamVector &p) {
    work.unpack(p);
    const tdgp::ElboWithGradient eg = tdgp::collapsed_elbo_with_gradient(work, x, y);
    const CollapsedBound &b = eg.elbo.bound;
    return Evaluation{eg.elbo.value,
                      tdgp::unconstrained_gradient(work, eg.gradient),
                      {b.data_fit, b.trace_term, b.log_det, b.normalizer, eg.elbo.kl_hidden,
                       work.noise_variance, work.output_variance}};
  };
  OptimizeResult r = optimize(init.pack(), objective, schedule, kTermNames);
  TdgpFit out{init, std::move(r.trace)};
  if (schedule.total_epochs() > 0) {
    out.model.unpack(r.params);
  }
  return out;
}

SgpFit fit(const sgp::SgpModel &init, const Matrix &x, const Vector &y, const Schedule &schedule) {
  init.validate();
  sgp::SgpModel work = init;
  const Objective objective = [&](const ParamVector &p) {
    work.unpack(p);
    const sgp::SgpBound sb = sgp::collapsed_elbo(work, x, y, true);
    const CollapsedBound &b = sb.bound;
    return Evaluation{b.value,
                      sgp::unconstrained_gradient(work, sb.gradient),
                      {b.data_fit, b.trace_term, b.log_det, b.normalizer, 0.0, work.noise_variance,
                       work.variance}};
  };
  OptimizeResult r = optimize(init.pack(), objective, schedule, kTermNames);
  SgpFit out{init, std::move(r.trace)};
  if (schedule.total_epochs() > 0) {
    out.model.unpack(r.params);
  }
  return out;
}

} // namespace thindeep::train
