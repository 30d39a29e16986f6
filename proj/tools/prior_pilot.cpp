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

// Pilot simulation for the depth-pathology thresholds: flatness fraction and
// depth-5 saturation of zero-mean CDGP and TDGP priors on a 101-point grid.
// Seeds start at 100000 so they never overlap the 0..199 seeds of the test.

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "thindeep/deep_priors.hpp"

using namespace thindeep;

int main(int argc, char **argv) {
  const int seeds = argc > 1 ? std::atoi(argv[1]) : 500;
  const std::uint64_t base = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 100000;
  const Matrix grid = priors::linspace_grid(-5.0, 5.0, 101);
  std::vector<std::uint64_t> ids;
  for (int s = 0; s < seeds; ++s) {
    ids.push_back(base + static_cast<std::uint64_t>(s));
  }
  std::printf("kind,flat_fraction,flat_se,saturation_l1,saturation_l5,saturation_l5_se\n");
  for (auto kind : {priors::ModelKind::Cdgp, priors::ModelKind::Tdgp}) {
    priors::DepthConfig shallow;
    shallow.kind = kind;
    shallow.depth = 1;
    priors::DepthConfig deep = shallow;
    deep.depth = 5;
    int flat = 0;
    for (std::uint64_t id : ids) {
      const double s1 = priors::sample_std(priors::sample_prior(shallow, grid, id).f);
      const double s5 = priors::sample_std(priors::sample_prior(deep, grid, id).f);
      flat += s5 < s1 ? 1 : 0;
    }
    const double p = static_cast<double>(flat) / seeds;
    const priors::SaturationStats sat = priors::saturation_stats(deep, grid, ids);
    std::printf("%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", priors::to_string(kind).c_str(), p,
                std::sqrt(p * (1 - p) / seeds), sat.mean[0], sat.mean[4], sat.standard_error[4]);
  }
  return 0;
}
