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

#ifndef THINDEEP_TESTS_PILOT_THRESHOLDS_HPP
#define THINDEEP_TESTS_PILOT_THRESHOLDS_HPP

// Frozen from `prior_pilot 500 100000` (seeds 100000..100499, 101-point grid
// on [-5, 5], unit SE layers, zero mean):
//
//   kind  flat_fraction (se)   saturation L1   saturation L5 (se)
//   cdgp  0.972 (0.0074)       0.2209          0.9253 (0.0044)
//   tdgp  0.592 (0.022)        0.2209          0.3268 (0.0043)
//
// Each threshold is the midpoint between the two kinds. Tests draw from
// seeds 0..199, disjoint from the pilot.

namespace thindeep::testing {

constexpr double kFlatFractionThreshold = 0.782;
constexpr double kSaturationThreshold = 0.626;
constexpr int kPathologySeeds = 200;
constexpr int kPathologyGrid = 101;

} // namespace thindeep::testing

#endif
