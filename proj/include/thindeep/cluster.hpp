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

#ifndef THINDEEP_CLUSTER_HPP
#define THINDEEP_CLUSTER_HPP

#include <cstdint>

#include "thindeep/common.hpp"

namespace thindeep {

/// Lloyd's k-means with k-means++ seeding; returns k centers (rows).
/// When k >= rows, every row is returned plus small seeded perturbations of
/// existing rows for the remainder.
Matrix kmeans(const Matrix &points, Eigen::Index k, std::uint64_t seed, int max_iterations = 100);

} // namespace thindeep

#endif
