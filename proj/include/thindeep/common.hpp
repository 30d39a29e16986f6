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

#ifndef THINDEEP_COMMON_HPP
#define THINDEEP_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace thindeep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Invalid hyperparameter or argument (non-PD lengthscale, wrong shape, ...).
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A factorization or solve failed even after the jitter policy was applied.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string &msg) {
  if (!cond) {
    throw ParameterError(msg);
  }
}

inline double softplus(double x) {
  // log(1 + e^x) without overflow for large x
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double inverse_softplus(double y) {
  if (!(y > 0)) {
    throw ParameterError("inverse_softplus: argument must be positive");
  }
  return y > 30 ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y));
}

/// d softplus(x) / dx
inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

} // namespace thindeep

#endif
