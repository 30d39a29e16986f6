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

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "thindeep/kernels.hpp"
#include "thindeep/sgp.hpp"

using namespace thindeep;
using namespace thindeep::sgp;
using thindeep::testing::randn;
using thindeep::testing::uniform;

namespace {

SgpModel random_sgp(std::mt19937_64 &rng, int d, int m) {
  SgpModel s;
  s.input_dim = d;
  s.variance = uniform(rng, 0.5, 1.5);
  s.noise_variance = uniform(rng, 0.05, 0.3);
  s.lengthscales.resize(d);
  for (int i = 0; i < d; ++i) {
    s.lengthscales[i] = uniform(rng, 0.5, 1.5);
  }
  s.inducing = randn(rng, m, d);
  return s;
}

} // namespace

TEST(Sgp, PackRoundTripAndValidate) {
  std::mt19937_64 rng(61);
  const SgpModel s = random_sgp(rng, 3, 4);
  SgpModel back = s;
  back.unpack(s.pack());
  EXPECT_NEAR(back.variance, s.variance, 1e-14);
  EXPECT_LE((back.lengthscales - s.lengthscales).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(back.inducing, s.inducing);
  SgpModel bad = s;
  bad.lengthscales[1] = -1.0;
  EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(Sgp, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(62);
  for (int t = 0; t < 5; ++t) {
    const SgpModel s = random_sgp(rng, 2, 4);
    const Matrix x = randn(rng, 10, 2);
    const Vector y = randn(rng, 10, 1);
    const ParamVector p0 = s.pack();
    const Vector analytic = unconstrained_gradient(s, collapsed_elbo(s, x, y, true).gradient);
    ASSERT_EQ(analytic.size(), p0.size());
    for (Eigen::Index k = 0; k < p0.size(); ++k) {
      const double fd = thindeep::testing::central_difference(
          [&](double h) {
            ParamVector p = p0;
            p.values()[k] += h;
            SgpModel mm = s;
            mm.unpack(p);
            return collapsed_elbo(mm, x, y, false).bound.value;
          },
          1e-4);
      EXPECT_LE(thindeep::testing::gradient_error(analytic[k], fd), 1e-4) << p0.label(k);
    }
  }
}

TEST(Sgp, ExactWhenInducingAtData) {
  std::mt19937_64 rng(63);
  SgpModel s = random_sgp(rng, 2, 1);
  s.jitter = 1e-12;
  const Matrix x = randn(rng, 9, 2);
  const Vector y = randn(rng, 9, 1);
  s.inducing = x;
  Matrix c = kernels::ard_cross(x, x, s.variance, s.lengthscales);
  c.diagonal().array() += s.noise_variance;
  const Eigen::LLT<Matrix> llt(c);
  const Matrix l = llt.matrixL();
  const double exact =
      -0.5 * y.dot(llt.solve(y)) - l.diagonal().array().log().sum() - 4.5 * kLog2Pi;
  EXPECT_NEAR(collapsed_elbo(s, x, y, false).bound.value, exact, 1e-6);

  const Prediction p = SgpPredictor::fit(s, x, y).predict(x);
  const Matrix k = kernels::ard_cross(x, x, s.variance, s.lengthscales);
  const Vector want = k * llt.solve(y);
  EXPECT_LE((p.mean - want).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((p.observed_variance - p.latent_variance).cwiseAbs().maxCoeff() - s.noise_variance,
            1e-15);
}

TEST(Sgp, PriorPredictionFarFromData) {
  std::mt19937_64 rng(64);
  const SgpModel s = random_sgp(rng, 2, 5);
  const Matrix x = randn(rng, 12, 2);
  const Vector y = randn(rng, 12, 1);
  const Prediction p = SgpPredictor::fit(s, x, y).predict(Matrix::Constant(1, 2, 50.0));
  EXPECT_NEAR(p.mean[0], 0.0, 1e-12);
  EXPECT_NEAR(p.latent_variance[0], s.variance, 1e-12);
}

TEST(Sgp, RelevanceIsNormalizedInverseLengthscale) {
  std::mt19937_64 rng(65);
  SgpModel s = random_sgp(rng, 3, 2);
  s.lengthscales << 0.5, 2.0, 10.0;
  const Vector r = relevance_profile(s);
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_DOUBLE_EQ(r[1], 0.25);
  EXPECT_DOUBLE_EQ(r[2], 0.05);
}

TEST(Sgp, InitializeIsDeterministic) {
  std::mt19937_64 rng(66);
  const Matrix x = randn(rng, 30, 2);
  SgpConfig cfg;
  cfg.inducing = 8;
  const SgpModel a = initialize(x, cfg, 3);
  const SgpModel b = initialize(x, cfg, 3);
  EXPECT_EQ(a.inducing, b.inducing);
  EXPECT_EQ(a.inducing.rows(), 8);
  EXPECT_EQ(a.lengthscales, Vector::Ones(2));
}
