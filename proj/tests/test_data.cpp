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

#include <filesystem>
#include <fstream>
#include <set>

#include "thindeep/data.hpp"

using namespace thindeep;
using namespace thindeep::data;

namespace {

class TempDir {
public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("thindeep_data_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string &name, const std::string &content = "") const {
    const auto p = path_ / name;
    if (!content.empty()) {
      std::ofstream(p) << content;
    }
    return p.string();
  }

private:
  std::filesystem::path path_;
};

std::string parse_error(const std::string &path) {
  try {
    load_csv(path, "y");
  } catch (const ParseError &e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST(Synthetic, FunctionExamples) {
  EXPECT_NEAR(synthetic_h(1.0), -2.0, 1e-14);
  EXPECT_NEAR(synthetic_h(-1.0), -2.0, 1e-14);
  EXPECT_DOUBLE_EQ(synthetic_h(0.0), 2.0);
  EXPECT_DOUBLE_EQ(synthetic_g(0.0), 1.0);
  EXPECT_NEAR(synthetic_g(1e-9), 1.0, 1e-15);
  EXPECT_NEAR(synthetic_g(-2.0), -3.545351286587159, 1e-14);
  EXPECT_NEAR(synthetic_g(synthetic_h(1.0)), -3.545351286587159, 1e-13);
  // series branch meets the closed form smoothly
  EXPECT_NEAR(synthetic_g(0.99e-8), synthetic_g(1.01e-8), 1e-15);
}

TEST(Synthetic, DeterministicSplitAndRange) {
  const Dataset a = gen_synthetic(200, 5);
  const Dataset b = gen_synthetic(200, 5);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_NE(a.x, gen_synthetic(200, 6).x);
  ASSERT_EQ(a.dim(), 2);
  ASSERT_EQ(a.fold.size(), 200u);
  EXPECT_EQ(std::count(a.fold.begin(), a.fold.end(), 0), 100);
  EXPECT_EQ(a.fold.front(), 0);
  EXPECT_EQ(a.fold.back(), 1);
  EXPECT_LE(a.x.cwiseAbs().maxCoeff(), 1.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    EXPECT_DOUBLE_EQ(a.y[i], synthetic_g(synthetic_h(a.x(i, 0))));
  }
  EXPECT_THROW(gen_synthetic(1, 0), ParameterError);
}

TEST(Synthetic, HiddenRangeOverManyDraws) {
  const Dataset big = gen_synthetic(100000, 17);
  double lo = 1e300;
  double hi = -1e300;
  for (Eigen::Index i = 0; i < big.size(); ++i) {
    const double h = synthetic_h(big.x(i, 0));
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  EXPECT_GE(lo, -4.01);
  EXPECT_LE(hi, 2.01);
  // a dense scan of x0 puts the exact range at [-2, 2]
  EXPECT_GE(lo, -2.0 - 1e-12);
  EXPECT_LE(hi, 2.0 + 1e-12);
}

TEST(Csv, RoundTripsExactly) {
  TempDir dir;
  Dataset ds;
  ds.x.resize(2, 2);
  ds.x << 0.1, -3.0000000000000004, 1e-300, 12345.678901234567;
  ds.y.resize(2);
  ds.y << 0.30000000000000004, -7.5;
  ds.feature_names = {"a", "b"};
  ds.target_name = "t";
  const std::string path = dir.file("two.csv");
  write_csv(ds, path);
  const Dataset back = load_csv(path, "t");
  EXPECT_EQ(back.x, ds.x);
  EXPECT_EQ(back.y, ds.y);
  EXPECT_EQ(back.feature_names, ds.feature_names);
  EXPECT_EQ(back.target_name, "t");

  const Matrix all = load_csv_matrix(path);
  EXPECT_EQ(all.cols(), 3);
  EXPECT_EQ(all.col(2), ds.y);
}

TEST(Csv, TargetColumnMayBeAnywhere) {
  TempDir dir;
  const Dataset ds = load_csv(dir.file("mid.csv", "a,y,b\n1,2,3\n4,5,6\n"), "y");
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ds.y, (Vector(2) << 2, 5).finished());
  EXPECT_EQ(ds.x.row(1), (Eigen::RowVectorXd(2) << 4, 6).finished());
}

TEST(Csv, ErrorsCarryLineNumbers) {
  TempDir dir;
  EXPECT_NE(parse_error(dir.file("short.csv", "a,y\n1,2\n3\n")).find("short.csv:3:"),
            std::string::npos);
  EXPECT_NE(parse_error(dir.file("word.csv", "a,y\n1,2\n3,4\nx,5\n")).find("word.csv:4:"),
            std::string::npos);
  const std::string nan = parse_error(dir.file("nan.csv", "a,y\n1,nan\n"));
  EXPECT_NE(nan.find("nan.csv:2:"), std::string::npos) << nan;
  EXPECT_NE(nan.find("'y'"), std::string::npos) << nan;
  EXPECT_NE(parse_error(dir.file("inf.csv", "a,y\ninf,1\n")).find("inf.csv:2:"),
            std::string::npos);
  EXPECT_NE(parse_error(dir.file("empty_cell.csv", "a,y\n1,\n")).find(":2:"), std::string::npos);
  EXPECT_NE(parse_error(dir.file("target.csv", "a,b\n1,2\n")).find("no column named 'y'"),
            std::string::npos);
  EXPECT_THROW(load_csv(dir.file("missing.csv"), "y"), ParseError);
}

TEST(Normalize, TrainingRowsStandardized) {
  const Dataset raw = gen_synthetic(300, 3);
  std::vector<bool> mask(300);
  for (int i = 0; i < 300; ++i) {
    mask[i] = raw.fold[i] == 0;
  }
  const Dataset ds = normalize(raw, mask);
  ASSERT_TRUE(ds.normalized);
  const Dataset train = ds.subset(ds.fold, 0, true);
  const double m = static_cast<double>(train.size());
  for (Eigen::Index j = 0; j < ds.dim(); ++j) {
    const Vector c = train.x.col(j);
    EXPECT_LE(std::abs(c.mean()), 1e-10);
    EXPECT_NEAR(std::sqrt((c.array() - c.mean()).square().sum() / m), 1.0, 1e-10);
  }
  EXPECT_LE(std::abs(train.y.mean()), 1e-10);
  // test rows use the training constants
  const Dataset valid = raw.subset(raw.fold, 1, true);
  EXPECT_LE((ds.subset(ds.fold, 1, true).x - ds.norm.apply_x(valid.x)).cwiseAbs().maxCoeff(),
            0.0);

  const Dataset back = denormalize(ds);
  EXPECT_LE((back.x - raw.x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((back.y - raw.y).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(normalize(ds), ParameterError);
}

TEST(Normalize, ConstantColumnIsNamed) {
  Dataset ds;
  ds.x.resize(3, 2);
  ds.x << 1, 5, 2, 5, 3, 5;
  ds.y = Vector::LinSpaced(3, 0, 1);
  ds.feature_names = {"depth", "flat"};
  try {
    normalize(ds);
    FAIL() << "expected an error";
  } catch (const ParameterError &e) {
    EXPECT_NE(std::string(e.what()).find("'flat'"), std::string::npos) << e.what();
  }
}

TEST(Kfold, PartitionAndBalance) {
  const std::vector<int> f = kfold(1000, 5, 11);
  ASSERT_EQ(f.size(), 1000u);
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(std::count(f.begin(), f.end(), k), 200);
  }
  EXPECT_EQ(f, kfold(1000, 5, 11));
  EXPECT_NE(f, kfold(1000, 5, 12));

  const std::vector<int> g = kfold(103, 10, 1);
  std::set<int> labels(g.begin(), g.end());
  EXPECT_EQ(labels.size(), 10u);
  for (int k = 0; k < 10; ++k) {
    const auto c = std::count(g.begin(), g.end(), k);
    EXPECT_TRUE(c == 10 || c == 11);
  }
  EXPECT_THROW(kfold(10, 1, 0), ParameterError);
  EXPECT_THROW(kfold(3, 5, 0), ParameterError);
}

TEST(Dataset, SubsetAndRows) {
  const Dataset ds = gen_synthetic(10, 1);
  const Dataset v = ds.subset(ds.fold, 0, false);
  EXPECT_EQ(v.size(), 5);
  EXPECT_EQ(v.x.row(0), ds.x.row(5));
  const Dataset r = ds.rows({9, 0});
  EXPECT_EQ(r.y[0], ds.y[9]);
  EXPECT_EQ(r.fold[1], ds.fold[0]);
}
