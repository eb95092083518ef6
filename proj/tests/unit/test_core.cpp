// Copyright 2026 The MACE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mace/core.hpp"
#include "mace/error.hpp"

using mace::Matrix;

namespace {

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) m(0, i++) = x;
  return m;
}

}  // namespace

TEST_CASE("minmax_normalize maps the training range onto [0, 1]") {
  const auto n = mace::minmax_normalize(row({0, 5, 10}));
  CHECK(n.values(0, 0) == 0.0);
  CHECK(n.values(0, 1) == 0.5);
  CHECK(n.values(0, 2) == 1.0);
  CHECK(n.stats.min[0] == 0.0);
  CHECK(n.stats.max[0] == 10.0);
}

TEST_CASE("constant features normalize to one half") {
  const auto n = mace::minmax_normalize(row({3, 3, 3}));
  for (int i = 0; i < 3; ++i) CHECK(n.values(0, i) == 0.5);
}

TEST_CASE("test data reuses training stats without clipping") {
  const auto train = mace::minmax_normalize(row({0, 10}));
  const auto test = mace::minmax_normalize(row({12, -5}), train.stats);
  CHECK(test.values(0, 0) == doctest::Approx(1.2));
  CHECK(test.values(0, 1) == doctest::Approx(-0.5));
}

TEST_CASE("non-finite input is rejected with its coordinate") {
  Matrix m(2, 3);
  m.setZero();
  m(1, 2) = std::numeric_limits<double>::quiet_NaN();
  try {
    mace::minmax_normalize(m);
    FAIL("expected DataError");
  } catch (const mace::DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("feature 1") != std::string::npos);
    CHECK(what.find("timestamp 2") != std::string::npos);
  }
}

TEST_CASE("stats with min above max or the wrong width are rejected") {
  mace::MinMaxStats bad{{2.0}, {1.0}};
  CHECK_THROWS_AS(mace::minmax_normalize(row({1, 2}), bad), mace::DataError);
  mace::MinMaxStats narrow{{0.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(mace::minmax_normalize(row({1, 2}), narrow), mace::ShapeError);
}

TEST_CASE("normalization is idempotent given fixed stats") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4, 9);
  Matrix raw(3, 50);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = u(rng);
  const auto first = mace::minmax_normalize(raw);
  const auto again = mace::minmax_normalize(raw, first.stats);
  CHECK(first.values == again.values);
  const mace::MinMaxStats unit{{0, 0, 0}, {1, 1, 1}};
  const auto twice = mace::minmax_normalize(first.values, unit);
  CHECK((twice.values - first.values).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(first.values.minCoeff() >= 0.0);
  CHECK(first.values.maxCoeff() <= 1.0);
}

TEST_CASE("sliding_windows counts and offsets") {
  Matrix s40 = Matrix::Zero(2, 40);
  CHECK(mace::sliding_windows(s40, 40, 1).size() == 1);

  Matrix s45(2, 45);
  for (Eigen::Index t = 0; t < 45; ++t) s45.col(t).setConstant(static_cast<double>(t));
  const auto w = mace::sliding_windows(s45, 40, 1, "svc");
  REQUIRE(w.size() == 6);
  CHECK(w[5].start_index == 5);
  CHECK(w[5].values(1, 0) == 5.0);
  CHECK(w[0].service_id == "svc");

  for (std::size_t hop : {1u, 3u, 7u, 40u}) {
    CHECK(mace::sliding_windows(s45, 10, hop).size() == (45 - 10) / hop + 1);
    CHECK(mace::window_offsets(45, 10, hop).size() == (45 - 10) / hop + 1);
  }
}

TEST_CASE("sliding_windows rejects short series and zero hop") {
  Matrix s39 = Matrix::Zero(1, 39);
  try {
    mace::sliding_windows(s39, 40, 1);
    FAIL("expected DataError");
  } catch (const mace::DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("39") != std::string::npos);
    CHECK(what.find("40") != std::string::npos);
  }
  CHECK_THROWS_AS(mace::sliding_windows(Matrix::Zero(1, 50), 40, 0), mace::DataError);
}

TEST_CASE("hop-1 windowing is lossless") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 1);
  Matrix s(2, 57);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = n(rng);
  const auto w = mace::sliding_windows(s, 12, 1);
  Matrix rebuilt(2, 57);
  for (std::size_t i = 0; i < w.size(); ++i) rebuilt.col(static_cast<Eigen::Index>(i)) = w[i].values.col(0);
  const auto& last = w.back();
  for (Eigen::Index c = 1; c < 12; ++c) rebuilt.col(static_cast<Eigen::Index>(last.start_index) + c) = last.values.col(c);
  CHECK(rebuilt == s);
}

TEST_CASE("hyperparameter validation") {
  mace::HyperParams hp;
  CHECK_NOTHROW(hp.validate());
  CHECK(hp.stride_t() == 1);
  CHECK(hp.stride_f() == hp.kernel_len);
  CHECK(hp.max_bases() == 21);

  auto bad = hp;
  bad.gamma_t = 4;
  CHECK_THROWS_AS(bad.validate(), mace::DataError);
  bad = hp;
  bad.gamma_f = 1;
  CHECK_THROWS_AS(bad.validate(), mace::DataError);
  bad = hp;
  bad.k_bases = 22;
  CHECK_THROWS_AS(bad.validate(), mace::DataError);
  bad = hp;
  bad.sigma_f = 0;
  CHECK_THROWS_AS(bad.validate(), mace::DataError);

  CHECK(mace::admissible_gamma(3));
  CHECK(mace::admissible_gamma(-3));
  CHECK_FALSE(mace::admissible_gamma(-1));
  CHECK_FALSE(mace::admissible_gamma(1));
  CHECK_FALSE(mace::admissible_gamma(6));
}
