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
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "mace/error.hpp"
#include "mace/patex.hpp"
#include "oracles.hpp"

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

mace::TimeSeriesWindow sine_window(double freq, std::size_t w = 40, double amp = 1.0) {
  mace::TimeSeriesWindow win;
  win.values.resize(1, static_cast<Eigen::Index>(w));
  for (std::size_t t = 0; t < w; ++t) win.values(0, static_cast<Eigen::Index>(t)) = amp * std::sin(kTwoPi * freq * t / w);
  return win;
}

mace::BasisSet single(std::size_t features, std::size_t w, std::vector<std::size_t> idx) {
  mace::BasisSet b;
  b.window_size = w;
  b.indices.assign(features, idx);
  b.tallies.assign(features, std::vector<std::size_t>(idx.size(), 1));
  return b;
}

mace::TimeSeriesWindow random_window(std::mt19937_64& rng, std::size_t m, std::size_t w) {
  std::normal_distribution<double> n(0.0, 1.0);
  mace::TimeSeriesWindow win;
  win.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(w));
  for (Eigen::Index i = 0; i < win.values.size(); ++i) win.values.data()[i] = n(rng);
  return win;
}

std::vector<double> row(const mace::Matrix& m, Eigen::Index r) {
  return {m.row(r).data(), m.row(r).data() + m.cols()};
}

}  // namespace

TEST_CASE("select_basis finds a single dominant line") {
  std::vector<mace::TimeSeriesWindow> windows(5, sine_window(3));
  const auto basis = mace::select_basis(windows, 1);
  REQUIRE(basis.features() == 1);
  CHECK(basis.indices[0] == std::vector<std::size_t>{3});
  CHECK(basis.tallies[0] == std::vector<std::size_t>{5});
}

TEST_CASE("select_basis keeps both alternating lines") {
  std::vector<mace::TimeSeriesWindow> windows;
  for (int i = 0; i < 6; ++i) windows.push_back(sine_window(i % 2 == 0 ? 3 : 7));
  const auto basis = mace::select_basis(windows, 2);
  CHECK(basis.indices[0] == std::vector<std::size_t>{3, 7});
}

TEST_CASE("select_basis breaks tally ties toward the lower index") {
  // Each window's top-1 is a different bin; every tally is 1.
  std::vector<mace::TimeSeriesWindow> windows{sine_window(9), sine_window(4), sine_window(6)};
  const auto basis = mace::select_basis(windows, 1);
  CHECK(basis.indices[0] == std::vector<std::size_t>{4});
}

TEST_CASE("select_basis with every bin is vacuous") {
  std::mt19937_64 rng(2);
  std::vector<mace::TimeSeriesWindow> windows{random_window(rng, 3, 40), random_window(rng, 3, 40)};
  const auto basis = mace::select_basis(windows, 21);
  const auto full = mace::BasisSet::full("", 3, 40);
  CHECK(basis.indices == full.indices);
}

TEST_CASE("select_basis is deterministic and rejects bad input") {
  std::mt19937_64 rng(3);
  std::vector<mace::TimeSeriesWindow> windows;
  for (int i = 0; i < 8; ++i) windows.push_back(random_window(rng, 2, 40));
  CHECK(mace::select_basis(windows, 5).indices == mace::select_basis(windows, 5).indices);
  CHECK_THROWS_AS(mace::select_basis(std::vector<mace::TimeSeriesWindow>{}, 1), mace::DataError);
  CHECK_THROWS_AS(mace::select_basis(windows, 0), mace::DataError);
  CHECK_THROWS_AS(mace::select_basis(windows, 22), mace::DataError);
}

TEST_CASE("ca_dft of a sine at its own bin") {
  const auto spec = mace::ca_dft(sine_window(3), single(1, 40, {3}));
  CHECK(std::abs(spec.coeffs[0][0]) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::arg(spec.coeffs[0][0]) == doctest::Approx(-std::numbers::pi / 2).epsilon(1e-12));
}

TEST_CASE("ca_dft of a constant and of zero") {
  mace::TimeSeriesWindow c;
  c.values = mace::Matrix::Constant(1, 40, 2.5);
  const auto dc = mace::ca_dft(c, single(1, 40, {0}));
  CHECK(dc.coeffs[0][0].real() == doctest::Approx(100.0).epsilon(1e-13));
  CHECK(std::abs(dc.coeffs[0][0].imag()) < 1e-12);
  CHECK(std::arg(dc.coeffs[0][0]) == 0.0);

  mace::TimeSeriesWindow z;
  z.values = mace::Matrix::Zero(2, 40);
  const auto zero = mace::ca_dft(z, single(2, 40, {0, 3, 20}));
  for (const auto& f : zero.coeffs)
    for (const auto& v : f) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("ca_dft equals the restriction of a direct full DFT") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto win = random_window(rng, 3, 40);
    std::vector<std::size_t> idx{0, 2, 5, 13, 20};
    const auto spec = mace::ca_dft(win, single(3, 40, idx));
    for (Eigen::Index f = 0; f < 3; ++f) {
      const auto full = oracle::dft(row(win.values, f));
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto ref = full[idx[j]];
        CHECK(std::abs(spec.coeffs[f][j].real() - static_cast<double>(ref.real())) <= 1e-12);
        CHECK(std::abs(spec.coeffs[f][j].imag() - static_cast<double>(ref.imag())) <= 1e-12);
      }
    }
  }
}

TEST_CASE("ca_dft is linear") {
  std::mt19937_64 rng(12);
  const auto x = random_window(rng, 2, 40);
  const auto y = random_window(rng, 2, 40);
  mace::TimeSeriesWindow z;
  z.values = 1.5 * x.values - 0.25 * y.values;
  const auto basis = mace::BasisSet::full("", 2, 40);
  const auto fx = mace::ca_dft(x, basis), fy = mace::ca_dft(y, basis), fz = mace::ca_dft(z, basis);
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t j = 0; j < fz.k(); ++j)
      CHECK(std::abs(fz.coeffs[f][j] - (1.5 * fx.coeffs[f][j] - 0.25 * fy.coeffs[f][j])) <= 1e-9);
}

TEST_CASE("full-basis round trip recovers the window") {
  std::mt19937_64 rng(13);
  for (std::size_t w : {40u, 41u, 8u}) {
    const auto x = random_window(rng, 4, w);
    const auto basis = mace::BasisSet::full("", 4, w);
    const auto back = mace::ca_idft(mace::ca_dft(x, basis), basis);
    CHECK((back.values - x.values).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("restricted inverse is the orthogonal projection") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n(0.0, 1.0);
  auto win = sine_window(3);
  std::vector<double> noise(40);
  double noise_ms = 0;
  for (std::size_t t = 0; t < 40; ++t) {
    noise[t] = 0.01 * n(rng);
    noise_ms += noise[t] * noise[t] / 40.0;
    win.values(0, static_cast<Eigen::Index>(t)) += noise[t];
  }
  const auto basis = single(1, 40, {3});
  const auto back = mace::ca_idft(mace::ca_dft(win, basis), basis);
  const auto proj = oracle::project(row(win.values, 0), {3});
  double err_ms = 0;
  for (std::size_t t = 0; t < 40; ++t) {
    const double clean = std::sin(kTwoPi * 3.0 * t / 40.0);
    err_ms += std::pow(back.values(0, static_cast<Eigen::Index>(t)) - clean, 2) / 40.0;
    CHECK(back.values(0, static_cast<Eigen::Index>(t)) == doctest::Approx(proj[t]).epsilon(1e-10));
  }
  CHECK(std::sqrt(err_ms) <= std::sqrt(noise_ms));

  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_window(rng, 1, 40);
    const std::vector<std::size_t> idx{0, 4, 11, 20};
    const auto b = single(1, 40, idx);
    const auto y = mace::ca_idft(mace::ca_dft(x, b), b);
    const auto ref = oracle::project(row(x.values, 0), idx);
    for (std::size_t t = 0; t < 40; ++t) CHECK(std::abs(y.values(0, static_cast<Eigen::Index>(t)) - ref[t]) <= 1e-10);
    CHECK(y.values.squaredNorm() <= x.values.squaredNorm() + 1e-12);
  }
}

TEST_CASE("zero spectrum inverts to a zero window") {
  mace::Spectrum s;
  s.coeffs.assign(2, std::vector<std::complex<double>>(3, 0.0));
  const auto w = mace::ca_idft(s, single(2, 40, {1, 2, 3}));
  CHECK(w.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shape mismatches are rejected") {
  CHECK_THROWS_AS(mace::ca_dft(sine_window(3, 32), single(1, 40, {3})), mace::ShapeError);
  CHECK_THROWS_AS(mace::ca_dft(sine_window(3), single(2, 40, {3})), mace::ShapeError);
  mace::Spectrum s;
  s.coeffs.assign(1, std::vector<std::complex<double>>(2, 0.0));
  CHECK_THROWS_AS(mace::ca_idft(s, single(1, 40, {3})), mace::ShapeError);
}

TEST_CASE("characterize marks each frequency") {
  const auto basis = single(1, 40, {10});
  const auto rep = mace::characterize(mace::ca_dft(sine_window(10), basis), basis);
  CHECK(rep.sin_mark(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(rep.cos_mark(0, 0)) < 1e-15);
  CHECK(rep.amplitude(0, 0) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("characterize of a zero spectrum keeps the marks") {
  const auto basis = single(2, 40, {1, 5, 20});
  mace::Spectrum s;
  s.coeffs.assign(2, std::vector<std::complex<double>>(3, 0.0));
  const auto rep = mace::characterize(s, basis);
  CHECK(rep.amplitude.cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double w = static_cast<double>(basis.indices[0][static_cast<std::size_t>(j)]);
    CHECK(rep.sin_mark(1, j) == doctest::Approx(std::sin(kTwoPi * w / 40.0)));
    CHECK(rep.cos_mark(1, j) == doctest::Approx(std::cos(kTwoPi * w / 40.0)));
  }
}

TEST_CASE("characterize amplitude channel equals the spectrum amplitudes") {
  std::mt19937_64 rng(15);
  const auto x = random_window(rng, 3, 40);
  const auto basis = mace::BasisSet::full("", 3, 40);
  const auto spec = mace::ca_dft(x, basis);
  const auto rep = mace::characterize(spec, basis);
  CHECK(rep.amplitude == spec.amplitudes());
  CHECK(rep.phase == spec.phases());
}

TEST_CASE("polar round trip") {
  std::mt19937_64 rng(16);
  const auto x = random_window(rng, 2, 40);
  const auto basis = mace::BasisSet::full("", 2, 40);
  const auto spec = mace::ca_dft(x, basis);
  const auto back = mace::Spectrum::from_polar(spec.amplitudes(), spec.phases());
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t j = 0; j < spec.k(); ++j) CHECK(std::abs(back.coeffs[f][j] - spec.coeffs[f][j]) <= 1e-12);
}

TEST_CASE("dft_amplitudes matches the direct DFT") {
  std::mt19937_64 rng(17);
  const auto x = random_window(rng, 1, 41);
  const auto a = mace::dft_amplitudes(row(x.values, 0));
  const auto ref = oracle::dft(row(x.values, 0));
  REQUIRE(a.size() == 21);
  for (std::size_t w = 0; w < a.size(); ++w) CHECK(a[w] == doctest::Approx(static_cast<double>(std::abs(ref[w]))).epsilon(1e-12));
}

TEST_CASE("basis validation") {
  auto b = single(1, 40, {3, 3});
  CHECK_THROWS_AS(b.validate(), mace::DataError);
  b = single(1, 40, {21});
  CHECK_THROWS_AS(b.validate(), mace::DataError);
  b = single(2, 40, {1, 2});
  b.indices[1].pop_back();
  b.tallies[1].pop_back();
  CHECK_THROWS_AS(b.validate(), mace::DataError);
  CHECK_NOTHROW(single(1, 40, {0, 20}).validate());
}

TEST_CASE("basis csv round trip") {
  std::mt19937_64 rng(18);
  std::vector<mace::BasisSet> bases;
  for (const char* id : {"a", "b"}) {
    std::vector<mace::TimeSeriesWindow> windows{random_window(rng, 2, 40), random_window(rng, 2, 40)};
    auto basis = mace::select_basis(windows, 4);
    basis.service_id = id;
    bases.push_back(basis);
  }
  std::stringstream ss;
  mace::write_basis_csv(ss, bases);
  const auto back = mace::read_basis_csv(ss, 40);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].service_id == bases[i].service_id);
    CHECK(back[i].indices == bases[i].indices);
    CHECK(back[i].tallies == bases[i].tallies);
  }
  std::stringstream bad("service_id,feature_index,freq_index,tally\na,0,3\n");
  CHECK_THROWS_AS(mace::read_basis_csv(bad, 40), mace::DataError);
}
