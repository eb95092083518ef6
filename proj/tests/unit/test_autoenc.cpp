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
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "mace/autoenc.hpp"
#include "mace/error.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

mace::ModelConfig small_config() {
  mace::ModelConfig c;
  c.k_bases = 6;
  c.kernel_len = 3;
  c.gamma_f = 7;
  c.sigma_f = 3.0;
  c.amplitude_scale = 0.05;
  return c;
}

/// Representation over bins 1..k of a W=40 window with the given amplitudes.
mace::FrequencyRepresentation make_rep(const mace::Matrix& amplitude) {
  mace::FrequencyRepresentation rep;
  rep.amplitude = amplitude;
  rep.sin_mark.resize(amplitude.rows(), amplitude.cols());
  rep.cos_mark.resize(amplitude.rows(), amplitude.cols());
  rep.phase = mace::Matrix::Zero(amplitude.rows(), amplitude.cols());
  for (Eigen::Index f = 0; f < amplitude.rows(); ++f) {
    for (Eigen::Index j = 0; j < amplitude.cols(); ++j) {
      rep.sin_mark(f, j) = std::sin(kTwoPi * static_cast<double>(j + 1) / 40.0);
      rep.cos_mark(f, j) = std::cos(kTwoPi * static_cast<double>(j + 1) / 40.0);
    }
  }
  return rep;
}

mace::FrequencyRepresentation random_rep(std::mt19937_64& rng, Eigen::Index m, Eigen::Index k,
                                         double lo = 2.0, double hi = 20.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  mace::Matrix a(m, k);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  return make_rep(a);
}

fs::path scratch(const char* name) {
  const fs::path dir = fs::path(MACE_TEST_SCRATCH);
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("loss examples") {
  mace::Matrix a(1, 2), p(1, 2), v(1, 2);
  a << 1, 0;
  p << 0, 0;
  v << 1, 0;
  CHECK(mace::loss(p, v, a) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mace::loss(a, a, a) == 0.0);
  CHECK_THROWS_AS(mace::loss(mace::Matrix::Zero(2, 2), a, a), mace::ShapeError);
}

TEST_CASE("loss is invariant to a consistent feature permutation") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  mace::Matrix a(3, 4), p(3, 4), v(3, 4);
  for (auto* m : {&a, &p, &v})
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = n(rng);
  const Eigen::Vector3i order(2, 0, 1);
  auto perm = [&](const mace::Matrix& m) {
    mace::Matrix out(3, 4);
    for (int r = 0; r < 3; ++r) out.row(r) = m.row(order[r]);
    return out;
  };
  CHECK(mace::loss(perm(p), perm(v), perm(a)) == doctest::Approx(mace::loss(p, v, a)).epsilon(1e-14));
}

TEST_CASE("zero amplitudes reconstruct to zero when the marks are ignored") {
  // With unit pooling mass and no mark contribution both latents vanish, so
  // a zero decoder bias leaves nothing to reconstruct.
  auto cfg = small_config();
  cfg.sigma_f = 1.0;
  auto model = mace::ModelState::init(cfg, 7, 0.001);
  for (auto* b : {&model.peak, &model.valley}) {
    b->mix.row(1).setZero();
    b->mix.row(2).setZero();
  }
  const auto rep = make_rep(mace::Matrix::Zero(2, 6));
  const auto out = mace::forward(model, rep);
  CHECK(out.recon_peak.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(out.recon_valley.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(out.latent_peak.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(out.latent_valley.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("forward shapes and non-negativity") {
  std::mt19937_64 rng(2);
  for (std::size_t k : {5u, 6u, 7u}) {
    auto cfg = small_config();
    cfg.k_bases = k;
    const auto model = mace::ModelState::init(cfg, 3, 0.001);
    const auto rep = random_rep(rng, 4, static_cast<Eigen::Index>(k));
    const auto out = mace::forward(model, rep);
    CHECK(out.recon_peak.rows() == 4);
    CHECK(out.recon_peak.cols() == static_cast<Eigen::Index>(k));
    CHECK(out.recon_valley.cols() == static_cast<Eigen::Index>(k));
    CHECK(out.latent_peak.cols() == static_cast<Eigen::Index>(cfg.latent()));
    CHECK(cfg.latent() == (k + 2) / 3);
    CHECK(out.recon_peak.minCoeff() >= 0.0);
    CHECK(out.recon_valley.minCoeff() >= 0.0);
  }
  const auto model = mace::ModelState::init(small_config(), 3, 0.001);
  CHECK_THROWS_AS(mace::forward(model, random_rep(rng, 2, 5)), mace::ShapeError);
}

TEST_CASE("forward is deterministic and names the failing layer") {
  std::mt19937_64 rng(4);
  auto model = mace::ModelState::init(small_config(), 5, 0.001);
  const auto rep = random_rep(rng, 2, 6);
  CHECK(mace::forward(model, rep).recon_peak == mace::forward(model, rep).recon_peak);
  model.valley.mix(0, 2) = std::numeric_limits<double>::quiet_NaN();
  try {
    mace::forward(model, rep);
    FAIL("expected NumericalError");
  } catch (const mace::NumericalError& e) {
    const std::string what = e.what();
    CHECK(what.find("valley") != std::string::npos);
    CHECK(what.find("channel mixing") != std::string::npos);
  }
}

TEST_CASE("init follows the documented ranges") {
  const auto model = mace::ModelState::init(small_config(), 9, 0.001);
  for (const auto* b : {&model.peak, &model.valley}) {
    CHECK(b->mix.cwiseAbs().maxCoeff() <= 0.1);
    CHECK(b->decoder.cwiseAbs().maxCoeff() <= 0.1);
    for (const double a : b->alpha) CHECK(a == doctest::Approx(1.0 / 3.0));
    for (const double v : b->decoder_bias) CHECK(v == 0.0);
  }
  CHECK(model.parameter_count() == model.parameters().size());
  auto bad = small_config();
  bad.gamma_f = 4;
  CHECK_THROWS_AS(mace::ModelState::init(bad, 0, 0.001), mace::InvalidKernelError);
}

TEST_CASE("batch gradient matches central differences") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    for (bool dualistic : {true, false}) {
      auto cfg = small_config();
      cfg.dualistic = dualistic;
      auto model = mace::ModelState::init(cfg, 100 + static_cast<std::uint64_t>(trial), 0.001);
      std::vector<mace::FrequencyRepresentation> batch{random_rep(rng, 2, 6), random_rep(rng, 2, 6)};
      mace::warm_start_bias(model, batch);
      const auto lg = mace::loss_and_gradient(model, batch);
      CHECK(lg.loss == doctest::Approx(mace::batch_loss(model, batch)).epsilon(1e-14));
      const auto numeric = oracle::central_diff(
          [&](const std::vector<double>& p) {
            auto m = model;
            m.set_parameters(p);
            return mace::batch_loss(m, batch);
          },
          model.parameters(), 1e-5);
      CHECK(oracle::relative_error(lg.gradient, numeric) <= 1e-4);
    }
  }
}

TEST_CASE("zero epochs leave the model untouched") {
  std::mt19937_64 rng(11);
  const auto model = mace::ModelState::init(small_config(), 1, 0.001);
  std::vector<mace::FrequencyRepresentation> batch{random_rep(rng, 2, 6)};
  const auto res = mace::train(model, batch, 0);
  CHECK(res.loss_curve.empty());
  CHECK(res.model.parameters() == model.parameters());
  CHECK(res.model.steps == 0);
}

TEST_CASE("training on one repeated window descends monotonically") {
  std::mt19937_64 rng(12);
  const auto rep = random_rep(rng, 2, 6);
  std::vector<mace::FrequencyRepresentation> batch(4, rep);
  const auto model = mace::ModelState::init(small_config(), 2, 0.001);
  const double initial = mace::batch_loss(model, batch);
  const auto res = mace::train(model, batch, 500);
  REQUIRE(res.loss_curve.size() == 500);
  CHECK(res.loss_curve.back() < initial);
  double previous = initial;
  for (const double l : res.loss_curve) {
    CHECK(l <= previous + 1e-6);
    previous = l;
  }
  CHECK(res.model.steps == 500);
}

TEST_CASE("a single window can be fitted almost exactly") {
  std::mt19937_64 rng(13);
  const auto rep = random_rep(rng, 2, 6);
  std::vector<mace::FrequencyRepresentation> batch{rep};
  auto model = mace::ModelState::init(small_config(), 3, 0.5);
  mace::warm_start_bias(model, batch);
  const auto res = mace::train(model, batch, 20000);
  const auto out = mace::forward(res.model, rep);
  CHECK((out.recon_peak - rep.amplitude).cwiseAbs().maxCoeff() <= 1e-2);
  CHECK((out.recon_valley - rep.amplitude).cwiseAbs().maxCoeff() <= 1e-2);
}

TEST_CASE("warm start sets the bias to the scaled per-bin mean") {
  mace::Matrix a(2, 6), b(2, 6);
  a.setConstant(4.0);
  b.setConstant(8.0);
  a(1, 3) = 0.0;
  std::vector<mace::FrequencyRepresentation> batch{make_rep(a), make_rep(b)};
  auto model = mace::ModelState::init(small_config(), 0, 0.001);
  mace::warm_start_bias(model, batch);
  for (std::size_t j = 0; j < 6; ++j) {
    const double expect = j == 3 ? (4.0 + 8.0 + 0.0 + 8.0) / 4.0 : 6.0;
    CHECK(model.peak.decoder_bias[j] == doctest::Approx(expect * 0.05));
    CHECK(model.valley.decoder_bias[j] == model.peak.decoder_bias[j]);
  }
}

TEST_CASE("training is bit-for-bit deterministic") {
  std::mt19937_64 rng(14);
  std::vector<mace::FrequencyRepresentation> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(random_rep(rng, 3, 6));
  auto run = [&] {
    auto model = mace::ModelState::init(small_config(), 42, 0.01);
    mace::warm_start_bias(model, batch);
    return mace::train(model, batch, 50);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.model.parameters() == b.model.parameters());
}

TEST_CASE("an untrainable start raises a divergence error at epoch 0") {
  std::mt19937_64 rng(15);
  std::vector<mace::FrequencyRepresentation> batch{random_rep(rng, 2, 6)};
  auto model = mace::ModelState::init(small_config(), 1, 0.001);
  std::fill(model.peak.decoder_bias.begin(), model.peak.decoder_bias.end(), 1e6);
  try {
    mace::train(model, batch, 10);
    FAIL("expected DivergenceError");
  } catch (const mace::DivergenceError& e) {
    CHECK(e.epoch() == 0);
  }
  CHECK_THROWS_AS(mace::train(model, std::vector<mace::FrequencyRepresentation>{}, 1), mace::DataError);
}

TEST_CASE("save and load round trip") {
  std::mt19937_64 rng(16);
  std::vector<mace::FrequencyRepresentation> batch{random_rep(rng, 2, 6)};
  auto cfg = small_config();
  cfg.dualistic = false;
  auto model = mace::ModelState::init(cfg, 4, 0.002);
  model = mace::train(model, batch, 5).model;
  const auto path = scratch("model.bin");
  mace::save_model(model, path);
  CHECK(fs::exists(path.string() + ".manifest"));
  const auto back = mace::load_model(path);
  CHECK(back.parameters() == model.parameters());
  CHECK(back.steps == model.steps);
  CHECK(back.learning_rate == model.learning_rate);
  CHECK(back.config.k_bases == cfg.k_bases);
  CHECK(back.config.kernel_len == cfg.kernel_len);
  CHECK(back.config.gamma_f == cfg.gamma_f);
  CHECK(back.config.sigma_f == cfg.sigma_f);
  CHECK(back.config.dualistic == cfg.dualistic);
  CHECK(back.config.amplitude_scale == cfg.amplitude_scale);

  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "MACE");
}

TEST_CASE("load rejects foreign, truncated and future files") {
  const auto bad = scratch("not-a-model.bin");
  std::ofstream(bad, std::ios::binary) << "NOPE1234";
  CHECK_THROWS_AS(mace::load_model(bad), mace::DataError);
  CHECK_THROWS_AS(mace::load_model(scratch("missing.bin")), mace::DataError);

  const auto good = scratch("good.bin");
  mace::save_model(mace::ModelState::init(small_config(), 0, 0.001), good);
  std::ifstream in(good, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto cut = scratch("cut.bin");
  std::ofstream(cut, std::ios::binary) << bytes.substr(0, bytes.size() - 5);
  CHECK_THROWS_AS(mace::load_model(cut), mace::DataError);
  bytes[4] = 9;
  const auto future = scratch("future.bin");
  std::ofstream(future, std::ios::binary) << bytes;
  CHECK_THROWS_AS(mace::load_model(future), mace::DataError);
}

TEST_CASE("the trained peak latent is dominated by an outlier bin") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 0.2);
  const Eigen::Index k = 6;
  auto spectrum = [&](bool outlier) {
    mace::Matrix a(1, k);
    for (Eigen::Index j = 0; j < k; ++j) a(0, j) = 2.0 + n(rng);
    if (outlier) a(0, 1) = 40.0;
    return a;
  };
  std::vector<mace::FrequencyRepresentation> batch;
  for (int i = 0; i < 20; ++i) batch.push_back(make_rep(spectrum(true)));
  auto model = mace::ModelState::init(small_config(), 5, 0.01);
  mace::warm_start_bias(model, batch);
  model = mace::train(model, batch, 300).model;

  int dominated = 0;
  for (int i = 0; i < 20; ++i) {
    auto with = spectrum(true);
    auto without = with;
    without(0, 1) = 2.0;
    const auto a = mace::forward(model, make_rep(with)).latent_peak;
    const auto b = mace::forward(model, make_rep(without)).latent_peak;
    if ((a - b).norm() >= 0.5 * a.norm()) ++dominated;
  }
  CHECK(dominated == 20);
}

TEST_CASE("high-variance spectra reconstruct worse than held-out low-variance ones") {
  std::mt19937_64 rng(18);
  const Eigen::Index k = 6;
  std::vector<double> mu{12, 4, 8, 3, 6, 5};
  auto draw = [&](double sd) {
    std::normal_distribution<double> n(0.0, sd);
    mace::Matrix a(2, k);
    for (Eigen::Index f = 0; f < 2; ++f)
      for (Eigen::Index j = 0; j < k; ++j) a(f, j) = std::max(0.0, mu[static_cast<std::size_t>(j)] + n(rng));
    return make_rep(a);
  };
  std::vector<mace::FrequencyRepresentation> train_set;
  for (int i = 0; i < 40; ++i) train_set.push_back(draw(0.3));
  auto model = mace::ModelState::init(small_config(), 6, 0.01);
  mace::warm_start_bias(model, train_set);
  model = mace::train(model, train_set, 300).model;

  auto mean_error = [&](double sd) {
    double total = 0;
    for (int i = 0; i < 200; ++i) {
      const auto rep = draw(sd);
      const auto out = mace::forward(model, rep);
      total += mace::loss(out.recon_peak, out.recon_valley, rep.amplitude);
    }
    return total / 200.0;
  };
  const double low = mean_error(0.3);
  const double high = mean_error(3.0);
  CHECK(high > low);
}
