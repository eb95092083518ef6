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

#include "mace/autoenc.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "mace/dualconv.hpp"
#include "mace/error.hpp"

namespace mace {

namespace {

constexpr double kDivergenceLoss = 1e6;
constexpr double kIncreaseTolerance = 1e-6;
constexpr double kMinLearningRateFraction = 1e-12;

// Intermediate values of one branch on one feature row, kept for backprop.
struct RowTrace {
  std::vector<double> z;
  std::vector<double> x;  // padded encoder input
  double shift = 0.0;
  std::size_t argmin = 0;
  std::vector<detail::PowerSum> sums;
  std::vector<double> latent;
  std::vector<double> pre;
  std::vector<double> recon;
};

struct BranchSpec {
  int gamma;
  bool shifted;  // valley pre-shift and segment-mean padding
};

BranchSpec spec_for(const ModelConfig& cfg, bool valley) {
  return {valley ? -cfg.gamma_f : cfg.gamma_f, valley && cfg.dualistic};
}

[[noreturn]] void non_finite(const char* branch, const char* layer) {
  throw NumericalError(std::string("non-finite activation in ") + branch + " " + layer);
}

void branch_forward(const BranchParams& p, const ModelConfig& cfg, bool valley,
                    const double* amp, const double* sin_mark, const double* cos_mark,
                    RowTrace& tr) {
  const std::size_t k = cfg.k_bases;
  const std::size_t len = cfg.kernel_len;
  const std::size_t nl = cfg.latent();
  const auto spec = spec_for(cfg, valley);
  const char* name = valley ? "valley" : "peak";

  tr.z.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    tr.z[j] = p.mix(0, c) * amp[j] * cfg.amplitude_scale + p.mix(1, c) * sin_mark[j] + p.mix(2, c) * cos_mark[j];
    if (!std::isfinite(tr.z[j])) non_finite(name, "channel mixing");
  }

  tr.x.assign(nl * len, 0.0);
  tr.shift = 0.0;
  if (spec.shifted) {
    tr.argmin = static_cast<std::size_t>(std::min_element(tr.z.begin(), tr.z.end()) - tr.z.begin());
    tr.shift = kValleyFloor - tr.z[tr.argmin];
    for (std::size_t j = 0; j < k; ++j) tr.x[j] = tr.z[j] + tr.shift;
    const std::size_t tail = (nl - 1) * len;
    if (k < nl * len) {
      double mean = 0.0;
      for (std::size_t j = tail; j < k; ++j) mean += tr.x[j];
      mean /= static_cast<double>(k - tail);
      for (std::size_t j = k; j < nl * len; ++j) tr.x[j] = mean;
    }
  } else {
    std::copy(tr.z.begin(), tr.z.end(), tr.x.begin());
  }

  tr.latent.resize(nl);
  tr.sums.resize(nl);
  const std::span<const double> xs(tr.x);
  for (std::size_t l = 0; l < nl; ++l) {
    const auto window = xs.subspan(l * len, len);
    if (cfg.dualistic) {
      tr.sums[l] = detail::power_sum(window, p.alpha, spec.gamma, cfg.sigma_f);
      tr.latent[l] = detail::odd_root(tr.sums[l], spec.gamma) - tr.shift;
    } else {
      double acc = 0.0;
      for (std::size_t i = 0; i < len; ++i) acc += p.alpha[i] * window[i];
      tr.latent[l] = acc / cfg.sigma_f;
    }
    if (!std::isfinite(tr.latent[l])) non_finite(name, "dualistic convolution");
  }

  tr.pre.resize(k);
  tr.recon.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    double acc = p.decoder_bias[j];
    for (std::size_t l = 0; l < nl; ++l) {
      acc += p.decoder(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) * tr.latent[l];
    }
    if (!std::isfinite(acc)) non_finite(name, "decoder");
    tr.pre[j] = acc;
    tr.recon[j] = std::max(acc, 0.0);
  }
}

void branch_backward(const BranchParams& p, const ModelConfig& cfg, bool valley,
                     const double* amp, const double* sin_mark, const double* cos_mark,
                     const RowTrace& tr, std::span<const double> g_recon, BranchParams& g) {
  const std::size_t k = cfg.k_bases;
  const std::size_t len = cfg.kernel_len;
  const std::size_t nl = cfg.latent();
  const auto spec = spec_for(cfg, valley);

  std::vector<double> g_latent(nl, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    if (tr.pre[j] <= 0.0) continue;
    const double gp = g_recon[j];
    g.decoder_bias[j] += gp;
    for (std::size_t l = 0; l < nl; ++l) {
      const auto r = static_cast<Eigen::Index>(j);
      const auto c = static_cast<Eigen::Index>(l);
      g.decoder(r, c) += gp * tr.latent[l];
      g_latent[l] += p.decoder(r, c) * gp;
    }
  }

  std::vector<double> g_x(nl * len, 0.0);
  const std::span<const double> xs(tr.x);
  for (std::size_t l = 0; l < nl; ++l) {
    const auto window = xs.subspan(l * len, len);
    if (cfg.dualistic) {
      detail::window_grad(window, p.alpha, spec.gamma, cfg.sigma_f, tr.sums[l], g_latent[l],
                          std::span<double>(g_x).subspan(l * len, len), g.alpha);
    } else {
      for (std::size_t i = 0; i < len; ++i) {
        g_x[l * len + i] += p.alpha[i] * g_latent[l] / cfg.sigma_f;
        g.alpha[i] += window[i] * g_latent[l] / cfg.sigma_f;
      }
    }
  }

  std::vector<double> g_z(g_x.begin(), g_x.begin() + static_cast<long>(k));
  if (spec.shifted) {
    const std::size_t tail = (nl - 1) * len;
    const double count = static_cast<double>(k - tail);
    for (std::size_t j = k; j < nl * len; ++j) {
      for (std::size_t t = tail; t < k; ++t) g_z[t] += g_x[j] / count;
    }
    // latent = root(x) - shift, x = z + shift, shift = floor - min(z)
    double g_shift = 0.0;
    for (std::size_t l = 0; l < nl; ++l) g_shift -= g_latent[l];
    for (std::size_t j = 0; j < k; ++j) g_shift += g_z[j];
    g_z[tr.argmin] -= g_shift;
  }

  for (std::size_t j = 0; j < k; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    g.mix(0, c) += g_z[j] * amp[j] * cfg.amplitude_scale;
    g.mix(1, c) += g_z[j] * sin_mark[j];
    g.mix(2, c) += g_z[j] * cos_mark[j];
  }
}

BranchParams zeros_like(const ModelConfig& cfg) {
  const auto k = static_cast<Eigen::Index>(cfg.k_bases);
  return {Matrix::Zero(3, k), std::vector<double>(cfg.kernel_len, 0.0),
          Matrix::Zero(k, static_cast<Eigen::Index>(cfg.latent())),
          std::vector<double>(cfg.k_bases, 0.0)};
}

void append(std::vector<double>& out, const BranchParams& p) {
  out.insert(out.end(), p.mix.data(), p.mix.data() + p.mix.size());
  out.insert(out.end(), p.alpha.begin(), p.alpha.end());
  out.insert(out.end(), p.decoder.data(), p.decoder.data() + p.decoder.size());
  out.insert(out.end(), p.decoder_bias.begin(), p.decoder_bias.end());
}

std::size_t extract(std::span<const double> in, BranchParams& p) {
  std::size_t pos = 0;
  auto take = [&](double* dst, std::size_t n) {
    std::copy(in.begin() + static_cast<long>(pos), in.begin() + static_cast<long>(pos + n), dst);
    pos += n;
  };
  take(p.mix.data(), static_cast<std::size_t>(p.mix.size()));
  take(p.alpha.data(), p.alpha.size());
  take(p.decoder.data(), static_cast<std::size_t>(p.decoder.size()));
  take(p.decoder_bias.data(), p.decoder_bias.size());
  return pos;
}

std::size_t branch_size(const ModelConfig& cfg) {
  return 3 * cfg.k_bases + cfg.kernel_len + cfg.k_bases * cfg.latent() + cfg.k_bases;
}

void check_rep(const ModelConfig& cfg, const FrequencyRepresentation& rep) {
  const auto k = static_cast<Eigen::Index>(cfg.k_bases);
  const auto m = rep.amplitude.rows();
  if (rep.amplitude.cols() != k || rep.sin_mark.rows() != m || rep.sin_mark.cols() != k ||
      rep.cos_mark.rows() != m || rep.cos_mark.cols() != k) {
    throw ShapeError("frequency representation has " + std::to_string(rep.amplitude.cols()) +
                     " bins, model expects " + std::to_string(cfg.k_bases));
  }
}

const double* row_ptr(const Matrix& m, Eigen::Index r) { return m.data() + r * m.cols(); }

}  // namespace

void ModelConfig::validate() const {
  if (k_bases == 0) throw DataError("model needs at least one basis");
  if (kernel_len == 0) throw DataError("model kernel length must be positive");
  if (!admissible_gamma(gamma_f) || gamma_f < 0) {
    throw InvalidKernelError("gamma_f must be an odd integer >= 3");
  }
  if (!(sigma_f > 0.0)) throw InvalidKernelError("sigma_f must be positive");
  if (!(amplitude_scale > 0.0) || !std::isfinite(amplitude_scale)) {
    throw DataError("amplitude scale must be positive and finite");
  }
}

ModelConfig ModelConfig::from(const HyperParams& hp) {
  return {hp.k_bases, hp.kernel_len, hp.gamma_f, hp.sigma_f, true,
          2.0 / static_cast<double>(hp.window_size)};
}

ModelState ModelState::init(const ModelConfig& config, std::uint64_t seed, double learning_rate) {
  config.validate();
  ModelState s;
  s.config = config;
  s.learning_rate = learning_rate;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  for (BranchParams* b : {&s.peak, &s.valley}) {
    *b = zeros_like(config);
    for (Eigen::Index i = 0; i < b->mix.size(); ++i) b->mix.data()[i] = dist(rng);
    std::fill(b->alpha.begin(), b->alpha.end(), 1.0 / static_cast<double>(config.kernel_len));
    for (Eigen::Index i = 0; i < b->decoder.size(); ++i) b->decoder.data()[i] = dist(rng);
  }
  return s;
}

std::size_t ModelState::parameter_count() const { return 2 * branch_size(config); }

std::vector<double> ModelState::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  append(out, peak);
  append(out, valley);
  return out;
}

void ModelState::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw ShapeError("expected " + std::to_string(parameter_count()) + " parameters, got " +
                     std::to_string(values.size()));
  }
  const std::size_t used = extract(values, peak);
  extract(values.subspan(used), valley);
}

FrequencyRepresentation represent(const TimeSeriesWindow& window, const BasisSet& basis) {
  return characterize(ca_dft(window, basis), basis);
}

ForwardResult forward(const ModelState& model, const FrequencyRepresentation& rep) {
  const auto& cfg = model.config;
  check_rep(cfg, rep);
  const auto m = rep.amplitude.rows();
  const auto k = static_cast<Eigen::Index>(cfg.k_bases);
  const auto nl = static_cast<Eigen::Index>(cfg.latent());
  ForwardResult out{Matrix(m, k), Matrix(m, k), Matrix(m, nl), Matrix(m, nl)};
  RowTrace tr;
  for (Eigen::Index f = 0; f < m; ++f) {
    const double* a = row_ptr(rep.amplitude, f);
    const double* s = row_ptr(rep.sin_mark, f);
    const double* c = row_ptr(rep.cos_mark, f);
    branch_forward(model.peak, cfg, false, a, s, c, tr);
    for (Eigen::Index j = 0; j < k; ++j) out.recon_peak(f, j) = tr.recon[static_cast<std::size_t>(j)] / cfg.amplitude_scale;
    for (Eigen::Index l = 0; l < nl; ++l) out.latent_peak(f, l) = tr.latent[static_cast<std::size_t>(l)];
    branch_forward(model.valley, cfg, true, a, s, c, tr);
    for (Eigen::Index j = 0; j < k; ++j) out.recon_valley(f, j) = tr.recon[static_cast<std::size_t>(j)] / cfg.amplitude_scale;
    for (Eigen::Index l = 0; l < nl; ++l) out.latent_valley(f, l) = tr.latent[static_cast<std::size_t>(l)];
  }
  return out;
}

double loss(const Matrix& recon_peak, const Matrix& recon_valley, const Matrix& target) {
  if (recon_peak.rows() != target.rows() || recon_peak.cols() != target.cols() ||
      recon_valley.rows() != target.rows() || recon_valley.cols() != target.cols()) {
    throw ShapeError("loss operands differ in shape");
  }
  if (target.size() == 0) return 0.0;
  const double n = static_cast<double>(target.size());
  return (recon_peak - target).squaredNorm() / n + (recon_valley - target).squaredNorm() / n;
}

double batch_loss(const ModelState& model, std::span<const FrequencyRepresentation> batch) {
  double sum = 0.0;
  double count = 0.0;
  for (const auto& rep : batch) {
    const auto fr = forward(model, rep);
    const double s2 = model.config.amplitude_scale * model.config.amplitude_scale;
    sum += s2 * ((fr.recon_peak - rep.amplitude).squaredNorm() +
                 (fr.recon_valley - rep.amplitude).squaredNorm());
    count += static_cast<double>(rep.amplitude.size());
  }
  return count > 0.0 ? sum / count : 0.0;
}

LossGradient loss_and_gradient(const ModelState& model,
                               std::span<const FrequencyRepresentation> batch) {
  const auto& cfg = model.config;
  double count = 0.0;
  for (const auto& rep : batch) {
    check_rep(cfg, rep);
    count += static_cast<double>(rep.amplitude.size());
  }
  BranchParams g_peak = zeros_like(cfg);
  BranchParams g_valley = zeros_like(cfg);
  LossGradient out;
  if (count == 0.0) {
    out.gradient.assign(model.parameter_count(), 0.0);
    return out;
  }

  const std::size_t k = cfg.k_bases;
  RowTrace tr;
  std::vector<double> g_recon(k);
  double sum = 0.0;
  for (const auto& rep : batch) {
    for (Eigen::Index f = 0; f < rep.amplitude.rows(); ++f) {
      const double* a = row_ptr(rep.amplitude, f);
      const double* s = row_ptr(rep.sin_mark, f);
      const double* c = row_ptr(rep.cos_mark, f);
      for (const bool valley : {false, true}) {
        const BranchParams& p = valley ? model.valley : model.peak;
        branch_forward(p, cfg, valley, a, s, c, tr);
        for (std::size_t j = 0; j < k; ++j) {
          const double diff = tr.recon[j] - a[j] * cfg.amplitude_scale;
          sum += diff * diff;
          g_recon[j] = 2.0 * diff / count;
        }
        branch_backward(p, cfg, valley, a, s, c, tr, g_recon, valley ? g_valley : g_peak);
      }
    }
  }
  out.loss = sum / count;
  out.gradient.reserve(model.parameter_count());
  append(out.gradient, g_peak);
  append(out.gradient, g_valley);
  return out;
}

void warm_start_bias(ModelState& model, std::span<const FrequencyRepresentation> batch) {
  const auto& cfg = model.config;
  std::vector<double> mean(cfg.k_bases, 0.0);
  double rows = 0.0;
  for (const auto& rep : batch) {
    check_rep(cfg, rep);
    for (Eigen::Index f = 0; f < rep.amplitude.rows(); ++f) {
      for (std::size_t j = 0; j < cfg.k_bases; ++j) {
        mean[j] += rep.amplitude(f, static_cast<Eigen::Index>(j));
      }
      rows += 1.0;
    }
  }
  if (rows == 0.0) return;
  for (auto& v : mean) v *= cfg.amplitude_scale / rows;
  model.peak.decoder_bias = mean;
  model.valley.decoder_bias = mean;
}

TrainResult train(ModelState model, std::span<const FrequencyRepresentation> batch,
                  std::size_t epochs) {
  TrainResult result{std::move(model), {}};
  if (epochs == 0) return result;
  if (batch.empty()) throw DataError("training needs at least one window");

  auto acceptable = [](double loss) { return std::isfinite(loss) && loss <= kDivergenceLoss; };

  auto current = loss_and_gradient(result.model, batch);
  if (!acceptable(current.loss)) {
    throw DivergenceError("initial loss " + std::to_string(current.loss) + " is not trainable", 0);
  }
  const double lr_floor = result.model.learning_rate * kMinLearningRateFraction;
  double lr = result.model.learning_rate;
  result.loss_curve.reserve(epochs);
  ModelState trial = result.model;
  std::vector<double> params;
  std::vector<double> candidate;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    params = result.model.parameters();
    candidate.resize(params.size());
    LossGradient next;
    while (true) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        candidate[i] = params[i] - lr * current.gradient[i];
      }
      trial.set_parameters(candidate);
      bool ok = false;
      try {
        next = loss_and_gradient(trial, batch);
        ok = acceptable(next.loss) && next.loss <= current.loss + kIncreaseTolerance;
      } catch (const NumericalError&) {
        ok = false;
      }
      if (ok) break;
      lr *= 0.5;
      if (lr < lr_floor) {
        throw DivergenceError("no descent step found at epoch " + std::to_string(epoch), epoch);
      }
    }
    trial.steps = result.model.steps + 1;
    trial.learning_rate = lr;
    std::swap(result.model, trial);
    current = std::move(next);
    result.loss_curve.push_back(current.loss);
  }
  return result;
}

TrainResult train(ModelState model, std::span<const TimeSeriesWindow> windows,
                  const BasisSet& basis, std::size_t epochs) {
  if (windows.empty()) throw DataError("training needs at least one window");
  std::vector<FrequencyRepresentation> batch;
  batch.reserve(windows.size());
  for (const auto& w : windows) batch.push_back(represent(w, basis));
  return train(std::move(model), batch, epochs);
}

namespace {

void put_f64(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> bytes{};
  for (auto& b : bytes) {
    b = static_cast<char>(bits & 0xFFu);
    bits >>= 8;
  }
  os.write(bytes.data(), bytes.size());
}

double get_f64(std::istream& is, const std::filesystem::path& path) {
  std::array<unsigned char, 8> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw DataError("model file " + path.string() + " is truncated");
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 8; i-- > 0;) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_model(const ModelState& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write model file " + path.string());
  os.write("MACE", 4);
  const std::uint16_t version = kModelFormatVersion;
  const char ver[2] = {static_cast<char>(version & 0xFFu), static_cast<char>(version >> 8)};
  os.write(ver, 2);
  const auto& c = model.config;
  for (const double v : {static_cast<double>(c.k_bases), static_cast<double>(c.kernel_len),
                         static_cast<double>(c.gamma_f), c.sigma_f, c.dualistic ? 1.0 : 0.0,
                         c.amplitude_scale, static_cast<double>(model.steps),
                         model.learning_rate}) {
    put_f64(os, v);
  }
  for (const double v : model.parameters()) put_f64(os, v);
  if (!os) throw DataError("failed writing model file " + path.string());

  std::ofstream man(path.string() + ".manifest");
  if (!man) throw DataError("cannot write model manifest for " + path.string());
  const auto k = c.k_bases;
  man << "format MACE " << version << "\n"
      << "header 8 k_bases kernel_len gamma_f sigma_f dualistic amplitude_scale steps "
         "learning_rate\n";
  for (const char* branch : {"peak", "valley"}) {
    man << branch << ".mix 3 " << k << "\n"
        << branch << ".alpha " << c.kernel_len << "\n"
        << branch << ".decoder " << k << ' ' << c.latent() << "\n"
        << branch << ".decoder_bias " << k << "\n";
  }
  man << "parameters " << model.parameter_count() << "\n";
}

ModelState load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open model file " + path.string());
  char magic[4] = {};
  unsigned char ver[2] = {};
  if (!is.read(magic, 4) || std::string(magic, 4) != "MACE") {
    throw DataError(path.string() + " is not a MACE model file");
  }
  if (!is.read(reinterpret_cast<char*>(ver), 2)) throw DataError(path.string() + " is truncated");
  const auto version = static_cast<std::uint16_t>(ver[0] | (ver[1] << 8));
  if (version != kModelFormatVersion) {
    throw DataError("unsupported model format version " + std::to_string(version));
  }
  std::array<double, 8> header{};
  for (auto& h : header) h = get_f64(is, path);
  ModelConfig cfg{static_cast<std::size_t>(header[0]), static_cast<std::size_t>(header[1]),
                  static_cast<int>(header[2]), header[3], header[4] != 0.0, header[5]};
  cfg.validate();
  ModelState s = ModelState::init(cfg, 0, header[7]);
  s.steps = static_cast<std::uint64_t>(header[6]);
  std::vector<double> params(s.parameter_count());
  for (auto& p : params) p = get_f64(is, path);
  s.set_parameters(params);
  return s;
}

}  // namespace mace
