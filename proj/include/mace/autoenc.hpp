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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mace/core.hpp"
#include "mace/patex.hpp"

namespace mace {

struct ModelConfig {
  std::size_t k_bases = 20;
  std::size_t kernel_len = 5;
  int gamma_f = 7;
  double sigma_f = 5.0;
  /// false replaces both branches' dualistic layer with a plain strided
  /// convolution (ablation).
  bool dualistic = true;
  /// Amplitudes are multiplied by this on the way in and divided by it on
  /// the way out; the training loss is measured in the scaled units.
  double amplitude_scale = 1.0;

  std::size_t latent() const { return (k_bases + kernel_len - 1) / kernel_len; }
  void validate() const;

  /// amplitude_scale = 2/W, so a unit sine on a basis bin maps to 1.
  static ModelConfig from(const HyperParams& hp);
};

/// One reconstruction branch. The encoder mixes the three characterization
/// channels per bin, then pools with a dualistic convolution of stride
/// kernel_len; the decoder is an affine up-map followed by max(., 0).
struct BranchParams {
  Matrix mix;                         // [3 x k]
  std::vector<double> alpha;          // [kernel_len]
  Matrix decoder;                     // [k x latent]
  std::vector<double> decoder_bias;   // [k]
};

struct ModelState {
  ModelConfig config;
  BranchParams peak;    // gamma = +gamma_f
  BranchParams valley;  // gamma = -gamma_f
  std::uint64_t steps = 0;
  double learning_rate = 0.001;

  /// Mixing and decoder weights uniform in [-0.1, 0.1], alpha = 1/kernel_len,
  /// zero decoder bias.
  static ModelState init(const ModelConfig& config, std::uint64_t seed, double learning_rate);

  std::size_t parameter_count() const;
  /// Flattened in serialization order: peak then valley; per branch mix
  /// (row-major), alpha, decoder (row-major), decoder_bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);
};

struct ForwardResult {
  Matrix recon_peak;      // [m_feat x k]
  Matrix recon_valley;    // [m_feat x k]
  Matrix latent_peak;     // [m_feat x latent]
  Matrix latent_valley;
};

ForwardResult forward(const ModelState& model, const FrequencyRepresentation& rep);

/// MSE(recon_peak, target) + MSE(recon_valley, target).
double loss(const Matrix& recon_peak, const Matrix& recon_valley, const Matrix& target);

/// Mean-over-elements training loss over a batch: loss() on amplitudes
/// multiplied by the model's amplitude_scale.
double batch_loss(const ModelState& model, std::span<const FrequencyRepresentation> batch);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // aligned with ModelState::parameters()
};

LossGradient loss_and_gradient(const ModelState& model,
                               std::span<const FrequencyRepresentation> batch);

struct TrainResult {
  ModelState model;
  std::vector<double> loss_curve;  // loss after each epoch
};

/// Sets both branches' decoder bias to the per-bin mean scaled amplitude of
/// the batch, so no output starts in the flat part of the rectifier.
void warm_start_bias(ModelState& model, std::span<const FrequencyRepresentation> batch);

/// Full-batch gradient descent. A step that raises the loss by more than
/// 1e-6 is rejected and retried at half the learning rate.
/// Throws DivergenceError if the loss is non-finite or above 1e6, or if no
/// acceptable step exists.
TrainResult train(ModelState model, std::span<const FrequencyRepresentation> batch,
                  std::size_t epochs);

/// Builds representations for the windows under `basis`, then trains.
TrainResult train(ModelState model, std::span<const TimeSeriesWindow> windows,
                  const BasisSet& basis, std::size_t epochs);

FrequencyRepresentation represent(const TimeSeriesWindow& window, const BasisSet& basis);

/// Binary file: "MACE", u16 version, then little-endian f64 values: header
/// (k_bases, kernel_len, gamma_f, sigma_f, dualistic, amplitude_scale, steps,
/// learning_rate)
/// followed by parameters(). A text manifest of shapes is written next to it
/// as `<path>.manifest`.
void save_model(const ModelState& model, const std::filesystem::path& path);
ModelState load_model(const std::filesystem::path& path);

inline constexpr std::uint16_t kModelFormatVersion = 1;

}  // namespace mace
