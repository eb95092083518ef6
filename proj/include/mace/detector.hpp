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
#include <optional>
#include <span>
#include <vector>

#include "mace/autoenc.hpp"
#include "mace/core.hpp"
#include "mace/dataset.hpp"
#include "mace/patex.hpp"

namespace mace {

struct AnomalyScoreSeries {
  std::vector<double> scores;
  double threshold = 0.0;
  std::vector<int> predictions;  // predictions[t] == (scores[t] > threshold)
};

/// Switches for the ablation variants plus the stage knobs that are not
/// model hyperparameters.
struct PipelineOptions {
  bool amplify_time = true;        // false: --no-dualconv-t
  bool pattern_extraction = true;  // false: --no-patex (full spectrum)
  bool dualistic_freq = true;      // false: --no-dualconv-f
  std::size_t basis_hop = 0;       // 0 means W (disjoint windows)
  std::size_t train_hop = 4;
  std::size_t epochs = 300;
  std::uint64_t seed = 0;
};

/// Per-service preprocessing state: normalization stats and basis.
struct ServiceModel {
  MinMaxStats stats;
  BasisSet basis;
};

/// Normalizes with `stats` and, unless disabled, amplifies in time.
Matrix prepare_series(const Matrix& raw, const MinMaxStats& stats, const HyperParams& hp,
                      const PipelineOptions& opts);

/// Pointwise score of one pipeline-input (already amplified) window: both
/// branch reconstructions go back to time through ca_idft with the window's
/// own phases, and each timestamp keeps the larger of the two
/// feature-averaged squared errors.
std::vector<double> score_window(const ModelState& model, const BasisSet& basis,
                                 const TimeSeriesWindow& window);

/// Per-timestamp mean of all window scores covering it.
std::vector<double> aggregate(std::span<const std::vector<double>> window_scores,
                              std::span<const std::size_t> offsets, std::size_t length);

struct ThresholdMode {
  enum class Kind { best_f1, quantile } kind = Kind::best_f1;
  double q = 0.99;

  static ThresholdMode best_f1() { return {Kind::best_f1, 0.0}; }
  static ThresholdMode quantile(double q) { return {Kind::quantile, q}; }
};

/// best_f1 scans every distinct score as a threshold (flagging scores above
/// it) and keeps the lowest threshold with the highest F1; quantile returns
/// the linearly interpolated q-quantile.
double choose_threshold(std::span<const double> scores, const std::optional<LabelSeries>& labels,
                        const ThresholdMode& mode);

std::vector<int> apply_threshold(std::span<const double> scores, double threshold);

/// Fills every labelled segment that contains at least one detection.
std::vector<int> point_adjust(std::span<const int> predictions, std::span<const int> labels);

struct GroupFit {
  std::vector<ServiceModel> services;  // aligned with the input datasets
  ModelState model;
  std::vector<double> loss_curve;
};

/// Per-service normalization and basis selection, then one model trained on
/// the union of all services' frequency representations.
GroupFit fit_service_group(std::span<const ServiceDataset> datasets, const HyperParams& hp,
                           const PipelineOptions& opts);

/// Trains one model on the union of the services' training windows (hop
/// opts.train_hop), given their already fitted preprocessing state.
TrainResult train_group(std::span<const ServiceDataset> datasets,
                        std::span<const ServiceModel> services, const HyperParams& hp,
                        const PipelineOptions& opts);

/// Same as the preprocessing half of fit_service_group for one service.
ServiceModel preprocess_service(const ServiceDataset& dataset, const HyperParams& hp,
                                const PipelineOptions& opts);

/// Scores every timestamp of `raw` (hop 1) under the given service state.
std::vector<double> detect_series(const ModelState& model, const ServiceModel& service,
                                  const Matrix& raw, const HyperParams& hp,
                                  const PipelineOptions& opts);

}  // namespace mace
