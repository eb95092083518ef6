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
#include <string>
#include <vector>

#include "mace/core.hpp"

namespace mace {

/// One service's train/test split. Matrices are [m_feat x T].
struct ServiceDataset {
  std::string service_id;
  Matrix train;
  Matrix test;
  LabelSeries test_labels;

  /// Throws DataError when feature counts or label length disagree.
  void validate() const;
};

/// Reads `<id>_train.csv`, `<id>_test.csv` and `<id>_labels.csv` for every
/// id under `root`. Rows are timestamps, columns are features; labels are one
/// 0/1 per line. Services come back sorted by id.
std::vector<ServiceDataset> load_dataset(const std::filesystem::path& root);

/// Writes a dataset in the layout load_dataset reads.
void save_dataset(const std::filesystem::path& root, const std::vector<ServiceDataset>& services);

/// Consecutive runs of `group_size` services (the last run may be shorter).
std::vector<std::vector<std::size_t>> group_services(std::size_t count,
                                                     std::size_t group_size = 10);

/// Headerless numeric CSV into a [columns x rows] matrix (transposed, so each
/// CSV column becomes one feature row).
Matrix read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, const Matrix& series);
LabelSeries read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, const LabelSeries& labels);

// ---------------------------------------------------------------------------
// Synthetic multi-pattern generator.

struct Tone {
  double frequency = 1.0;  // cycles per `period` samples
  double amplitude = 1.0;
  double phase = 0.0;
};

/// Clean periodic signal of one service: per feature, an offset plus tones.
struct SignalPattern {
  std::vector<std::vector<Tone>> features;
  std::vector<double> offsets;

  std::size_t feature_count() const { return features.size(); }
  /// Noise-free value of feature f at time t for a tone period of `period`.
  double value(std::size_t feature, double t, double period) const;
};

enum class AnomalyKind { point_spike, level_shift, contextual_swap };

struct AnomalyEvent {
  AnomalyKind kind = AnomalyKind::point_spike;
  std::size_t position = 0;
  std::size_t duration = 1;
  /// Spike/shift size in units of the feature's peak tone amplitude.
  double magnitude = 10.0;
  /// Features touched; empty means all.
  std::vector<std::size_t> features;
  /// Replacement pattern for contextual_swap.
  SignalPattern donor;
};

struct SynthSpec {
  std::string service_id;
  SignalPattern pattern;
  std::size_t period = 40;  // tone frequencies are cycles per `period` samples
  double noise = 0.05;      // Gaussian noise standard deviation
  std::size_t train_length = 1000;
  std::size_t test_length = 1000;
  std::vector<AnomalyEvent> anomalies;
  std::uint64_t seed = 0;

  /// Throws DataError on tones at or above period/2, zero durations, or
  /// events outside the test series.
  void validate() const;
};

ServiceDataset synth_generate(const SynthSpec& spec);

const char* to_string(AnomalyKind kind);
AnomalyKind anomaly_kind_from_string(const std::string& name);

}  // namespace mace
