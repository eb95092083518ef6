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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mace {

/// Row-major dense matrix. Multivariate series are stored feature-major:
/// one row per feature, one column per timestamp.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One sliding window of multivariate readings, the unit of detection.
struct TimeSeriesWindow {
  Matrix values;  // [m_feat x W]
  std::size_t start_index = 0;
  std::string service_id;

  std::size_t features() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t length() const { return static_cast<std::size_t>(values.cols()); }
};

/// Per-timestamp binary anomaly flags (0 = normal, 1 = anomaly).
using LabelSeries = std::vector<int>;

struct HyperParams {
  int gamma_t = 7;
  int gamma_f = 7;
  double sigma_t = 5.0;
  double sigma_f = 5.0;
  std::size_t kernel_len = 5;
  std::size_t window_size = 40;
  std::size_t k_bases = 20;
  double learning_rate = 0.001;

  std::size_t stride_t() const { return 1; }
  std::size_t stride_f() const { return kernel_len; }
  std::size_t max_bases() const { return window_size / 2 + 1; }

  /// Throws DataError naming the first violated constraint.
  void validate() const;
};

/// True for odd integers with |gamma| >= 3.
bool admissible_gamma(int gamma) noexcept;

/// Per-feature min/max taken from a training split.
struct MinMaxStats {
  std::vector<double> min;
  std::vector<double> max;
};

struct Normalized {
  Matrix values;
  MinMaxStats stats;
};

/// Scales each feature (row) to [0, 1] with the given stats, or with stats
/// computed from `raw` when none are given. Constant features map to 0.5.
/// Values outside the training range are not clipped.
Normalized minmax_normalize(const Matrix& raw,
                            const std::optional<MinMaxStats>& stats = std::nullopt);

/// Windows of width `window` at offsets 0, hop, 2*hop, ...; a trailing
/// partial window is dropped.
std::vector<TimeSeriesWindow> sliding_windows(const Matrix& series, std::size_t window,
                                              std::size_t hop,
                                              const std::string& service_id = {});

/// Offsets produced by sliding_windows for a series of length `length`.
std::vector<std::size_t> window_offsets(std::size_t length, std::size_t window,
                                        std::size_t hop);

}  // namespace mace
