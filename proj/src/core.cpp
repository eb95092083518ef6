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

#include "mace/core.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mace/error.hpp"

namespace mace {

bool admissible_gamma(int gamma) noexcept {
  return (gamma % 2 != 0) && std::abs(gamma) >= 3;
}

void HyperParams::validate() const {
  auto fail = [](const std::string& msg) { throw DataError("invalid hyperparameters: " + msg); };
  if (!admissible_gamma(gamma_t) || gamma_t < 0) fail("gamma_t must be an odd integer >= 3");
  if (!admissible_gamma(gamma_f) || gamma_f < 0) fail("gamma_f must be an odd integer >= 3");
  if (!(sigma_t > 0.0)) fail("sigma_t must be positive");
  if (!(sigma_f > 0.0)) fail("sigma_f must be positive");
  if (kernel_len == 0) fail("kernel_len must be positive");
  if (window_size == 0) fail("window_size must be positive");
  if (k_bases == 0) fail("k_bases must be positive");
  if (k_bases > max_bases()) {
    std::ostringstream os;
    os << "k_bases=" << k_bases << " exceeds floor(W/2)+1=" << max_bases();
    fail(os.str());
  }
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
}

Normalized minmax_normalize(const Matrix& raw, const std::optional<MinMaxStats>& stats) {
  const auto rows = static_cast<std::size_t>(raw.rows());
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
      if (!std::isfinite(raw(r, c))) {
        std::ostringstream os;
        os << "non-finite value at feature " << r << ", timestamp " << c;
        throw DataError(os.str());
      }
    }
  }

  MinMaxStats used;
  if (stats) {
    if (stats->min.size() != rows || stats->max.size() != rows) {
      throw ShapeError("normalization stats cover " + std::to_string(stats->min.size()) +
                       " features, input has " + std::to_string(rows));
    }
    for (std::size_t r = 0; r < rows; ++r) {
      if (!(stats->min[r] <= stats->max[r])) {
        throw DataError("normalization stats: min > max for feature " + std::to_string(r));
      }
    }
    used = *stats;
  } else {
    if (raw.cols() == 0) throw DataError("cannot compute normalization stats of an empty series");
    used.min.resize(rows);
    used.max.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      used.min[r] = raw.row(static_cast<Eigen::Index>(r)).minCoeff();
      used.max[r] = raw.row(static_cast<Eigen::Index>(r)).maxCoeff();
    }
  }

  Matrix out(raw.rows(), raw.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    const double lo = used.min[r];
    const double range = used.max[r] - lo;
    if (range == 0.0) {
      out.row(ri).setConstant(0.5);
    } else {
      out.row(ri) = (raw.row(ri).array() - lo) / range;
    }
  }
  return {std::move(out), std::move(used)};
}

std::vector<std::size_t> window_offsets(std::size_t length, std::size_t window,
                                        std::size_t hop) {
  if (hop == 0) throw DataError("window hop must be >= 1");
  if (window == 0) throw DataError("window size must be >= 1");
  if (length < window) {
    throw DataError("series of length " + std::to_string(length) +
                    " is shorter than the window size " + std::to_string(window));
  }
  std::vector<std::size_t> offsets;
  offsets.reserve((length - window) / hop + 1);
  for (std::size_t off = 0; off + window <= length; off += hop) offsets.push_back(off);
  return offsets;
}

std::vector<TimeSeriesWindow> sliding_windows(const Matrix& series, std::size_t window,
                                              std::size_t hop, const std::string& service_id) {
  const auto offsets = window_offsets(static_cast<std::size_t>(series.cols()), window, hop);
  std::vector<TimeSeriesWindow> out;
  out.reserve(offsets.size());
  for (const auto off : offsets) {
    out.push_back({series.middleCols(static_cast<Eigen::Index>(off),
                                     static_cast<Eigen::Index>(window)),
                   off, service_id});
  }
  return out;
}

}  // namespace mace
