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

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mace/core.hpp"

namespace mace {

/// Per-feature Fourier frequency indices spanning one service's normal
/// pattern subspace.
struct BasisSet {
  std::string service_id;
  std::size_t window_size = 0;
  std::vector<std::vector<std::size_t>> indices;  // [feature][j], ascending
  std::vector<std::vector<std::size_t>> tallies;  // aligned with indices

  std::size_t features() const { return indices.size(); }
  std::size_t k() const { return indices.empty() ? 0 : indices.front().size(); }

  /// Throws DataError on duplicate, out-of-range or ragged indices.
  void validate() const;

  /// Every bin 0..floor(W/2) for every feature.
  static BasisSet full(const std::string& service_id, std::size_t features,
                       std::size_t window_size);
};

/// Complex coefficients at the basis frequencies, [m_feat x k].
struct Spectrum {
  std::vector<std::vector<std::complex<double>>> coeffs;

  std::size_t features() const { return coeffs.size(); }
  std::size_t k() const { return coeffs.empty() ? 0 : coeffs.front().size(); }
  Matrix amplitudes() const;
  Matrix phases() const;

  static Spectrum from_polar(const Matrix& amplitudes, const Matrix& phases);
};

/// The three-channel autoencoder input: amplitudes and the sin/cos marks of
/// each basis frequency. Phases ride alongside for reconstruction.
struct FrequencyRepresentation {
  Matrix amplitude;  // [m_feat x k], >= 0
  Matrix sin_mark;   // sin(2 pi w / W)
  Matrix cos_mark;   // cos(2 pi w / W)
  Matrix phase;

  std::size_t features() const { return static_cast<std::size_t>(amplitude.rows()); }
  std::size_t k() const { return static_cast<std::size_t>(amplitude.cols()); }
};

/// Tallies, per feature, how often each bin ranks among the k strongest of
/// a window's full spectrum and keeps the k most frequent bins (lower index
/// wins ties). Bins at rounding level (below 1e-10 of the window's strongest
/// bin) are not ranked.
BasisSet select_basis(std::span<const TimeSeriesWindow> windows, std::size_t k_bases);

/// DFT evaluated only at the basis frequencies by direct summation.
Spectrum ca_dft(const TimeSeriesWindow& window, const BasisSet& basis);

/// Real inverse DFT over the basis frequencies; non-DC, non-Nyquist bins
/// count twice to stand in for their conjugate partners.
TimeSeriesWindow ca_idft(const Spectrum& spectrum, const BasisSet& basis);

FrequencyRepresentation characterize(const Spectrum& spectrum, const BasisSet& basis);

/// Full one-sided DFT amplitudes |X(w)|, w = 0..floor(W/2), of one series.
std::vector<double> dft_amplitudes(std::span<const double> x);

/// CSV rows `service_id,feature_index,freq_index,tally` after a header line.
void write_basis_csv(std::ostream& os, std::span<const BasisSet> bases);
std::vector<BasisSet> read_basis_csv(std::istream& is, std::size_t window_size);

}  // namespace mace
