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

#include "mace/patex.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mace/error.hpp"
#include "text_util.hpp"

namespace mace {

namespace {

constexpr double kRankFloor = 1e-10;

// cos/sin of 2*pi*r/W for r = 0..W-1; angles are reduced mod W by index.
struct Twiddles {
  std::size_t size = 0;
  std::vector<double> cos_table;
  std::vector<double> sin_table;
};

const Twiddles& twiddles(std::size_t window) {
  thread_local Twiddles cache;
  if (cache.size != window) {
    cache.size = window;
    cache.cos_table.resize(window);
    cache.sin_table.resize(window);
    for (std::size_t r = 0; r < window; ++r) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) /
                           static_cast<double>(window);
      cache.cos_table[r] = std::cos(angle);
      cache.sin_table[r] = std::sin(angle);
    }
  }
  return cache;
}

std::complex<double> dft_bin(std::span<const double> x, std::size_t freq, const Twiddles& tw) {
  const std::size_t n = x.size();
  double re = 0.0;
  double im = 0.0;
  std::size_t r = 0;  // (freq * t) mod n
  for (std::size_t t = 0; t < n; ++t) {
    re += x[t] * tw.cos_table[r];
    im -= x[t] * tw.sin_table[r];
    r += freq;
    if (r >= n) r -= n;
  }
  return {re, im};
}

void check_window(const TimeSeriesWindow& window, const BasisSet& basis) {
  if (window.length() != basis.window_size) {
    throw ShapeError("window length " + std::to_string(window.length()) +
                     " does not match basis window size " + std::to_string(basis.window_size));
  }
  if (window.features() != basis.features()) {
    throw ShapeError("window has " + std::to_string(window.features()) +
                     " features, basis covers " + std::to_string(basis.features()));
  }
}

void check_spectrum(const Spectrum& spectrum, const BasisSet& basis) {
  if (spectrum.features() != basis.features() || spectrum.k() != basis.k()) {
    throw ShapeError("spectrum shape " + std::to_string(spectrum.features()) + "x" +
                     std::to_string(spectrum.k()) + " does not match basis " +
                     std::to_string(basis.features()) + "x" + std::to_string(basis.k()));
  }
}

}  // namespace

void BasisSet::validate() const {
  if (window_size == 0) throw DataError("basis window size must be positive");
  const std::size_t bins = window_size / 2 + 1;
  if (tallies.size() != indices.size()) throw DataError("basis tallies are not aligned");
  for (std::size_t f = 0; f < indices.size(); ++f) {
    const auto& idx = indices[f];
    if (idx.size() != k() || tallies[f].size() != idx.size()) {
      throw DataError("basis for service '" + service_id + "' is ragged at feature " +
                      std::to_string(f));
    }
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (idx[j] >= bins) {
        throw DataError("basis frequency " + std::to_string(idx[j]) + " out of range for W=" +
                        std::to_string(window_size));
      }
      if (j > 0 && idx[j] <= idx[j - 1]) {
        throw DataError("basis indices for feature " + std::to_string(f) +
                        " must be unique and ascending");
      }
    }
  }
}

BasisSet BasisSet::full(const std::string& service_id, std::size_t features,
                        std::size_t window_size) {
  BasisSet b;
  b.service_id = service_id;
  b.window_size = window_size;
  std::vector<std::size_t> all(window_size / 2 + 1);
  std::iota(all.begin(), all.end(), std::size_t{0});
  b.indices.assign(features, all);
  b.tallies.assign(features, std::vector<std::size_t>(all.size(), 0));
  return b;
}

Matrix Spectrum::amplitudes() const {
  Matrix out(static_cast<Eigen::Index>(features()), static_cast<Eigen::Index>(k()));
  for (std::size_t i = 0; i < features(); ++i) {
    for (std::size_t j = 0; j < k(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::abs(coeffs[i][j]);
    }
  }
  return out;
}

Matrix Spectrum::phases() const {
  Matrix out(static_cast<Eigen::Index>(features()), static_cast<Eigen::Index>(k()));
  for (std::size_t i = 0; i < features(); ++i) {
    for (std::size_t j = 0; j < k(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::arg(coeffs[i][j]);
    }
  }
  return out;
}

Spectrum Spectrum::from_polar(const Matrix& amplitudes, const Matrix& phases) {
  if (amplitudes.rows() != phases.rows() || amplitudes.cols() != phases.cols()) {
    throw ShapeError("amplitude and phase matrices differ in shape");
  }
  Spectrum s;
  s.coeffs.resize(static_cast<std::size_t>(amplitudes.rows()));
  for (Eigen::Index i = 0; i < amplitudes.rows(); ++i) {
    auto& row = s.coeffs[static_cast<std::size_t>(i)];
    row.resize(static_cast<std::size_t>(amplitudes.cols()));
    for (Eigen::Index j = 0; j < amplitudes.cols(); ++j) {
      row[static_cast<std::size_t>(j)] = std::polar(amplitudes(i, j), phases(i, j));
    }
  }
  return s;
}

std::vector<double> dft_amplitudes(std::span<const double> x) {
  const auto& tw = twiddles(x.size());
  std::vector<double> out(x.size() / 2 + 1);
  for (std::size_t w = 0; w < out.size(); ++w) out[w] = std::abs(dft_bin(x, w, tw));
  return out;
}

BasisSet select_basis(std::span<const TimeSeriesWindow> windows, std::size_t k_bases) {
  if (windows.empty()) throw DataError("basis selection needs at least one window");
  const std::size_t width = windows.front().length();
  const std::size_t features = windows.front().features();
  const std::size_t bins = width / 2 + 1;
  if (k_bases == 0 || k_bases > bins) {
    throw DataError("k_bases=" + std::to_string(k_bases) + " must lie in [1, " +
                    std::to_string(bins) + "] for W=" + std::to_string(width));
  }

  BasisSet basis;
  basis.service_id = windows.front().service_id;
  basis.window_size = width;
  basis.indices.resize(features);
  basis.tallies.resize(features);

  std::vector<double> row(width);
  std::vector<std::size_t> order(bins);
  for (std::size_t f = 0; f < features; ++f) {
    std::vector<std::size_t> tally(bins, 0);
    for (const auto& w : windows) {
      if (w.length() != width || w.features() != features) {
        throw ShapeError("basis selection windows differ in shape");
      }
      for (std::size_t t = 0; t < width; ++t) {
        row[t] = w.values(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t));
      }
      const auto amps = dft_amplitudes(row);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return amps[a] > amps[b]; });
      const double floor = kRankFloor * amps[order.front()];
      for (std::size_t r = 0; r < k_bases; ++r) {
        if (amps[order[r]] <= floor) break;
        ++tally[order[r]];
      }
    }

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tally[a] > tally[b]; });
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<long>(k_bases));
    std::sort(chosen.begin(), chosen.end());
    basis.tallies[f].reserve(k_bases);
    for (const auto idx : chosen) basis.tallies[f].push_back(tally[idx]);
    basis.indices[f] = std::move(chosen);
  }
  return basis;
}

Spectrum ca_dft(const TimeSeriesWindow& window, const BasisSet& basis) {
  check_window(window, basis);
  const auto& tw = twiddles(basis.window_size);
  Spectrum s;
  s.coeffs.resize(basis.features());
  std::vector<double> row(basis.window_size);
  for (std::size_t f = 0; f < basis.features(); ++f) {
    for (std::size_t t = 0; t < row.size(); ++t) {
      row[t] = window.values(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t));
    }
    auto& out = s.coeffs[f];
    out.reserve(basis.k());
    for (const auto w : basis.indices[f]) out.push_back(dft_bin(row, w, tw));
  }
  return s;
}

TimeSeriesWindow ca_idft(const Spectrum& spectrum, const BasisSet& basis) {
  check_spectrum(spectrum, basis);
  const std::size_t n = basis.window_size;
  const auto& tw = twiddles(n);
  TimeSeriesWindow out;
  out.service_id = basis.service_id;
  out.values = Matrix::Zero(static_cast<Eigen::Index>(basis.features()),
                            static_cast<Eigen::Index>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t f = 0; f < basis.features(); ++f) {
    for (std::size_t j = 0; j < basis.k(); ++j) {
      const std::size_t w = basis.indices[f][j];
      const bool self_conjugate = (w == 0) || (n % 2 == 0 && 2 * w == n);
      const double weight = (self_conjugate ? 1.0 : 2.0) * inv_n;
      const double re = spectrum.coeffs[f][j].real();
      const double im = spectrum.coeffs[f][j].imag();
      std::size_t r = 0;
      for (std::size_t t = 0; t < n; ++t) {
        // Re[F e^{+i theta}] = re cos - im sin
        out.values(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t)) +=
            weight * (re * tw.cos_table[r] - im * tw.sin_table[r]);
        r += w;
        if (r >= n) r -= n;
      }
    }
  }
  return out;
}

FrequencyRepresentation characterize(const Spectrum& spectrum, const BasisSet& basis) {
  check_spectrum(spectrum, basis);
  FrequencyRepresentation rep;
  rep.amplitude = spectrum.amplitudes();
  rep.phase = spectrum.phases();
  rep.sin_mark.resize(rep.amplitude.rows(), rep.amplitude.cols());
  rep.cos_mark.resize(rep.amplitude.rows(), rep.amplitude.cols());
  const auto& tw = twiddles(basis.window_size);
  for (std::size_t f = 0; f < basis.features(); ++f) {
    for (std::size_t j = 0; j < basis.k(); ++j) {
      const std::size_t w = basis.indices[f][j];
      rep.sin_mark(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(j)) = tw.sin_table[w];
      rep.cos_mark(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(j)) = tw.cos_table[w];
    }
  }
  return rep;
}

void write_basis_csv(std::ostream& os, std::span<const BasisSet> bases) {
  os << "service_id,feature_index,freq_index,tally\n";
  for (const auto& b : bases) {
    for (std::size_t f = 0; f < b.features(); ++f) {
      for (std::size_t j = 0; j < b.k(); ++j) {
        os << b.service_id << ',' << f << ',' << b.indices[f][j] << ',' << b.tallies[f][j]
           << '\n';
      }
    }
  }
}

std::vector<BasisSet> read_basis_csv(std::istream& is, std::size_t window_size) {
  std::map<std::string, std::map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>>>
      rows;
  std::vector<std::string> order;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("service_id", 0) == 0) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != 4) {
      throw DataError("basis csv line " + std::to_string(line_no) + ": expected 4 cells, got " +
                      std::to_string(cells.size()));
    }
    const auto feature = text::parse_size(cells[1], "basis csv line " + std::to_string(line_no));
    const auto freq = text::parse_size(cells[2], "basis csv line " + std::to_string(line_no));
    const auto tally = text::parse_size(cells[3], "basis csv line " + std::to_string(line_no));
    if (!rows.contains(cells[0])) order.push_back(cells[0]);
    rows[cells[0]][feature].emplace_back(freq, tally);
  }

  std::vector<BasisSet> out;
  for (const auto& id : order) {
    BasisSet b;
    b.service_id = id;
    b.window_size = window_size;
    std::size_t expected = 0;
    for (const auto& [feature, entries] : rows[id]) {
      if (feature != expected++) {
        throw DataError("basis csv: service '" + id + "' skips feature " +
                        std::to_string(expected - 1));
      }
      auto sorted = entries;
      std::sort(sorted.begin(), sorted.end());
      std::vector<std::size_t> idx;
      std::vector<std::size_t> tal;
      for (const auto& [f, t] : sorted) {
        idx.push_back(f);
        tal.push_back(t);
      }
      b.indices.push_back(std::move(idx));
      b.tallies.push_back(std::move(tal));
    }
    b.validate();
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace mace
