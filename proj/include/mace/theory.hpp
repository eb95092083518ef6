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
#include <span>
#include <string>
#include <vector>

#include "mace/core.hpp"
#include "mace/patex.hpp"

namespace mace::theory {

/// Independent Gaussian amplitudes: bin i ~ N(mu_i, nu_i^2). Only the
/// diagonal of the covariance enters the bound, so bins are sampled
/// independently; nu_i is a standard deviation.
struct GaussianSpectrumModel {
  std::vector<double> mu;
  std::vector<double> nu;

  std::size_t n() const { return mu.size(); }
  void validate() const;
};

/// (g)(g-2)(g-4)...; 1 for g <= 0.
double double_factorial(int g);

/// 2^((g-1)/g) * n * (sum_i (g-1)!! nu_i^g |a_i| + |a_i mu_i^g|)^(1/g) - sum_j mu_j,
/// with `alpha` already divided by the kernel scale.
double theorem1_bound(const GaussianSpectrumModel& model, std::span<const double> alpha, int gamma);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of sum_j E(DualisticConv(A) - A_j) over one
/// convolution window with weights `alpha` and scale `sigma`.
McEstimate mc_gap(const GaussianSpectrumModel& model, std::span<const double> alpha, int gamma,
                  double sigma, std::size_t trials, std::uint64_t seed);

/// Probability vector over n bins plus the reference ordering (bin indices
/// by descending normal-pattern amplitude) that every top-k sum follows.
struct NormalizedSpectrum {
  std::vector<double> q;
  std::vector<std::size_t> order;

  std::size_t n() const { return q.size(); }
  double top_sum(std::size_t k) const;

  /// Normalizes non-negative amplitudes; the order is their own descending
  /// order (stable).
  static NormalizedSpectrum from_amplitudes(std::span<const double> amplitudes);
  /// Normalizes amplitudes but keeps an externally given reference order.
  static NormalizedSpectrum with_reference(std::span<const double> amplitudes,
                                           std::span<const std::size_t> order);
};

/// -log sum_{i<=k} q(w_i); +infinity when the top-k mass is zero.
double kl_recon_error(const NormalizedSpectrum& q, std::size_t k);

/// log(sum_{i<=k} q_N(w_i) / sum_{i<=k} q_A(w_i)); both spectra must share
/// the reference order.
double theorem2_gap(const NormalizedSpectrum& q_normal, const NormalizedSpectrum& q_anomaly,
                    std::size_t k);

/// sum_{i<=k} q_N(w_i) > k/n, with a 1e-12 margin so that exactly uniform
/// spectra never qualify through rounding.
bool corollary1_holds(const NormalizedSpectrum& q_normal, std::size_t k, std::size_t n);

struct ShiftModel {
  enum class Distribution { exponential, half_normal };
  double delta_mean = 0.5;  // expectation of each shift
  Distribution distribution = Distribution::exponential;
};

/// Mean of theorem2_gap over anomaly spectra A_N + shift, shifts i.i.d. and
/// non-negative; A_N is q_N itself (total mass 1).
double corollary1_empirical(const NormalizedSpectrum& q_normal, const ShiftModel& shift,
                            std::size_t k, std::size_t trials, std::uint64_t seed);

struct AmplitudeStats {
  double var_anomaly = 0.0;
  double var_normal = 0.0;
  double mean_anomaly = 0.0;
  double mean_normal = 0.0;
  std::size_t anomalous_windows = 0;
  std::size_t normal_windows = 0;
};

/// Splits windows by whether any covered timestamp is labelled, then
/// averages each window's amplitude variance and mean per class. Amplitudes
/// are one-sided (|F| scaled by 1/W, or 2/W off DC and Nyquist).
AmplitudeStats amplitude_stats(std::span<const TimeSeriesWindow> windows,
                               const LabelSeries& labels, const BasisSet& basis);

struct Verdict {
  std::string check;
  double statistic = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SuiteOptions {
  std::size_t theorem1_configs = 1000;
  std::size_t theorem1_samples = 10000;
  std::size_t corollary_spectra = 50;
  std::size_t corollary_trials = 10000;
  std::size_t identity_max_n = 12;
  std::uint64_t seed = 0;
};

/// The executable check suite: Gaussian bound coverage, the gap identities
/// and the sign of the gap on concentrated spectra.
std::vector<Verdict> run_suite(const SuiteOptions& options);

}  // namespace mace::theory
