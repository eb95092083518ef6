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

#include "mace/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mace/error.hpp"

namespace mace::theory {

namespace {

double int_pow(double x, int g) {
  double r = 1.0;
  for (int i = 0; i < std::abs(g); ++i) r *= x;
  return g < 0 ? 1.0 / r : r;
}

double odd_root(double v, int g) {
  return v < 0.0 ? -std::pow(-v, 1.0 / g) : std::pow(v, 1.0 / g);
}

void check_gamma(int gamma) {
  if (!admissible_gamma(gamma) || gamma < 0) {
    throw DataError("gamma must be an odd integer >= 3, got " + std::to_string(gamma));
  }
}

}  // namespace

void GaussianSpectrumModel::validate() const {
  if (mu.size() != nu.size()) throw ShapeError("mu and nu differ in length");
  if (mu.empty()) throw DataError("spectrum model needs at least one bin");
  for (const double v : nu) {
    if (!(v >= 0.0)) throw DataError("standard deviations nu must be non-negative");
  }
}

double double_factorial(int g) {
  double r = 1.0;
  for (int i = g; i > 1; i -= 2) r *= i;
  return r;
}

double theorem1_bound(const GaussianSpectrumModel& model, std::span<const double> alpha, int gamma) {
  model.validate();
  check_gamma(gamma);
  if (alpha.size() != model.n()) throw ShapeError("alpha must have one weight per bin");
  const double moment = double_factorial(gamma - 1);
  double inner = 0.0;
  for (std::size_t i = 0; i < model.n(); ++i) {
    inner += moment * int_pow(model.nu[i], gamma) * std::abs(alpha[i]) +
             std::abs(alpha[i] * int_pow(model.mu[i], gamma));
  }
  const double g = gamma;
  const double mean_sum = std::accumulate(model.mu.begin(), model.mu.end(), 0.0);
  return std::pow(2.0, (g - 1.0) / g) * static_cast<double>(model.n()) * std::pow(inner, 1.0 / g) -
         mean_sum;
}

McEstimate mc_gap(const GaussianSpectrumModel& model, std::span<const double> alpha, int gamma,
                  double sigma, std::size_t trials, std::uint64_t seed) {
  model.validate();
  check_gamma(gamma);
  if (alpha.size() != model.n()) throw ShapeError("alpha must have one weight per bin");
  if (!(sigma > 0.0)) throw DataError("sigma must be positive");
  if (trials < 2) throw DataError("mc_gap needs at least two trials");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = model.n();
  std::vector<double> a(n);
  // Welford accumulation of the per-sample gap n*DC(A) - sum_j A_j.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    double u = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = model.mu[i] + model.nu[i] * normal(rng);
      u += alpha[i] * int_pow(a[i], gamma);
      sum += a[i];
    }
    const double gap = static_cast<double>(n) * odd_root(u / sigma, gamma) - sum;
    const double delta = gap - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (gap - mean);
  }
  const double variance = m2 / static_cast<double>(trials - 1);
  return {mean, std::sqrt(variance / static_cast<double>(trials))};
}

double NormalizedSpectrum::top_sum(std::size_t k) const {
  if (k == 0 || k > n()) {
    throw DataError("k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n()) + "]");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += q[order[i]];
  return s;
}

NormalizedSpectrum NormalizedSpectrum::from_amplitudes(std::span<const double> amplitudes) {
  std::vector<std::size_t> order(amplitudes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return amplitudes[a] > amplitudes[b]; });
  return with_reference(amplitudes, order);
}

NormalizedSpectrum NormalizedSpectrum::with_reference(std::span<const double> amplitudes,
                                                      std::span<const std::size_t> order) {
  if (amplitudes.empty()) throw DataError("cannot normalize an empty spectrum");
  if (order.size() != amplitudes.size()) throw ShapeError("reference order length mismatch");
  double total = 0.0;
  for (const double a : amplitudes) {
    if (!(a >= 0.0)) throw DataError("amplitudes must be non-negative");
    total += a;
  }
  if (total == 0.0) throw DataError("cannot normalize an all-zero spectrum");
  NormalizedSpectrum s;
  s.q.reserve(amplitudes.size());
  for (const double a : amplitudes) s.q.push_back(a / total);
  s.order.assign(order.begin(), order.end());
  return s;
}

double kl_recon_error(const NormalizedSpectrum& q, std::size_t k) {
  const double mass = q.top_sum(k);
  if (mass <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(mass);
}

double theorem2_gap(const NormalizedSpectrum& q_normal, const NormalizedSpectrum& q_anomaly,
                    std::size_t k) {
  if (q_normal.order != q_anomaly.order) {
    throw DataError("normal and anomaly spectra must share the reference ordering");
  }
  const double num = q_normal.top_sum(k);
  const double den = q_anomaly.top_sum(k);
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(num / den);
}

bool corollary1_holds(const NormalizedSpectrum& q_normal, std::size_t k, std::size_t n) {
  if (n == 0) throw DataError("n must be positive");
  return q_normal.top_sum(k) > static_cast<double>(k) / static_cast<double>(n) + 1e-12;
}

double corollary1_empirical(const NormalizedSpectrum& q_normal, const ShiftModel& shift,
                            std::size_t k, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw DataError("corollary1_empirical needs at least one trial");
  if (!(shift.delta_mean >= 0.0)) throw DataError("shift expectation must be non-negative");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(shift.delta_mean > 0.0 ? 1.0 / shift.delta_mean : 1.0);
  // half-normal with mean delta: sigma = delta * sqrt(pi/2)
  std::normal_distribution<double> normal(0.0, shift.delta_mean * std::sqrt(std::acos(-1.0) / 2.0));

  const std::size_t n = q_normal.n();
  std::vector<double> amps(n);
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      if (shift.delta_mean > 0.0) {
        d = shift.distribution == ShiftModel::Distribution::exponential ? expo(rng)
                                                                        : std::abs(normal(rng));
      }
      amps[i] = q_normal.q[i] + d;
    }
    const auto q_anomaly = NormalizedSpectrum::with_reference(amps, q_normal.order);
    total += theorem2_gap(q_normal, q_anomaly, k);
  }
  return total / static_cast<double>(trials);
}

AmplitudeStats amplitude_stats(std::span<const TimeSeriesWindow> windows,
                               const LabelSeries& labels, const BasisSet& basis) {
  AmplitudeStats st;
  const double w = static_cast<double>(basis.window_size);
  for (const auto& win : windows) {
    if (win.start_index + win.length() > labels.size()) {
      throw ShapeError("window at " + std::to_string(win.start_index) + " runs past the labels");
    }
    bool anomalous = false;
    for (std::size_t t = win.start_index; t < win.start_index + win.length(); ++t) {
      anomalous |= labels[t] != 0;
    }
    const auto spectrum = ca_dft(win, basis);
    std::vector<double> amps;
    for (std::size_t f = 0; f < basis.features(); ++f) {
      for (std::size_t j = 0; j < basis.k(); ++j) {
        const std::size_t freq = basis.indices[f][j];
        const bool self_conjugate = freq == 0 || 2 * freq == basis.window_size;
        amps.push_back(std::abs(spectrum.coeffs[f][j]) * (self_conjugate ? 1.0 : 2.0) / w);
      }
    }
    const double mean = std::accumulate(amps.begin(), amps.end(), 0.0) / static_cast<double>(amps.size());
    double var = 0.0;
    for (const double a : amps) var += (a - mean) * (a - mean);
    var /= static_cast<double>(amps.size());
    if (anomalous) {
      st.mean_anomaly += mean;
      st.var_anomaly += var;
      ++st.anomalous_windows;
    } else {
      st.mean_normal += mean;
      st.var_normal += var;
      ++st.normal_windows;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto na = static_cast<double>(st.anomalous_windows);
  const auto nn = static_cast<double>(st.normal_windows);
  st.mean_anomaly = na > 0 ? st.mean_anomaly / na : nan;
  st.var_anomaly = na > 0 ? st.var_anomaly / na : nan;
  st.mean_normal = nn > 0 ? st.mean_normal / nn : nan;
  st.var_normal = nn > 0 ? st.var_normal / nn : nan;
  return st;
}

std::vector<Verdict> run_suite(const SuiteOptions& options) {
  std::vector<Verdict> out;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Empirical dualistic gap within the closed-form Gaussian bound (+3 standard errors).
  {
    std::size_t held = 0;
    const int gammas[] = {3, 5, 7};
    for (std::size_t c = 0; c < options.theorem1_configs; ++c) {
      const std::size_t n = 1 + static_cast<std::size_t>(unit(rng) * 5.0) % 5;
      const int gamma = gammas[static_cast<std::size_t>(unit(rng) * 3.0) % 3];
      GaussianSpectrumModel model;
      std::vector<double> alpha;
      for (std::size_t i = 0; i < n; ++i) {
        model.mu.push_back(2.0 * unit(rng));
        model.nu.push_back(2.0 * unit(rng));
        alpha.push_back(2.0 * unit(rng) - 1.0);
      }
      const auto est = mc_gap(model, alpha, gamma, 1.0, options.theorem1_samples, rng());
      if (est.mean <= theorem1_bound(model, alpha, gamma) + 3.0 * est.std_error) ++held;
    }
    const double rate = options.theorem1_configs == 0
                            ? 1.0
                            : static_cast<double>(held) / static_cast<double>(options.theorem1_configs);
    out.push_back({"gaussian_bound_coverage", rate, 0.99, rate >= 0.99});
  }

  // Gap identities over every n <= max_n and every k.
  {
    double identity_err = 0.0;
    double full_gap = 0.0;
    double uniform_err = 0.0;
    for (std::size_t n = 1; n <= options.identity_max_n; ++n) {
      std::vector<double> normal(n);
      std::vector<double> anomaly(n);
      for (std::size_t i = 0; i < n; ++i) {
        normal[i] = 0.01 + unit(rng);
        anomaly[i] = 0.01 + unit(rng);
      }
      const auto qn = NormalizedSpectrum::from_amplitudes(normal);
      const auto qa = NormalizedSpectrum::with_reference(anomaly, qn.order);
      const auto qu = NormalizedSpectrum::from_amplitudes(std::vector<double>(n, 1.0));
      for (std::size_t k = 1; k <= n; ++k) {
        const double gap = theorem2_gap(qn, qa, k);
        identity_err = std::max(identity_err,
                                std::abs(gap - (kl_recon_error(qa, k) - kl_recon_error(qn, k))));
        if (k == n) full_gap = std::max(full_gap, std::abs(gap));
        uniform_err = std::max(uniform_err,
                               std::abs(kl_recon_error(qu, k) -
                                        std::log(static_cast<double>(n) / static_cast<double>(k))));
      }
    }
    out.push_back({"gap_identity_max_error", identity_err, 1e-12, identity_err <= 1e-12});
    out.push_back({"full_spectrum_gap", full_gap, 1e-12, full_gap <= 1e-12});
    out.push_back({"uniform_error_log_ratio_max_error", uniform_err, 1e-12, uniform_err <= 1e-12});
  }

  // Concentrated spectra give a positive mean gap.
  {
    std::size_t positive = 0;
    std::size_t tested = 0;
    while (tested < options.corollary_spectra) {
      const std::size_t n = 4 + static_cast<std::size_t>(unit(rng) * 9.0) % 9;
      const std::size_t k = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(n - 1)) % (n - 1);
      const double decay = 0.3 + 1.2 * unit(rng);
      std::vector<double> amps(n);
      for (std::size_t i = 0; i < n; ++i) {
        amps[i] = std::exp(-decay * static_cast<double>(i)) * (0.5 + unit(rng));
      }
      const auto qn = NormalizedSpectrum::from_amplitudes(amps);
      if (!corollary1_holds(qn, k, n)) continue;
      ++tested;
      const double gap = corollary1_empirical(qn, ShiftModel{0.5}, k, options.corollary_trials, rng());
      if (gap > 0.0) ++positive;
    }
    const double rate = options.corollary_spectra == 0
                            ? 1.0
                            : static_cast<double>(positive) / static_cast<double>(options.corollary_spectra);
    out.push_back({"concentrated_positive_gap_rate", rate, 0.95, rate >= 0.95});
  }
  return out;
}

}  // namespace mace::theory
