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

#include "mace/dualconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mace/error.hpp"

namespace mace {

void ConvKernel::validate() const {
  if (weights.empty()) throw InvalidKernelError("convolution kernel has no weights");
  for (const double w : weights) {
    if (!std::isfinite(w)) throw InvalidKernelError("convolution kernel has a non-finite weight");
  }
  if (!admissible_gamma(gamma)) {
    throw InvalidKernelError("kernel power must be odd with |gamma| >= 3, got " +
                             std::to_string(gamma));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidKernelError("kernel scale sigma must be positive");
  }
  if (stride == 0) throw InvalidKernelError("kernel stride must be >= 1");
}

ConvKernel ConvKernel::uniform(std::size_t length, int gamma, double sigma, std::size_t stride,
                               double weight) {
  return {std::vector<double>(length, weight), gamma, sigma, stride};
}

namespace detail {

PowerSum power_sum(std::span<const double> x, std::span<const double> weights, int gamma,
                   double sigma) {
  PowerSum out;
  if (std::abs(gamma) < kLogSpacePower) {
    double u = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) u += weights[i] * std::pow(x[i], gamma);
    u /= sigma;
    if (u == 0.0) return out;
    out.sign = u > 0.0 ? 1 : -1;
    out.log_abs = std::log(std::abs(u));
    return out;
  }

  // log-sum-exp with sign bookkeeping; gamma is odd so sign(x^gamma) = sign(x).
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (weights[i] == 0.0 || x[i] == 0.0) continue;
    peak = std::max(peak, std::log(std::abs(weights[i])) + gamma * std::log(std::abs(x[i])));
  }
  if (!std::isfinite(peak)) return out;
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (weights[i] == 0.0 || x[i] == 0.0) continue;
    const double term =
        std::exp(std::log(std::abs(weights[i])) + gamma * std::log(std::abs(x[i])) - peak);
    const bool negative = (weights[i] < 0.0) != (x[i] < 0.0);
    acc += negative ? -term : term;
  }
  if (acc == 0.0) return out;
  out.sign = acc > 0.0 ? 1 : -1;
  out.log_abs = peak + std::log(std::abs(acc)) - std::log(sigma);
  return out;
}

double odd_root(const PowerSum& u, int gamma) {
  if (u.sign == 0) {
    // root of zero: 0 for positive powers, unbounded for negative ones
    return gamma > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return u.sign * std::exp(u.log_abs / gamma);
}

void window_grad(std::span<const double> x, std::span<const double> weights, int gamma,
                 double sigma, const PowerSum& u, double upstream, std::span<double> grad_x,
                 std::span<double> grad_alpha) {
  if (upstream == 0.0) return;
  // Floor |u| at a fraction of the summed term magnitudes, so only genuine
  // cancellation is clamped; small same-sign windows keep their exact slope.
  double log_scale = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (weights[i] == 0.0 || x[i] == 0.0) continue;
    const double t = std::log(std::abs(weights[i])) + gamma * std::log(std::abs(x[i]));
    log_scale = log_scale > t ? log_scale + std::log1p(std::exp(t - log_scale))
                              : t + std::log1p(std::exp(log_scale - t));
  }
  const double log_floor = std::isfinite(log_scale)
                               ? std::log(kRootTolerance) + log_scale - std::log(sigma)
                               : std::log(kRootTolerance);
  const double log_u = (u.sign == 0) ? log_floor : std::max(u.log_abs, log_floor);
  const double root_slope = (1.0 / gamma - 1.0) * log_u;
  const double log_sigma = std::log(sigma);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;  // gamma > 0 here; both partials vanish at 0
    const double log_x = std::log(std::abs(x[i]));
    if (weights[i] != 0.0) {
      // d out / d x_i = (alpha_i / sigma) x_i^(gamma-1) |u|^(1/gamma - 1); gamma-1 is even
      const double mag =
          std::exp(std::log(std::abs(weights[i])) - log_sigma + (gamma - 1) * log_x + root_slope);
      grad_x[i] += upstream * (weights[i] < 0.0 ? -mag : mag);
    }
    // d out / d alpha_i = (1/gamma) x_i^gamma / sigma |u|^(1/gamma - 1)
    const double mag = std::exp(gamma * log_x - log_sigma + root_slope) / gamma;
    grad_alpha[i] += upstream * (x[i] < 0.0 ? -mag : mag);
  }
}

}  // namespace detail

namespace {

constexpr std::ptrdiff_t kZeroSource = -1;
constexpr std::ptrdiff_t kMeanSource = -2;

struct Padded {
  std::vector<double> values;
  std::vector<std::ptrdiff_t> source;  // original index, kZeroSource or kMeanSource
  std::size_t tail_begin = 0;
  std::size_t tail_end = 0;
};

Padded pad_input(std::span<const double> x, std::size_t kernel_len, std::size_t stride,
                 Padding padding) {
  Padded p;
  const std::size_t n = x.size();
  auto push = [&](std::ptrdiff_t src) {
    p.source.push_back(src);
    p.values.push_back(src >= 0 ? x[static_cast<std::size_t>(src)] : 0.0);
  };

  if (padding == Padding::reflect) {
    const std::size_t left = (kernel_len - 1) / 2;
    const std::size_t right = kernel_len - 1 - left;
    if (kernel_len > 1 && (n < 2 || left > n - 1 || right > n - 1)) {
      throw ShapeError("reflect padding needs at least " + std::to_string(right + 1) +
                       " samples, got " + std::to_string(n));
    }
    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    for (std::ptrdiff_t i = -static_cast<std::ptrdiff_t>(left);
         i <= last + static_cast<std::ptrdiff_t>(right); ++i) {
      std::ptrdiff_t j = i < 0 ? -i : i;
      if (j > last) j = 2 * last - j;
      push(j);
    }
    return p;
  }

  for (std::size_t i = 0; i < n; ++i) push(static_cast<std::ptrdiff_t>(i));
  if (padding == Padding::none) return p;

  std::size_t target = n;
  if (target < kernel_len) {
    target = kernel_len;
  } else {
    target += (stride - (n - kernel_len) % stride) % stride;
  }
  if (target == n) return p;

  const std::size_t tail_begin = target - kernel_len;
  if (padding == Padding::segment_mean) {
    p.tail_begin = tail_begin;
    p.tail_end = n;
    double mean = 0.0;
    for (std::size_t i = tail_begin; i < n; ++i) mean += x[i];
    mean /= static_cast<double>(n - tail_begin);
    for (std::size_t i = n; i < target; ++i) {
      p.source.push_back(kMeanSource);
      p.values.push_back(mean);
    }
  } else {
    for (std::size_t i = n; i < target; ++i) push(kZeroSource);
  }
  return p;
}

void check_domain(std::span<const double> x, const ConvKernel& kernel) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw NumericalError("non-finite convolution input at index " + std::to_string(i));
    }
    if (kernel.gamma < 0 && !(x[i] > 0.0)) {
      throw DomainError("negative-power convolution needs positive input; index " +
                            std::to_string(i) + " holds " + std::to_string(x[i]),
                        i);
    }
  }
}

std::size_t output_length(std::size_t padded, const ConvKernel& kernel) {
  if (padded < kernel.length()) {
    throw ShapeError("input of length " + std::to_string(padded) +
                     " is shorter than the kernel (" + std::to_string(kernel.length()) + ")");
  }
  return (padded - kernel.length()) / kernel.stride + 1;
}

}  // namespace

std::vector<double> dualistic_conv(std::span<const double> x, const ConvKernel& kernel,
                                   Padding padding) {
  kernel.validate();
  check_domain(x, kernel);
  const Padded p = pad_input(x, kernel.length(), kernel.stride, padding);
  const std::size_t count = output_length(p.values.size(), kernel);
  const std::span<const double> values(p.values);
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    const auto u = detail::power_sum(values.subspan(j * kernel.stride, kernel.length()),
                                     kernel.weights, kernel.gamma, kernel.sigma);
    out[j] = detail::odd_root(u, kernel.gamma);
  }
  return out;
}

ConvGrad dualistic_conv_grad(std::span<const double> x, const ConvKernel& kernel,
                             std::span<const double> upstream, Padding padding) {
  kernel.validate();
  check_domain(x, kernel);
  const Padded p = pad_input(x, kernel.length(), kernel.stride, padding);
  const std::size_t count = output_length(p.values.size(), kernel);
  if (upstream.size() != count) {
    throw ShapeError("upstream gradient has " + std::to_string(upstream.size()) +
                     " entries, convolution output has " + std::to_string(count));
  }

  const std::span<const double> values(p.values);
  std::vector<double> grad_padded(p.values.size(), 0.0);
  ConvGrad g{std::vector<double>(x.size(), 0.0), std::vector<double>(kernel.length(), 0.0)};
  for (std::size_t j = 0; j < count; ++j) {
    const auto window = values.subspan(j * kernel.stride, kernel.length());
    const auto u = detail::power_sum(window, kernel.weights, kernel.gamma, kernel.sigma);
    detail::window_grad(window, kernel.weights, kernel.gamma, kernel.sigma, u, upstream[j],
                        std::span<double>(grad_padded).subspan(j * kernel.stride, kernel.length()),
                        g.grad_alpha);
  }

  const double tail_count = static_cast<double>(p.tail_end - p.tail_begin);
  for (std::size_t i = 0; i < grad_padded.size(); ++i) {
    const auto src = p.source[i];
    if (src >= 0) {
      g.grad_x[static_cast<std::size_t>(src)] += grad_padded[i];
    } else if (src == kMeanSource) {
      for (std::size_t t = p.tail_begin; t < p.tail_end; ++t) {
        g.grad_x[t] += grad_padded[i] / tail_count;
      }
    }
  }
  return g;
}

Matrix amplify_time(const Matrix& x, const HyperParams& hp) {
  const auto peak = ConvKernel::uniform(hp.kernel_len, hp.gamma_t, hp.sigma_t, hp.stride_t());
  const auto valley = ConvKernel::uniform(hp.kernel_len, -hp.gamma_t, hp.sigma_t, hp.stride_t());
  Matrix out(x.rows(), x.cols());
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    const auto up = dualistic_conv(row, peak, Padding::reflect);

    const double shift = kValleyFloor - *std::min_element(row.begin(), row.end());
    std::vector<double> shifted(row);
    for (double& v : shifted) v += shift;
    const auto down = dualistic_conv(shifted, valley, Padding::reflect);

    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const auto i = static_cast<std::size_t>(c);
      out(r, c) = 0.5 * (up[i] + (down[i] - shift));
    }
  }
  return out;
}

std::vector<double> freq_pool(std::span<const double> amplitudes, const ConvKernel& kernel) {
  if (kernel.gamma > 0) return dualistic_conv(amplitudes, kernel, Padding::zero);
  if (amplitudes.empty()) throw ShapeError("cannot pool an empty spectrum");
  const double shift = kValleyFloor - *std::min_element(amplitudes.begin(), amplitudes.end());
  std::vector<double> shifted(amplitudes.begin(), amplitudes.end());
  for (double& v : shifted) v += shift;
  auto out = dualistic_conv(shifted, kernel, Padding::segment_mean);
  for (double& v : out) v -= shift;
  return out;
}

}  // namespace mace
