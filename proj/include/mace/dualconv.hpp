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
#include <span>
#include <vector>

#include "mace/core.hpp"

namespace mace {

/// Minimum value a window is shifted to before a negative-power convolution.
inline constexpr double kValleyFloor = 0.1;

/// Gradients floor the magnitude of the pre-root sum at this fraction of
/// the sum of its absolute terms.
inline constexpr double kRootTolerance = 1e-8;

/// Power above which the weighted power sum is evaluated in log space.
inline constexpr int kLogSpacePower = 7;

struct ConvKernel {
  std::vector<double> weights;  // alpha_i
  int gamma = 3;
  double sigma = 1.0;
  std::size_t stride = 1;

  std::size_t length() const { return weights.size(); }

  /// Throws InvalidKernelError on an even or too-small power, a non-positive
  /// scale or stride, or an empty weight vector.
  void validate() const;

  static ConvKernel uniform(std::size_t length, int gamma, double sigma, std::size_t stride,
                            double weight = 1.0);
};

enum class Padding {
  none,
  reflect,       // same-length output for stride 1; mirror without repeating the edge
  zero,          // right-pad with zeros to a whole number of strides
  segment_mean,  // right-pad with the mean of the trailing partial segment
};

/// out_j = root_gamma( sum_i alpha_i * x_{j*s+i}^gamma / sigma ), with the
/// sign-preserving odd root. Negative powers require strictly positive input.
std::vector<double> dualistic_conv(std::span<const double> x, const ConvKernel& kernel,
                                   Padding padding = Padding::none);

struct ConvGrad {
  std::vector<double> grad_x;
  std::vector<double> grad_alpha;
};

/// Vector-Jacobian product of dualistic_conv for the given upstream gradient.
/// The pre-root sum is floored at kRootTolerance relative to its absolute terms.
ConvGrad dualistic_conv_grad(std::span<const double> x, const ConvKernel& kernel,
                             std::span<const double> upstream, Padding padding = Padding::none);

/// Time-domain anomaly amplification: per feature, the element-wise mean of
/// a peak (+gamma_t) and a valley (-gamma_t) convolution with stride 1,
/// uniform unit weights, scale sigma_t and reflect padding. The valley side
/// runs on the feature shifted so its minimum is kValleyFloor.
Matrix amplify_time(const Matrix& x, const HyperParams& hp);

/// Frequency-domain pooling with stride = kernel length. Peak kernels pad
/// with zeros; valley kernels shift to kValleyFloor and pad with the
/// trailing segment mean.
std::vector<double> freq_pool(std::span<const double> amplitudes, const ConvKernel& kernel);

namespace detail {

/// u = sum_i w_i x_i^gamma / sigma, kept as sign and log-magnitude.
struct PowerSum {
  double log_abs = 0.0;
  int sign = 0;
};

PowerSum power_sum(std::span<const double> x, std::span<const double> weights, int gamma,
                   double sigma);

/// Sign-preserving odd root of a power sum.
double odd_root(const PowerSum& u, int gamma);

/// Accumulates d(out)/dx and d(out)/dalpha for a single output window.
void window_grad(std::span<const double> x, std::span<const double> weights, int gamma,
                 double sigma, const PowerSum& u, double upstream, std::span<double> grad_x,
                 std::span<double> grad_alpha);

}  // namespace detail

}  // namespace mace
