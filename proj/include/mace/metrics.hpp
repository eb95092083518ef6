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

namespace mace {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  static Confusion from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
    return {tp, fp, fn, 0};
  }

  // Zero denominators give 0 rather than NaN.
  double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
  // 2tp / (2tp + fp + fn) is one correctly rounded division, so equal F1
  // ratios compare equal and threshold ties break reliably.
  double f1() const {
    const std::size_t den = 2 * tp + fp + fn;
    return tp == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(den);
  }
};

Confusion confusion(std::span<const int> predictions, std::span<const int> labels);

struct PRF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Throws ShapeError on a length mismatch.
PRF1 prf1(std::span<const int> predictions, std::span<const int> labels);

}  // namespace mace
