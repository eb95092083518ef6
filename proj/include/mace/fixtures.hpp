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
#include <string>
#include <vector>

#include "mace/dataset.hpp"

namespace mace {

/// Knobs shared by the bundled synthetic fixtures.
struct FixtureOptions {
  std::size_t services = 10;
  std::size_t features = 2;
  std::size_t period = 40;
  std::size_t train_length = 1200;
  std::size_t test_length = 1200;
  std::size_t anomalies = 3;          // events per service
  std::size_t anomaly_duration = 80;  // contextual_swap span length
  double spike_magnitude = 10.0;      // in peak-tone amplitudes
  double noise = 0.05;
  std::uint64_t seed = 0;
};

enum class FixtureKind { multi_pattern, point_spike };

FixtureKind fixture_kind_from_string(const std::string& name);
const char* to_string(FixtureKind kind);

/// Tone pairs over frequencies 1..5: service s owns the s-th 2-subset, so
/// every service has a distinct frequency set.
std::vector<std::size_t> fixture_frequencies(std::size_t service);

/// Ten-service multi-pattern fixture. Each test split carries
/// contextual_swap spans whose donor is a service with a disjoint tone set,
/// so the values stay in range but the frequency content changes.
std::vector<SynthSpec> multi_pattern_fixture(const FixtureOptions& options);

/// Same services with single-point spikes instead of swaps.
std::vector<SynthSpec> point_spike_fixture(const FixtureOptions& options);

std::vector<SynthSpec> make_fixture(FixtureKind kind, const FixtureOptions& options);

std::vector<ServiceDataset> generate_fixture(FixtureKind kind, const FixtureOptions& options);

}  // namespace mace
