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

#include "mace/fixtures.hpp"

#include <algorithm>
#include <numbers>
#include <random>

#include "mace/error.hpp"

namespace mace {

namespace {

constexpr std::size_t kToneCount = 5;

std::string service_name(std::size_t s) {
  std::string id = std::to_string(s);
  return "svc-" + std::string(id.size() < 2 ? 2 - id.size() : 0, '0') + id;
}

SignalPattern pattern_for(std::size_t service, std::size_t features, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.6, 1.0);
  SignalPattern p;
  for (std::size_t f = 0; f < features; ++f) {
    std::vector<Tone> tones;
    for (const auto w : fixture_frequencies(service)) {
      tones.push_back({static_cast<double>(w), amp(rng), phase(rng)});
    }
    p.features.push_back(std::move(tones));
    p.offsets.push_back(0.0);
  }
  return p;
}

bool disjoint(std::size_t a, std::size_t b) {
  const auto fa = fixture_frequencies(a);
  const auto fb = fixture_frequencies(b);
  for (const auto x : fa) {
    if (std::find(fb.begin(), fb.end(), x) != fb.end()) return false;
  }
  return true;
}

// Evenly spread event starts with a random jitter, clear of both ends.
std::vector<std::size_t> event_positions(std::size_t count, std::size_t duration,
                                         std::size_t length, std::size_t margin,
                                         std::mt19937_64& rng) {
  if (count == 0) return {};
  const std::size_t slot = length / count;
  if (slot < duration + 2 * margin) {
    throw DataError("test split of " + std::to_string(length) + " samples cannot hold " +
                    std::to_string(count) + " events of length " + std::to_string(duration));
  }
  std::uniform_int_distribution<std::size_t> jitter(0, slot - duration - 2 * margin);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(i * slot + margin + jitter(rng));
  return out;
}

std::vector<SynthSpec> base_specs(const FixtureOptions& o, std::mt19937_64& rng) {
  if (o.services == 0 || o.features == 0) throw DataError("fixture needs services and features");
  std::vector<SynthSpec> specs;
  for (std::size_t s = 0; s < o.services; ++s) {
    SynthSpec spec;
    spec.service_id = service_name(s);
    spec.pattern = pattern_for(s, o.features, rng);
    spec.period = o.period;
    spec.noise = o.noise;
    spec.train_length = o.train_length;
    spec.test_length = o.test_length;
    spec.seed = rng();
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace

FixtureKind fixture_kind_from_string(const std::string& name) {
  if (name == "multi_pattern") return FixtureKind::multi_pattern;
  if (name == "point_spike") return FixtureKind::point_spike;
  throw DataError("unknown fixture '" + name + "' (expected multi_pattern or point_spike)");
}

const char* to_string(FixtureKind kind) {
  return kind == FixtureKind::multi_pattern ? "multi_pattern" : "point_spike";
}

std::vector<std::size_t> fixture_frequencies(std::size_t service) {
  std::size_t s = service % (kToneCount * (kToneCount - 1) / 2);
  for (std::size_t a = 1; a <= kToneCount; ++a) {
    for (std::size_t b = a + 1; b <= kToneCount; ++b) {
      if (s-- == 0) return {a, b};
    }
  }
  return {1, 2};
}

std::vector<SynthSpec> multi_pattern_fixture(const FixtureOptions& o) {
  std::mt19937_64 rng(o.seed);
  auto specs = base_specs(o, rng);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    std::vector<std::size_t> donors;
    for (std::size_t d = 0; d < specs.size(); ++d) {
      if (d != s && disjoint(s, d)) donors.push_back(d);
    }
    if (donors.empty()) throw DataError("fixture has no donor for " + specs[s].service_id);
    const auto starts = event_positions(o.anomalies, o.anomaly_duration, o.test_length, o.period, rng);
    for (std::size_t e = 0; e < starts.size(); ++e) {
      AnomalyEvent ev;
      ev.kind = AnomalyKind::contextual_swap;
      ev.position = starts[e];
      ev.duration = o.anomaly_duration;
      ev.donor = specs[donors[(s + e) % donors.size()]].pattern;
      specs[s].anomalies.push_back(std::move(ev));
    }
  }
  return specs;
}

std::vector<SynthSpec> point_spike_fixture(const FixtureOptions& o) {
  std::mt19937_64 rng(o.seed ^ 0x5bd1e995ULL);
  auto specs = base_specs(o, rng);
  std::uniform_int_distribution<std::size_t> feature(0, o.features - 1);
  std::bernoulli_distribution sign(0.5);
  for (auto& spec : specs) {
    const auto starts = event_positions(o.anomalies, 1, o.test_length, o.period, rng);
    for (const auto p : starts) {
      AnomalyEvent ev;
      ev.kind = AnomalyKind::point_spike;
      ev.position = p;
      ev.duration = 1;
      ev.magnitude = sign(rng) ? o.spike_magnitude : -o.spike_magnitude;
      ev.features = {feature(rng)};
      spec.anomalies.push_back(std::move(ev));
    }
  }
  return specs;
}

std::vector<SynthSpec> make_fixture(FixtureKind kind, const FixtureOptions& options) {
  return kind == FixtureKind::multi_pattern ? multi_pattern_fixture(options)
                                            : point_spike_fixture(options);
}

std::vector<ServiceDataset> generate_fixture(FixtureKind kind, const FixtureOptions& options) {
  std::vector<ServiceDataset> out;
  for (const auto& spec : make_fixture(kind, options)) out.push_back(synth_generate(spec));
  return out;
}

}  // namespace mace
