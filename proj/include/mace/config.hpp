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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "mace/core.hpp"
#include "mace/detector.hpp"
#include "mace/fixtures.hpp"
#include "mace/theory.hpp"

namespace mace {

/// Everything one `run` needs. Parsed from flat `key = value` files.
struct RunConfig {
  std::filesystem::path data_dir;  // empty: generate the synthetic fixture
  std::filesystem::path out_dir = "mace-out";
  HyperParams hp;
  PipelineOptions pipeline;
  ThresholdMode threshold = ThresholdMode::best_f1();
  bool point_adjust = false;
  std::size_t group_size = 10;
  FixtureKind fixture = FixtureKind::multi_pattern;
  FixtureOptions synth;
  theory::SuiteOptions theory;

  void validate() const;
};

/// Reads `key = value` lines; `#` starts a comment. Unknown keys, repeated
/// keys and unparsable values raise DataError naming `origin` and the line.
RunConfig parse_config(std::istream& in, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form: every key in a fixed order, one per line. Parsing
/// it gives back an equal configuration.
std::string to_text(const RunConfig& config);

/// 64-bit FNV-1a of to_text(config).
std::uint64_t config_hash(const RunConfig& config);

}  // namespace mace
