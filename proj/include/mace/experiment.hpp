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
#include <filesystem>
#include <string>
#include <vector>

#include "mace/autoenc.hpp"
#include "mace/config.hpp"
#include "mace/dataset.hpp"
#include "mace/detector.hpp"
#include "mace/metrics.hpp"

namespace mace {

/// Datasets from `data_dir`, or the configured synthetic fixture when no
/// data directory is set.
std::vector<ServiceDataset> load_services(const RunConfig& config);

/// `<out_dir>/group-NN`.
std::filesystem::path group_dir(const RunConfig& config, std::size_t group);

struct ServiceScores {
  std::string service_id;
  std::vector<double> scores;
  double threshold = 0.0;
  std::vector<int> predictions;
  LabelSeries labels;
};

struct ServiceMetrics {
  std::string service_id;
  std::size_t group = 0;
  double threshold = 0.0;
  Confusion counts;
};

// Stages. Each reads what the previous one wrote into the group directory
// when called from the CLI, and also returns it for in-process use.

std::vector<ServiceModel> preprocess_stage(const RunConfig& config,
                                           std::span<const ServiceDataset> group,
                                           const std::filesystem::path& dir);

TrainResult train_stage(const RunConfig& config, std::span<const ServiceDataset> group,
                        std::span<const ServiceModel> services, const std::filesystem::path& dir);

std::vector<ServiceScores> detect_stage(const RunConfig& config,
                                        std::span<const ServiceDataset> group,
                                        std::span<const ServiceModel> services,
                                        const ModelState& model,
                                        const std::filesystem::path& dir);

std::vector<ServiceMetrics> eval_stage(const RunConfig& config, std::size_t group_index,
                                       std::span<const ServiceScores> scores);

/// Reloads the preprocessing artifacts of a group directory.
std::vector<ServiceModel> read_service_models(const std::filesystem::path& dir,
                                              std::span<const ServiceDataset> group,
                                              std::size_t window_size);
/// Reloads the score files of a group directory.
std::vector<ServiceScores> read_group_scores(const std::filesystem::path& dir,
                                             std::span<const ServiceDataset> group);

void write_stats_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                     std::span<const ServiceModel> services);
void write_scores_csv(const std::filesystem::path& path, const ServiceScores& scores);
ServiceScores read_scores_csv(const std::filesystem::path& path, const std::string& service_id);

/// Per-service rows then one `macro` row (means of precision, recall, F1).
void write_metrics_csv(const std::filesystem::path& path, std::span<const ServiceMetrics> rows);

struct GroupOutcome {
  std::size_t index = 0;
  std::vector<std::string> services;
  bool ok = true;
  std::string failed_stage;
  std::string error;
  double preprocess_seconds = 0.0;
  double train_seconds = 0.0;
  double detect_seconds = 0.0;
  double eval_seconds = 0.0;
};

struct RunReport {
  std::vector<ServiceMetrics> services;
  PRF1 macro;
  std::vector<GroupOutcome> groups;
  double seconds = 0.0;

  bool ok() const;
};

/// preprocess -> train -> detect -> eval for every group of `group_size`
/// services. Groups run concurrently on up to MACE_THREADS workers; a
/// failing group is recorded with its stage and the others continue.
/// Writes metrics.csv and manifest.json under out_dir.
RunReport run_experiment(const RunConfig& config);

/// Worker count from MACE_THREADS, else the hardware concurrency.
std::size_t worker_count();

}  // namespace mace
