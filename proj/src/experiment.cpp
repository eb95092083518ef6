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

#include "mace/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mace/error.hpp"
#include "text_util.hpp"

namespace mace {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!text::trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

void expect_header(const std::vector<std::string>& lines, const std::string& header,
                   const fs::path& path) {
  if (lines.empty() || text::trim(lines.front()) != header) {
    throw DataError(path.string() + ": expected header '" + header + "'");
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::vector<ServiceDataset> load_services(const RunConfig& config) {
  if (!config.data_dir.empty()) return load_dataset(config.data_dir);
  return generate_fixture(config.fixture, config.synth);
}

fs::path group_dir(const RunConfig& config, std::size_t group) {
  char name[32];
  std::snprintf(name, sizeof(name), "group-%02zu", group);
  return config.out_dir / name;
}

void write_stats_csv(const fs::path& path, std::span<const std::string> ids,
                     std::span<const ServiceModel> services) {
  auto out = open_out(path);
  out << "service_id,feature_index,min,max\n";
  for (std::size_t s = 0; s < services.size(); ++s) {
    const auto& st = services[s].stats;
    for (std::size_t f = 0; f < st.min.size(); ++f) {
      out << ids[s] << ',' << f << ',' << text::format_double(st.min[f]) << ','
          << text::format_double(st.max[f]) << '\n';
    }
  }
}

std::vector<ServiceModel> read_service_models(const fs::path& dir,
                                              std::span<const ServiceDataset> group,
                                              std::size_t window_size) {
  std::map<std::string, MinMaxStats> stats;
  const auto stats_path = dir / "stats.csv";
  const auto lines = read_lines(stats_path);
  expect_header(lines, "service_id,feature_index,min,max", stats_path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = stats_path.string() + ":" + std::to_string(i + 1);
    const auto cells = text::split(lines[i], ',');
    if (cells.size() != 4) throw DataError(where + ": expected 4 cells");
    auto& st = stats[cells[0]];
    if (text::parse_size(cells[1], where) != st.min.size()) {
      throw DataError(where + ": feature rows out of order");
    }
    st.min.push_back(text::parse_double(cells[2], where));
    st.max.push_back(text::parse_double(cells[3], where));
  }

  std::ifstream basis_in(dir / "basis.csv");
  if (!basis_in) throw DataError("cannot open " + (dir / "basis.csv").string());
  std::map<std::string, BasisSet> bases;
  for (auto& b : read_basis_csv(basis_in, window_size)) bases[b.service_id] = std::move(b);

  std::vector<ServiceModel> out;
  for (const auto& ds : group) {
    const auto st = stats.find(ds.service_id);
    const auto bs = bases.find(ds.service_id);
    if (st == stats.end() || bs == bases.end()) {
      throw DataError(dir.string() + " has no preprocessing state for service '" +
                      ds.service_id + "'");
    }
    out.push_back({st->second, bs->second});
  }
  return out;
}

std::vector<ServiceModel> preprocess_stage(const RunConfig& config,
                                           std::span<const ServiceDataset> group,
                                           const fs::path& dir) {
  std::vector<ServiceModel> services;
  std::vector<BasisSet> bases;
  std::vector<std::string> ids;
  for (const auto& ds : group) {
    services.push_back(preprocess_service(ds, config.hp, config.pipeline));
    bases.push_back(services.back().basis);
    ids.push_back(ds.service_id);
  }
  fs::create_directories(dir);
  auto basis_out = open_out(dir / "basis.csv");
  write_basis_csv(basis_out, bases);
  write_stats_csv(dir / "stats.csv", ids, services);
  return services;
}

TrainResult train_stage(const RunConfig& config, std::span<const ServiceDataset> group,
                        std::span<const ServiceModel> services, const fs::path& dir) {
  auto result = train_group(group, services, config.hp, config.pipeline);
  fs::create_directories(dir);
  save_model(result.model, dir / "model.bin");
  auto out = open_out(dir / "loss_curve.csv");
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
    out << e + 1 << ',' << text::format_double(result.loss_curve[e]) << '\n';
  }
  return result;
}

void write_scores_csv(const fs::path& path, const ServiceScores& s) {
  auto out = open_out(path);
  out << "timestamp,score,prediction,label\n";
  for (std::size_t t = 0; t < s.scores.size(); ++t) {
    out << t << ',' << text::format_double(s.scores[t]) << ',' << s.predictions[t] << ',';
    if (t < s.labels.size()) out << s.labels[t];
    out << '\n';
  }
}

ServiceScores read_scores_csv(const fs::path& path, const std::string& service_id) {
  const auto lines = read_lines(path);
  expect_header(lines, "timestamp,score,prediction,label", path);
  ServiceScores s;
  s.service_id = service_id;
  bool labelled = true;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto cells = text::split(lines[i], ',');
    if (cells.size() != 4) throw DataError(where + ": expected 4 cells");
    if (text::parse_size(cells[0], where) != i - 1) throw DataError(where + ": timestamps out of order");
    s.scores.push_back(text::parse_double(cells[1], where));
    s.predictions.push_back(static_cast<int>(text::parse_size(cells[2], where)));
    if (cells[3].empty()) {
      labelled = false;
    } else {
      s.labels.push_back(static_cast<int>(text::parse_size(cells[3], where)));
    }
  }
  if (!labelled) s.labels.clear();
  return s;
}

std::vector<ServiceScores> detect_stage(const RunConfig& config,
                                        std::span<const ServiceDataset> group,
                                        std::span<const ServiceModel> services,
                                        const ModelState& model, const fs::path& dir) {
  if (services.size() != group.size()) throw ShapeError("detect: service state count mismatch");
  std::vector<ServiceScores> out;
  fs::create_directories(dir);
  auto thresholds = open_out(dir / "thresholds.csv");
  thresholds << "service_id,threshold\n";
  for (std::size_t i = 0; i < group.size(); ++i) {
    ServiceScores s;
    s.service_id = group[i].service_id;
    s.labels = group[i].test_labels;
    s.scores = detect_series(model, services[i], group[i].test, config.hp, config.pipeline);
    std::optional<LabelSeries> labels;
    if (!s.labels.empty()) labels = s.labels;
    ThresholdMode mode = config.threshold;
    if (mode.kind == ThresholdMode::Kind::best_f1 && !labels) mode = ThresholdMode::quantile(0.99);
    s.threshold = choose_threshold(s.scores, labels, mode);
    s.predictions = apply_threshold(s.scores, s.threshold);
    write_scores_csv(dir / ("scores-" + s.service_id + ".csv"), s);
    thresholds << s.service_id << ',' << text::format_double(s.threshold) << '\n';
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ServiceScores> read_group_scores(const fs::path& dir,
                                             std::span<const ServiceDataset> group) {
  std::map<std::string, double> thresholds;
  const auto th_path = dir / "thresholds.csv";
  const auto lines = read_lines(th_path);
  expect_header(lines, "service_id,threshold", th_path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = text::split(lines[i], ',');
    if (cells.size() != 2) throw DataError(th_path.string() + ": expected 2 cells");
    thresholds[cells[0]] = text::parse_double(cells[1], th_path.string());
  }
  std::vector<ServiceScores> out;
  for (const auto& ds : group) {
    auto s = read_scores_csv(dir / ("scores-" + ds.service_id + ".csv"), ds.service_id);
    const auto it = thresholds.find(ds.service_id);
    if (it == thresholds.end()) throw DataError(th_path.string() + " lacks '" + ds.service_id + "'");
    s.threshold = it->second;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ServiceMetrics> eval_stage(const RunConfig& config, std::size_t group_index,
                                       std::span<const ServiceScores> scores) {
  std::vector<ServiceMetrics> out;
  for (const auto& s : scores) {
    if (s.labels.empty()) throw DataError("service '" + s.service_id + "' has no labels to evaluate");
    const auto preds = config.point_adjust ? point_adjust(s.predictions, s.labels) : s.predictions;
    out.push_back({s.service_id, group_index, s.threshold, confusion(preds, s.labels)});
  }
  return out;
}

void write_metrics_csv(const fs::path& path, std::span<const ServiceMetrics> rows) {
  using text::format_double;
  auto out = open_out(path);
  out << "service_id,group,threshold,precision,recall,f1,tp,fp,fn\n";
  PRF1 macro;
  for (const auto& r : rows) {
    const auto& c = r.counts;
    out << r.service_id << ',' << r.group << ',' << format_double(r.threshold) << ','
        << format_double(c.precision()) << ',' << format_double(c.recall()) << ','
        << format_double(c.f1()) << ',' << c.tp << ',' << c.fp << ',' << c.fn << '\n';
    macro.precision += c.precision();
    macro.recall += c.recall();
    macro.f1 += c.f1();
  }
  const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  out << "macro,,," << format_double(macro.precision / n) << ',' << format_double(macro.recall / n)
      << ',' << format_double(macro.f1 / n) << ",,,\n";
}

bool RunReport::ok() const {
  return std::all_of(groups.begin(), groups.end(), [](const GroupOutcome& g) { return g.ok; });
}

std::size_t worker_count() {
  if (const char* env = std::getenv("MACE_THREADS")) {
    const auto n = text::parse_size(env, "MACE_THREADS");
    if (n == 0) throw DataError("MACE_THREADS must be at least 1");
    return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::vector<ServiceMetrics> run_group(const RunConfig& config, std::size_t index,
                                      std::span<const ServiceDataset> group, GroupOutcome& oc) {
  const auto dir = group_dir(config, index);
  std::vector<ServiceMetrics> metrics;
  const char* stage = "preprocess";
  try {
    auto t = Clock::now();
    const auto services = preprocess_stage(config, group, dir);
    oc.preprocess_seconds = seconds_since(t);

    stage = "train";
    t = Clock::now();
    const auto trained = train_stage(config, group, services, dir);
    oc.train_seconds = seconds_since(t);

    stage = "detect";
    t = Clock::now();
    const auto scores = detect_stage(config, group, services, trained.model, dir);
    oc.detect_seconds = seconds_since(t);

    stage = "eval";
    t = Clock::now();
    metrics = eval_stage(config, index, scores);
    oc.eval_seconds = seconds_since(t);
  } catch (const std::exception& e) {
    oc.ok = false;
    oc.failed_stage = stage;
    const char* kind = dynamic_cast<const NumericalError*>(&e) ? "numerical"
                       : dynamic_cast<const DataError*>(&e) ? "data"
                                                            : "internal";
    oc.error = std::string(kind) + ": " + e.what();
    metrics.clear();
  }
  return metrics;
}

}  // namespace

RunReport run_experiment(const RunConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto services = load_services(config);
  fs::create_directories(config.out_dir);

  const auto groups = group_services(services.size(), config.group_size);
  std::vector<std::vector<ServiceDataset>> members(groups.size());
  RunReport report;
  report.groups.resize(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    report.groups[g].index = g;
    for (const auto i : groups[g]) {
      members[g].push_back(services[i]);
      report.groups[g].services.push_back(services[i].service_id);
    }
  }

  std::vector<std::vector<ServiceMetrics>> results(groups.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t g = next++; g < groups.size(); g = next++) {
      results[g] = run_group(config, g, members[g], report.groups[g]);
    }
  };
  const std::size_t threads = std::min(worker_count(), groups.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (auto& r : results) {
    for (auto& m : r) report.services.push_back(std::move(m));
  }
  for (const auto& m : report.services) {
    report.macro.precision += m.counts.precision();
    report.macro.recall += m.counts.recall();
    report.macro.f1 += m.counts.f1();
  }
  if (!report.services.empty()) {
    const double n = static_cast<double>(report.services.size());
    report.macro = {report.macro.precision / n, report.macro.recall / n, report.macro.f1 / n};
  }
  write_metrics_csv(config.out_dir / "metrics.csv", report.services);
  report.seconds = seconds_since(start);

  nlohmann::ordered_json manifest;
  manifest["seed"] = config.pipeline.seed;
  manifest["synth_seed"] = config.synth.seed;
  manifest["config_hash"] = hex64(config_hash(config));
  manifest["config"] = to_text(config);
  manifest["threads"] = threads;
  manifest["services"] = services.size();
  manifest["macro"] = {{"precision", report.macro.precision},
                       {"recall", report.macro.recall},
                       {"f1", report.macro.f1}};
  auto& jg = manifest["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : report.groups) {
    nlohmann::ordered_json entry;
    entry["index"] = g.index;
    entry["services"] = g.services;
    entry["status"] = g.ok ? "ok" : "failed";
    if (!g.ok) {
      entry["stage"] = g.failed_stage;
      entry["error"] = g.error;
    }
    entry["seconds"] = {{"preprocess", g.preprocess_seconds},
                        {"train", g.train_seconds},
                        {"detect", g.detect_seconds},
                        {"eval", g.eval_seconds}};
    jg.push_back(std::move(entry));
  }
  manifest["seconds"] = report.seconds;
  auto out = open_out(config.out_dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  return report;
}

}  // namespace mace
