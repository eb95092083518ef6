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

#include "mace/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "mace/error.hpp"
#include "text_util.hpp"

namespace mace {

namespace fs = std::filesystem;

void ServiceDataset::validate() const {
  if (train.rows() == 0 || train.cols() == 0) {
    throw DataError("service '" + service_id + "' has an empty training split");
  }
  if (test.rows() != train.rows()) {
    throw DataError("service '" + service_id + "': train has " + std::to_string(train.rows()) +
                    " features, test has " + std::to_string(test.rows()));
  }
  if (test_labels.size() != static_cast<std::size_t>(test.cols())) {
    throw DataError("service '" + service_id + "': " + std::to_string(test_labels.size()) +
                    " labels for " + std::to_string(test.cols()) + " test timestamps");
  }
}

Matrix read_series_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!rows.empty() && cells.size() != rows.front().size()) {
      throw DataError(where + ": ragged row with " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(rows.front().size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(text::parse_double(c, where));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + " holds no data rows");
  Matrix out(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t f = 0; f < rows[t].size(); ++f) {
      out(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t)) = rows[t][f];
    }
  }
  return out;
}

void write_series_csv(const fs::path& path, const Matrix& series) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (Eigen::Index t = 0; t < series.cols(); ++t) {
    for (Eigen::Index f = 0; f < series.rows(); ++f) {
      if (f > 0) out << ',';
      out << text::format_double(series(f, t));
    }
    out << '\n';
  }
}

LabelSeries read_labels_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file " + path.string());
  LabelSeries labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const double v = text::parse_double(line, where);
    if (v != 0.0 && v != 1.0) throw DataError(where + ": label must be 0 or 1");
    labels.push_back(v != 0.0 ? 1 : 0);
  }
  return labels;
}

void write_labels_csv(const fs::path& path, const LabelSeries& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const int l : labels) out << l << '\n';
}

std::vector<ServiceDataset> load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw DataError("dataset directory " + root.string() + " not found");
  const std::string suffix = "_train.csv";
  std::set<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root)) {
    const auto name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      ids.insert(name.substr(0, name.size() - suffix.size()));
    }
  }
  if (ids.empty()) throw DataError("no <id>_train.csv files under " + root.string());

  std::vector<ServiceDataset> out;
  for (const auto& id : ids) {
    const auto test_path = root / (id + "_test.csv");
    const auto label_path = root / (id + "_labels.csv");
    for (const auto& p : {test_path, label_path}) {
      if (!fs::exists(p)) throw DataError("missing file " + p.string());
    }
    ServiceDataset ds{id, read_series_csv(root / (id + suffix)), read_series_csv(test_path),
                      read_labels_csv(label_path)};
    ds.validate();
    out.push_back(std::move(ds));
  }
  return out;
}

void save_dataset(const fs::path& root, const std::vector<ServiceDataset>& services) {
  fs::create_directories(root);
  for (const auto& s : services) {
    s.validate();
    write_series_csv(root / (s.service_id + "_train.csv"), s.train);
    write_series_csv(root / (s.service_id + "_test.csv"), s.test);
    write_labels_csv(root / (s.service_id + "_labels.csv"), s.test_labels);
  }
}

std::vector<std::vector<std::size_t>> group_services(std::size_t count, std::size_t group_size) {
  if (group_size == 0) throw DataError("group size must be positive");
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t start = 0; start < count; start += group_size) {
    std::vector<std::size_t> g;
    for (std::size_t i = start; i < std::min(count, start + group_size); ++i) g.push_back(i);
    groups.push_back(std::move(g));
  }
  return groups;
}

double SignalPattern::value(std::size_t feature, double t, double period) const {
  double v = feature < offsets.size() ? offsets[feature] : 0.0;
  for (const auto& tone : features[feature]) {
    v += tone.amplitude * std::sin(2.0 * std::numbers::pi * tone.frequency * t / period + tone.phase);
  }
  return v;
}

const char* to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::point_spike: return "point_spike";
    case AnomalyKind::level_shift: return "level_shift";
    case AnomalyKind::contextual_swap: return "contextual_swap";
  }
  return "unknown";
}

AnomalyKind anomaly_kind_from_string(const std::string& name) {
  if (name == "point_spike") return AnomalyKind::point_spike;
  if (name == "level_shift") return AnomalyKind::level_shift;
  if (name == "contextual_swap") return AnomalyKind::contextual_swap;
  throw DataError("unknown anomaly type '" + name + "'");
}

void SynthSpec::validate() const {
  if (pattern.features.empty()) throw DataError("synthetic service '" + service_id + "' has no features");
  if (period == 0) throw DataError("synthetic period must be positive");
  for (const auto& feature : pattern.features) {
    for (const auto& tone : feature) {
      if (!(tone.frequency >= 0.0 && tone.frequency < static_cast<double>(period) / 2.0)) {
        throw DataError("tone frequency " + std::to_string(tone.frequency) +
                        " must lie below period/2");
      }
    }
  }
  if (!(noise >= 0.0)) throw DataError("noise level must be non-negative");
  for (const auto& ev : anomalies) {
    if (ev.duration == 0) throw DataError("anomaly duration must be >= 1");
    if (ev.position + ev.duration > test_length) {
      throw DataError("anomaly at " + std::to_string(ev.position) + " (duration " +
                      std::to_string(ev.duration) + ") runs past the test series");
    }
    for (const auto f : ev.features) {
      if (f >= pattern.feature_count()) throw DataError("anomaly touches unknown feature");
    }
    if (ev.kind == AnomalyKind::contextual_swap &&
        ev.donor.feature_count() != pattern.feature_count()) {
      throw DataError("contextual_swap donor must have " +
                      std::to_string(pattern.feature_count()) + " features");
    }
  }
}

ServiceDataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(spec.pattern.feature_count());
  const double period = static_cast<double>(spec.period);

  ServiceDataset ds;
  ds.service_id = spec.service_id;
  ds.train.resize(m, static_cast<Eigen::Index>(spec.train_length));
  ds.test.resize(m, static_cast<Eigen::Index>(spec.test_length));
  Matrix test_noise(m, static_cast<Eigen::Index>(spec.test_length));
  for (Eigen::Index t = 0; t < ds.train.cols(); ++t) {
    for (Eigen::Index f = 0; f < m; ++f) {
      ds.train(f, t) = spec.pattern.value(static_cast<std::size_t>(f), static_cast<double>(t), period) +
                       spec.noise * noise(rng);
    }
  }
  const auto offset = static_cast<double>(spec.train_length);
  for (Eigen::Index t = 0; t < ds.test.cols(); ++t) {
    for (Eigen::Index f = 0; f < m; ++f) {
      test_noise(f, t) = spec.noise * noise(rng);
      ds.test(f, t) = spec.pattern.value(static_cast<std::size_t>(f), offset + static_cast<double>(t),
                                         period) +
                      test_noise(f, t);
    }
  }

  ds.test_labels.assign(spec.test_length, 0);
  for (const auto& ev : spec.anomalies) {
    std::vector<std::size_t> features = ev.features;
    if (features.empty()) {
      for (std::size_t f = 0; f < spec.pattern.feature_count(); ++f) features.push_back(f);
    }
    for (std::size_t t = ev.position; t < ev.position + ev.duration; ++t) {
      ds.test_labels[t] = 1;
      const auto ti = static_cast<Eigen::Index>(t);
      for (const auto f : features) {
        const auto fi = static_cast<Eigen::Index>(f);
        if (ev.kind == AnomalyKind::contextual_swap) {
          ds.test(fi, ti) = ev.donor.value(f, offset + static_cast<double>(t), period) + test_noise(fi, ti);
        } else {
          double scale = 0.0;
          for (const auto& tone : spec.pattern.features[f]) scale = std::max(scale, std::abs(tone.amplitude));
          if (scale == 0.0) scale = 1.0;
          ds.test(fi, ti) += ev.magnitude * scale;
        }
      }
    }
  }
  return ds;
}

}  // namespace mace
