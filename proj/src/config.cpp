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

#include "mace/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mace/error.hpp"
#include "text_util.hpp"

namespace mace {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError(where + ": expected true or false, got '" + v + "'");
}

int parse_int(const std::string& v, const std::string& where) {
  const double d = text::parse_double(v, where);
  if (d != static_cast<double>(static_cast<int>(d))) {
    throw DataError(where + ": expected an integer, got '" + v + "'");
  }
  return static_cast<int>(d);
}

template <typename T>
Setter size_field(T RunConfig::*group, std::size_t T::*field) {
  return [group, field](RunConfig& c, const std::string& v, const std::string& where) {
    c.*group.*field = text::parse_size(v, where);
  };
}

template <typename T>
Setter double_field(T RunConfig::*group, double T::*field) {
  return [group, field](RunConfig& c, const std::string& v, const std::string& where) {
    c.*group.*field = text::parse_double(v, where);
  };
}

template <typename T>
Setter int_field(T RunConfig::*group, int T::*field) {
  return [group, field](RunConfig& c, const std::string& v, const std::string& where) {
    c.*group.*field = parse_int(v, where);
  };
}

template <typename T>
Setter u64_field(T RunConfig::*group, std::uint64_t T::*field) {
  return [group, field](RunConfig& c, const std::string& v, const std::string& where) {
    c.*group.*field = text::parse_size(v, where);
  };
}

Setter negated_flag(bool PipelineOptions::*field) {
  return [field](RunConfig& c, const std::string& v, const std::string& where) {
    c.pipeline.*field = !parse_bool(v, where);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data_dir", [](RunConfig& c, const std::string& v, const std::string&) { c.data_dir = v; }},
      {"out_dir", [](RunConfig& c, const std::string& v, const std::string&) { c.out_dir = v; }},
      {"window", size_field(&RunConfig::hp, &HyperParams::window_size)},
      {"kernel", size_field(&RunConfig::hp, &HyperParams::kernel_len)},
      {"k_bases", size_field(&RunConfig::hp, &HyperParams::k_bases)},
      {"gamma_t", int_field(&RunConfig::hp, &HyperParams::gamma_t)},
      {"gamma_f", int_field(&RunConfig::hp, &HyperParams::gamma_f)},
      {"sigma_t", double_field(&RunConfig::hp, &HyperParams::sigma_t)},
      {"sigma_f", double_field(&RunConfig::hp, &HyperParams::sigma_f)},
      {"learning_rate", double_field(&RunConfig::hp, &HyperParams::learning_rate)},
      {"epochs", size_field(&RunConfig::pipeline, &PipelineOptions::epochs)},
      {"seed", u64_field(&RunConfig::pipeline, &PipelineOptions::seed)},
      {"train_hop", size_field(&RunConfig::pipeline, &PipelineOptions::train_hop)},
      {"basis_hop", size_field(&RunConfig::pipeline, &PipelineOptions::basis_hop)},
      {"no_patex", negated_flag(&PipelineOptions::pattern_extraction)},
      {"no_dualconv_t", negated_flag(&PipelineOptions::amplify_time)},
      {"no_dualconv_f", negated_flag(&PipelineOptions::dualistic_freq)},
      {"threshold",
       [](RunConfig& c, const std::string& v, const std::string& where) {
         if (v == "best_f1") c.threshold.kind = ThresholdMode::Kind::best_f1;
         else if (v == "quantile") c.threshold.kind = ThresholdMode::Kind::quantile;
         else throw DataError(where + ": threshold must be best_f1 or quantile");
       }},
      {"quantile",
       [](RunConfig& c, const std::string& v, const std::string& where) {
         c.threshold.q = text::parse_double(v, where);
       }},
      {"point_adjust",
       [](RunConfig& c, const std::string& v, const std::string& where) {
         c.point_adjust = parse_bool(v, where);
       }},
      {"group_size",
       [](RunConfig& c, const std::string& v, const std::string& where) {
         c.group_size = text::parse_size(v, where);
       }},
      {"synth_fixture",
       [](RunConfig& c, const std::string& v, const std::string&) {
         c.fixture = fixture_kind_from_string(v);
       }},
      {"synth_services", size_field(&RunConfig::synth, &FixtureOptions::services)},
      {"synth_features", size_field(&RunConfig::synth, &FixtureOptions::features)},
      {"synth_period", size_field(&RunConfig::synth, &FixtureOptions::period)},
      {"synth_train_length", size_field(&RunConfig::synth, &FixtureOptions::train_length)},
      {"synth_test_length", size_field(&RunConfig::synth, &FixtureOptions::test_length)},
      {"synth_anomalies", size_field(&RunConfig::synth, &FixtureOptions::anomalies)},
      {"synth_anomaly_duration", size_field(&RunConfig::synth, &FixtureOptions::anomaly_duration)},
      {"synth_spike_magnitude", double_field(&RunConfig::synth, &FixtureOptions::spike_magnitude)},
      {"synth_noise", double_field(&RunConfig::synth, &FixtureOptions::noise)},
      {"synth_seed", u64_field(&RunConfig::synth, &FixtureOptions::seed)},
      {"theory_configs", size_field(&RunConfig::theory, &theory::SuiteOptions::theorem1_configs)},
      {"theory_samples", size_field(&RunConfig::theory, &theory::SuiteOptions::theorem1_samples)},
      {"theory_spectra", size_field(&RunConfig::theory, &theory::SuiteOptions::corollary_spectra)},
      {"theory_trials", size_field(&RunConfig::theory, &theory::SuiteOptions::corollary_trials)},
      {"theory_max_n", size_field(&RunConfig::theory, &theory::SuiteOptions::identity_max_n)},
      {"theory_seed", u64_field(&RunConfig::theory, &theory::SuiteOptions::seed)},
  };
  return table;
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

void RunConfig::validate() const {
  hp.validate();
  if (group_size == 0) throw DataError("group_size must be positive");
  if (pipeline.train_hop == 0) throw DataError("train_hop must be positive");
  if (threshold.kind == ThresholdMode::Kind::quantile && !(threshold.q >= 0.0 && threshold.q <= 1.0)) {
    throw DataError("quantile must lie in [0, 1]");
  }
  if (out_dir.empty()) throw DataError("out_dir must not be empty");
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = text::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw DataError(where + ": expected 'key = value'");
    const std::string key(text::trim(body.substr(0, eq)));
    const std::string value(text::trim(body.substr(eq + 1)));
    const auto it = setters().find(key);
    if (it == setters().end()) throw DataError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw DataError(where + ": key '" + key + "' set twice");
    it->second(cfg, value, where);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

std::string to_text(const RunConfig& c) {
  using text::format_double;
  std::ostringstream os;
  os << "data_dir = " << c.data_dir.string() << "\n"
     << "out_dir = " << c.out_dir.string() << "\n"
     << "window = " << c.hp.window_size << "\n"
     << "kernel = " << c.hp.kernel_len << "\n"
     << "k_bases = " << c.hp.k_bases << "\n"
     << "gamma_t = " << c.hp.gamma_t << "\n"
     << "gamma_f = " << c.hp.gamma_f << "\n"
     << "sigma_t = " << format_double(c.hp.sigma_t) << "\n"
     << "sigma_f = " << format_double(c.hp.sigma_f) << "\n"
     << "learning_rate = " << format_double(c.hp.learning_rate) << "\n"
     << "epochs = " << c.pipeline.epochs << "\n"
     << "seed = " << c.pipeline.seed << "\n"
     << "train_hop = " << c.pipeline.train_hop << "\n"
     << "basis_hop = " << c.pipeline.basis_hop << "\n"
     << "no_patex = " << bool_text(!c.pipeline.pattern_extraction) << "\n"
     << "no_dualconv_t = " << bool_text(!c.pipeline.amplify_time) << "\n"
     << "no_dualconv_f = " << bool_text(!c.pipeline.dualistic_freq) << "\n"
     << "threshold = " << (c.threshold.kind == ThresholdMode::Kind::best_f1 ? "best_f1" : "quantile") << "\n"
     << "quantile = " << format_double(c.threshold.q) << "\n"
     << "point_adjust = " << bool_text(c.point_adjust) << "\n"
     << "group_size = " << c.group_size << "\n"
     << "synth_fixture = " << to_string(c.fixture) << "\n"
     << "synth_services = " << c.synth.services << "\n"
     << "synth_features = " << c.synth.features << "\n"
     << "synth_period = " << c.synth.period << "\n"
     << "synth_train_length = " << c.synth.train_length << "\n"
     << "synth_test_length = " << c.synth.test_length << "\n"
     << "synth_anomalies = " << c.synth.anomalies << "\n"
     << "synth_anomaly_duration = " << c.synth.anomaly_duration << "\n"
     << "synth_spike_magnitude = " << format_double(c.synth.spike_magnitude) << "\n"
     << "synth_noise = " << format_double(c.synth.noise) << "\n"
     << "synth_seed = " << c.synth.seed << "\n"
     << "theory_configs = " << c.theory.theorem1_configs << "\n"
     << "theory_samples = " << c.theory.theorem1_samples << "\n"
     << "theory_spectra = " << c.theory.corollary_spectra << "\n"
     << "theory_trials = " << c.theory.corollary_trials << "\n"
     << "theory_max_n = " << c.theory.identity_max_n << "\n"
     << "theory_seed = " << c.theory.seed << "\n";
  return os.str();
}

std::uint64_t config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mace
