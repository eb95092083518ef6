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

// mace: command-line driver for the frequency-domain anomaly detector.
//
//   mace preprocess|train|detect|eval|theory|synth|run --config <path>
//        [--seed N] [--point-adjust] [--no-patex] [--no-dualconv-t] [--no-dualconv-f]
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure,
// 4 a theory check did not pass.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mace/config.hpp"
#include "mace/error.hpp"
#include "mace/experiment.hpp"
#include "mace/theory.hpp"

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool point_adjust = false;
  bool no_patex = false;
  bool no_dualconv_t = false;
  bool no_dualconv_f = false;
};

mace::RunConfig resolve(const Flags& f) {
  auto cfg = mace::load_config(f.config);
  if (f.seed) cfg.pipeline.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.point_adjust) cfg.point_adjust = true;
  if (f.no_patex) cfg.pipeline.pattern_extraction = false;
  if (f.no_dualconv_t) cfg.pipeline.amplify_time = false;
  if (f.no_dualconv_f) cfg.pipeline.dualistic_freq = false;
  cfg.validate();
  return cfg;
}

struct Groups {
  std::vector<mace::ServiceDataset> services;
  std::vector<std::vector<mace::ServiceDataset>> members;
};

Groups load_groups(const mace::RunConfig& cfg) {
  Groups g;
  g.services = mace::load_services(cfg);
  for (const auto& idx : mace::group_services(g.services.size(), cfg.group_size)) {
    std::vector<mace::ServiceDataset> m;
    for (const auto i : idx) m.push_back(g.services[i]);
    g.members.push_back(std::move(m));
  }
  return g;
}

int cmd_preprocess(const mace::RunConfig& cfg) {
  const auto g = load_groups(cfg);
  for (std::size_t i = 0; i < g.members.size(); ++i) {
    const auto dir = mace::group_dir(cfg, i);
    mace::preprocess_stage(cfg, g.members[i], dir);
    std::cerr << "preprocess: " << g.members[i].size() << " services -> " << dir.string() << "\n";
  }
  return 0;
}

int cmd_train(const mace::RunConfig& cfg) {
  const auto g = load_groups(cfg);
  for (std::size_t i = 0; i < g.members.size(); ++i) {
    const auto dir = mace::group_dir(cfg, i);
    const auto services = mace::read_service_models(dir, g.members[i], cfg.hp.window_size);
    const auto r = mace::train_stage(cfg, g.members[i], services, dir);
    std::cerr << "train: group " << i << " final loss "
              << (r.loss_curve.empty() ? 0.0 : r.loss_curve.back()) << "\n";
  }
  return 0;
}

int cmd_detect(const mace::RunConfig& cfg) {
  const auto g = load_groups(cfg);
  for (std::size_t i = 0; i < g.members.size(); ++i) {
    const auto dir = mace::group_dir(cfg, i);
    const auto services = mace::read_service_models(dir, g.members[i], cfg.hp.window_size);
    const auto model = mace::load_model(dir / "model.bin");
    mace::detect_stage(cfg, g.members[i], services, model, dir);
    std::cerr << "detect: group " << i << " scored\n";
  }
  return 0;
}

int cmd_eval(const mace::RunConfig& cfg) {
  const auto g = load_groups(cfg);
  std::vector<mace::ServiceMetrics> rows;
  for (std::size_t i = 0; i < g.members.size(); ++i) {
    const auto scores = mace::read_group_scores(mace::group_dir(cfg, i), g.members[i]);
    for (auto& m : mace::eval_stage(cfg, i, scores)) rows.push_back(std::move(m));
  }
  mace::write_metrics_csv(cfg.out_dir / "metrics.csv", rows);
  std::ifstream in(cfg.out_dir / "metrics.csv");
  std::cout << in.rdbuf();
  return 0;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

int cmd_theory(const mace::RunConfig& cfg) {
  const auto verdicts = mace::theory::run_suite(cfg.theory);
  std::ostringstream os;
  os << "check,statistic,bound,result\n";
  bool all = true;
  for (const auto& v : verdicts) {
    os << v.check << ',' << shortest(v.statistic) << ',' << shortest(v.bound) << ','
       << (v.pass ? "pass" : "fail") << '\n';
    all = all && v.pass;
  }
  fs::create_directories(cfg.out_dir);
  std::ofstream(cfg.out_dir / "theory.csv") << os.str();
  std::cout << os.str();
  return all ? 0 : 4;
}

int cmd_synth(const mace::RunConfig& cfg) {
  if (cfg.data_dir.empty()) throw mace::DataError("synth needs data_dir in the config");
  const auto services = mace::generate_fixture(cfg.fixture, cfg.synth);
  mace::save_dataset(cfg.data_dir, services);
  std::cerr << "synth: " << services.size() << " services -> " << cfg.data_dir.string() << "\n";
  return 0;
}

int cmd_run(const mace::RunConfig& cfg) {
  const auto report = mace::run_experiment(cfg);
  int code = 0;
  for (const auto& g : report.groups) {
    if (g.ok) continue;
    std::cerr << "group " << g.index << " failed in " << g.failed_stage << ": " << g.error << "\n";
    if (code == 0) code = g.error.rfind("numerical", 0) == 0 ? 3 : 2;
  }
  std::printf("macro precision %.6f recall %.6f f1 %.6f (%zu services, %.1fs)\n",
              report.macro.precision, report.macro.recall, report.macro.f1,
              report.services.size(), report.seconds);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain multi-pattern anomaly detector"};
  app.require_subcommand(1);
  Flags flags;

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const mace::RunConfig&);
  };
  const Command commands[] = {
      {"preprocess", "normalize and select per-service bases", cmd_preprocess},
      {"train", "train one model per service group", cmd_train},
      {"detect", "score test splits and pick thresholds", cmd_detect},
      {"eval", "compute per-service and macro metrics", cmd_eval},
      {"theory", "run the numerical check suite", cmd_theory},
      {"synth", "write the synthetic fixture to data_dir", cmd_synth},
      {"run", "all stages end to end", cmd_run},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", flags.config, "configuration file")->required();
    sub->add_option("--seed", flags.seed, "override the model seed");
    sub->add_option("--out", flags.out, "override out_dir");
    sub->add_flag("--point-adjust", flags.point_adjust, "point-adjusted evaluation");
    sub->add_flag("--no-patex", flags.no_patex, "full-spectrum ablation");
    sub->add_flag("--no-dualconv-t", flags.no_dualconv_t, "skip time-domain amplification");
    sub->add_flag("--no-dualconv-f", flags.no_dualconv_f, "plain convolution in the autoencoder");
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const auto cfg = resolve(flags);
    for (const auto& [sub, cmd] : subs) {
      if (sub->parsed()) return cmd->fn(cfg);
    }
  } catch (const mace::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const mace::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
