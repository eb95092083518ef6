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

#include "mace/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mace/dualconv.hpp"
#include "mace/error.hpp"
#include "mace/metrics.hpp"

namespace mace {

Matrix prepare_series(const Matrix& raw, const MinMaxStats& stats, const HyperParams& hp,
                      const PipelineOptions& opts) {
  auto normalized = minmax_normalize(raw, stats).values;
  if (!opts.amplify_time) return normalized;
  return amplify_time(normalized, hp);
}

std::vector<double> score_window(const ModelState& model, const BasisSet& basis,
                                 const TimeSeriesWindow& window) {
  const auto rep = represent(window, basis);
  const auto fr = forward(model, rep);
  const Matrix peak = ca_idft(Spectrum::from_polar(fr.recon_peak, rep.phase), basis).values;
  const Matrix valley = ca_idft(Spectrum::from_polar(fr.recon_valley, rep.phase), basis).values;

  const auto m = window.values.rows();
  const double inv_m = 1.0 / static_cast<double>(m);
  std::vector<double> scores(window.length());
  for (Eigen::Index t = 0; t < window.values.cols(); ++t) {
    double ep = 0.0;
    double ev = 0.0;
    for (Eigen::Index f = 0; f < m; ++f) {
      const double dp = window.values(f, t) - peak(f, t);
      const double dv = window.values(f, t) - valley(f, t);
      ep += dp * dp;
      ev += dv * dv;
    }
    scores[static_cast<std::size_t>(t)] = std::max(ep, ev) * inv_m;
  }
  return scores;
}

std::vector<double> aggregate(std::span<const std::vector<double>> window_scores,
                              std::span<const std::size_t> offsets, std::size_t length) {
  if (window_scores.size() != offsets.size()) {
    throw ShapeError("aggregate: " + std::to_string(window_scores.size()) + " windows but " +
                     std::to_string(offsets.size()) + " offsets");
  }
  std::vector<double> sum(length, 0.0);
  std::vector<std::size_t> count(length, 0);
  for (std::size_t w = 0; w < offsets.size(); ++w) {
    const auto& s = window_scores[w];
    if (offsets[w] + s.size() > length) {
      throw ShapeError("aggregate: window at offset " + std::to_string(offsets[w]) +
                       " runs past the series end");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      sum[offsets[w] + i] += s[i];
      ++count[offsets[w] + i];
    }
  }
  for (std::size_t t = 0; t < length; ++t) {
    if (count[t] == 0) throw DataError("aggregate: timestamp " + std::to_string(t) + " is uncovered");
    sum[t] /= static_cast<double>(count[t]);
  }
  return sum;
}

std::vector<int> apply_threshold(std::span<const double> scores, double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}

double choose_threshold(std::span<const double> scores, const std::optional<LabelSeries>& labels,
                        const ThresholdMode& mode) {
  if (scores.empty()) throw DataError("cannot choose a threshold for an empty score series");

  if (mode.kind == ThresholdMode::Kind::quantile) {
    if (!(mode.q >= 0.0 && mode.q <= 1.0)) throw DataError("quantile must lie in [0, 1]");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = mode.q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  }

  if (!labels) throw DataError("best_f1 thresholding needs labels");
  if (labels->size() != scores.size()) {
    throw ShapeError("labels length " + std::to_string(labels->size()) +
                     " differs from scores length " + std::to_string(scores.size()));
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t positives = 0;
  for (const int l : *labels) positives += l != 0 ? 1 : 0;

  // Thresholds descend through the distinct scores; at threshold v the
  // flagged set is every score strictly above v.
  std::size_t tp = 0;
  std::size_t flagged = 0;
  double best_f1 = -1.0;
  double best_threshold = scores[order.front()];
  std::size_t i = 0;
  while (true) {
    const double threshold =
        i < order.size() ? scores[order[i]]
                         : std::nextafter(scores[order.back()], -std::numeric_limits<double>::infinity());
    const auto c = Confusion::from_counts(tp, flagged - tp, positives - tp);
    const double f1 = c.f1();
    if (f1 >= best_f1) {
      best_f1 = f1;
      best_threshold = threshold;
    }
    if (i >= order.size()) break;
    const double v = scores[order[i]];
    while (i < order.size() && scores[order[i]] == v) {
      tp += (*labels)[order[i]] != 0 ? 1 : 0;
      ++flagged;
      ++i;
    }
  }
  return best_threshold;
}

std::vector<int> point_adjust(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("point_adjust: predictions and labels differ in length");
  }
  std::vector<int> out(predictions.begin(), predictions.end());
  std::size_t t = 0;
  while (t < labels.size()) {
    if (labels[t] == 0) {
      ++t;
      continue;
    }
    std::size_t end = t;
    bool hit = false;
    while (end < labels.size() && labels[end] != 0) hit |= predictions[end++] != 0;
    if (hit) std::fill(out.begin() + static_cast<long>(t), out.begin() + static_cast<long>(end), 1);
    t = end;
  }
  return out;
}

ServiceModel preprocess_service(const ServiceDataset& dataset, const HyperParams& hp,
                                const PipelineOptions& opts) {
  dataset.validate();
  ServiceModel sm;
  sm.stats = minmax_normalize(dataset.train).stats;
  const Matrix series = prepare_series(dataset.train, sm.stats, hp, opts);
  if (!opts.pattern_extraction) {
    sm.basis = BasisSet::full(dataset.service_id, static_cast<std::size_t>(series.rows()),
                              hp.window_size);
    return sm;
  }
  const std::size_t hop = opts.basis_hop == 0 ? hp.window_size : opts.basis_hop;
  const auto windows = sliding_windows(series, hp.window_size, hop, dataset.service_id);
  sm.basis = select_basis(windows, hp.k_bases);
  sm.basis.service_id = dataset.service_id;
  return sm;
}

TrainResult train_group(std::span<const ServiceDataset> datasets,
                        std::span<const ServiceModel> services, const HyperParams& hp,
                        const PipelineOptions& opts) {
  hp.validate();
  if (datasets.empty()) throw DataError("a service group needs at least one service");
  if (services.size() != datasets.size()) {
    throw ShapeError("train_group: " + std::to_string(services.size()) + " fitted services for " +
                     std::to_string(datasets.size()) + " datasets");
  }
  std::vector<FrequencyRepresentation> batch;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const auto& ds = datasets[i];
    const Matrix series = prepare_series(ds.train, services[i].stats, hp, opts);
    for (const auto& w : sliding_windows(series, hp.window_size, opts.train_hop, ds.service_id)) {
      batch.push_back(represent(w, services[i].basis));
    }
  }

  ModelConfig cfg = ModelConfig::from(hp);
  if (!opts.pattern_extraction) cfg.k_bases = hp.max_bases();
  cfg.dualistic = opts.dualistic_freq;
  auto model = ModelState::init(cfg, opts.seed, hp.learning_rate);
  warm_start_bias(model, batch);
  return train(std::move(model), batch, opts.epochs);
}

GroupFit fit_service_group(std::span<const ServiceDataset> datasets, const HyperParams& hp,
                           const PipelineOptions& opts) {
  hp.validate();
  if (datasets.empty()) throw DataError("a service group needs at least one service");
  GroupFit fit;
  for (const auto& ds : datasets) fit.services.push_back(preprocess_service(ds, hp, opts));
  auto trained = train_group(datasets, fit.services, hp, opts);
  fit.model = std::move(trained.model);
  fit.loss_curve = std::move(trained.loss_curve);
  return fit;
}

std::vector<double> detect_series(const ModelState& model, const ServiceModel& service,
                                  const Matrix& raw, const HyperParams& hp,
                                  const PipelineOptions& opts) {
  const Matrix series = prepare_series(raw, service.stats, hp, opts);
  const auto offsets = window_offsets(static_cast<std::size_t>(series.cols()), hp.window_size, 1);
  std::vector<std::vector<double>> scores;
  scores.reserve(offsets.size());
  TimeSeriesWindow window;
  window.service_id = service.basis.service_id;
  for (const auto off : offsets) {
    window.values = series.middleCols(static_cast<Eigen::Index>(off),
                                      static_cast<Eigen::Index>(hp.window_size));
    window.start_index = off;
    scores.push_back(score_window(model, service.basis, window));
  }
  return aggregate(scores, offsets, static_cast<std::size_t>(series.cols()));
}

}  // namespace mace
