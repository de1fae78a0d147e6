// Copyright 2026 The Crowneval Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "crowneval/tile_metrics.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "crowneval/errors.h"
#include "crowneval/parallel.h"

namespace crowneval {

namespace {

enum class PredStatus : uint8_t { kUnvisited, kTruePositive, kFalsePositive,
                                  kIgnored };

std::optional<double> Mean(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

double RecallLevel(int k) {
  if (k >= kRecallLevels - 1) return 1.0;
  return static_cast<double>(k) * (1.0 / (kRecallLevels - 1));
}

TileEvaluator::TileEvaluator(std::span<const TileCase> tiles,
                             TileEvalOptions options)
    : options_(options) {
  if (options_.max_detections < 1) {
    throw ValidationError("max_detections must be at least 1");
  }
  std::set<std::string> seen;
  for (const TileCase& t : tiles) {
    if (!seen.insert(t.id).second) {
      throw ValidationError("duplicate tile id '" + t.id + "'");
    }
  }
  tiles_.resize(tiles.size());
  ParallelFor(tiles.size(), [&](size_t i) {
    const TileCase& t = tiles[i];
    Prepared& p = tiles_[i];
    p.id = t.id;
    p.predictions = t.predictions;
    p.ground_truths = t.ground_truths;
    for (auto* side : {&p.predictions, &p.ground_truths}) {
      for (CrownInstance& c : *side) {
        if (!c.area_m2 && t.gsd > 0.0) DeriveArea(c, t.gsd);
      }
    }
    p.ious = ComputeIouTable(p.predictions, p.ground_truths, options_.iou_kind);
    p.scores = Scores(p.predictions);
    p.order = MatchOrder(p.scores, p.ious);
    if (p.order.size() > options_.max_detections) {
      p.order.resize(options_.max_detections);
    }
  });
  id_order_.resize(tiles_.size());
  std::iota(id_order_.begin(), id_order_.end(), 0);
  std::sort(id_order_.begin(), id_order_.end(),
            [&](size_t a, size_t b) { return tiles_[a].id < tiles_[b].id; });
}

std::vector<MatchResult> TileEvaluator::Matches(
    double tau, std::optional<SizeClass> size_filter) const {
  std::vector<MatchResult> out;
  out.reserve(tiles_.size());
  for (const Prepared& t : tiles_) {
    const StratifyFlags flags =
        Stratify(t.predictions, t.ground_truths, size_filter);
    out.push_back(GreedyMatchInOrder(t.ious, t.order, flags, tau));
  }
  return out;
}

TileEvaluator::Pooled TileEvaluator::Pool(
    double tau, std::optional<SizeClass> size_filter) const {
  Pooled pooled;
  for (size_t ti : id_order_) {
    const Prepared& t = tiles_[ti];
    const StratifyFlags flags =
        Stratify(t.predictions, t.ground_truths, size_filter);
    const MatchResult m = GreedyMatchInOrder(t.ious, t.order, flags, tau);
    std::vector<PredStatus> status(t.predictions.size(),
                                   PredStatus::kUnvisited);
    for (const MatchedPair& pair : m.matched) {
      status[pair.prediction] = PredStatus::kTruePositive;
    }
    for (size_t p : m.false_positives) status[p] = PredStatus::kFalsePositive;
    for (size_t p : m.ignored_predictions) status[p] = PredStatus::kIgnored;
    for (size_t p : t.order) {
      if (status[p] == PredStatus::kIgnored) continue;
      pooled.scores.push_back(t.scores[p]);
      pooled.is_tp.push_back(status[p] == PredStatus::kTruePositive);
    }
    pooled.num_ground_truths +=
        m.matched.size() + m.false_negatives.size();
  }
  // Stable: ties keep tile-id order, then per-tile order.
  std::vector<size_t> idx(pooled.scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return pooled.scores[a] > pooled.scores[b];
  });
  Pooled sorted;
  sorted.num_ground_truths = pooled.num_ground_truths;
  sorted.scores.reserve(idx.size());
  sorted.is_tp.reserve(idx.size());
  for (size_t i : idx) {
    sorted.scores.push_back(pooled.scores[i]);
    sorted.is_tp.push_back(pooled.is_tp[i]);
  }
  return sorted;
}

PrCurve TileEvaluator::Curve(double tau,
                             std::optional<SizeClass> size_filter) const {
  const Pooled pooled = Pool(tau, size_filter);
  PrCurve curve;
  curve.num_ground_truths = pooled.num_ground_truths;
  curve.scores = pooled.scores;
  const size_t n = pooled.scores.size();
  curve.precision.resize(n);
  curve.recall.resize(n);
  double tp = 0.0;
  double fp = 0.0;
  const double npig = static_cast<double>(pooled.num_ground_truths);
  for (size_t i = 0; i < n; ++i) {
    if (pooled.is_tp[i]) {
      tp += 1.0;
    } else {
      fp += 1.0;
    }
    curve.recall[i] = npig > 0.0 ? tp / npig : 0.0;
    curve.precision[i] = tp / (tp + fp);
  }
  std::vector<double> envelope = curve.precision;
  for (size_t i = n; i-- > 1;) {
    envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  }
  for (int k = 0; k < kRecallLevels; ++k) {
    const double level = RecallLevel(k);
    const auto it =
        std::lower_bound(curve.recall.begin(), curve.recall.end(), level);
    const auto pos = static_cast<size_t>(it - curve.recall.begin());
    curve.interpolated[k] = pos < n ? envelope[pos] : 0.0;
  }
  return curve;
}

std::optional<double> TileEvaluator::AveragePrecision(
    double tau, std::optional<SizeClass> size_filter) const {
  const PrCurve curve = Curve(tau, size_filter);
  if (curve.num_ground_truths == 0) {
    if (!size_filter && !curve.scores.empty()) return 0.0;
    return std::nullopt;
  }
  double sum = 0.0;
  for (double q : curve.interpolated) sum += q;
  return sum / kRecallLevels;
}

std::optional<double> TileEvaluator::Recall(
    double tau, std::optional<SizeClass> size_filter) const {
  size_t matched = 0;
  size_t total = 0;
  for (const MatchResult& m : Matches(tau, size_filter)) {
    matched += m.matched.size();
    total += m.matched.size() + m.false_negatives.size();
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(matched) / static_cast<double>(total);
}

std::optional<double> TileEvaluator::MeanRecall(
    const ThresholdSet& thresholds,
    std::optional<SizeClass> size_filter) const {
  std::vector<std::optional<double>> values;
  for (double tau : thresholds.values()) {
    values.push_back(Recall(tau, size_filter));
  }
  return Mean(values);
}

TileMetrics TileEvaluator::Summary(const ThresholdSet& thresholds) const {
  TileMetrics m;
  m.thresholds = thresholds.values();
  m.max_detections = options_.max_detections;
  for (double tau : thresholds.values()) {
    m.ap.push_back(AveragePrecision(tau, std::nullopt));
    m.ar.push_back(Recall(tau, std::nullopt));
  }
  m.map = Mean(m.ap);
  m.mar = Mean(m.ar);
  auto at = [&](const std::vector<std::optional<double>>& per_tau, double tau,
                bool precision) -> std::optional<double> {
    if (auto i = thresholds.IndexOf(tau)) return per_tau[*i];
    return precision ? AveragePrecision(tau, std::nullopt)
                     : Recall(tau, std::nullopt);
  };
  m.ap50 = at(m.ap, 0.50, true);
  m.ap75 = at(m.ap, 0.75, true);
  m.ar50 = at(m.ar, 0.50, false);
  m.ar75 = at(m.ar, 0.75, false);
  for (SizeClass c : kAllSizeClasses) {
    std::vector<std::optional<double>> ap;
    std::vector<std::optional<double>> ar;
    for (double tau : thresholds.values()) {
      ap.push_back(AveragePrecision(tau, c));
      ar.push_back(Recall(tau, c));
    }
    m.per_class[static_cast<int>(c)] = {Mean(ap), Mean(ar)};
  }
  return m;
}

std::optional<double> AveragePrecision(std::span<const TileCase> tiles,
                                       double tau,
                                       std::optional<SizeClass> size_filter,
                                       const TileEvalOptions& options) {
  return TileEvaluator(tiles, options).AveragePrecision(tau, size_filter);
}

std::optional<double> AverageRecall(std::span<const TileCase> tiles,
                                    const ThresholdSet& thresholds,
                                    std::optional<SizeClass> size_filter,
                                    const TileEvalOptions& options) {
  return TileEvaluator(tiles, options).MeanRecall(thresholds, size_filter);
}

TileMetrics CocoSummary(std::span<const TileCase> tiles,
                        const ThresholdSet& thresholds,
                        const TileEvalOptions& options) {
  return TileEvaluator(tiles, options).Summary(thresholds);
}

}  // namespace crowneval
