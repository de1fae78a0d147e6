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
#include "crowneval/raster_metrics.h"

#include <algorithm>
#include <numeric>

#include "crowneval/errors.h"
#include "crowneval/matching.h"
#include "crowneval/parallel.h"

namespace crowneval {

namespace {

int64_t CountFalse(const std::vector<bool>& flags) {
  return std::count(flags.begin(), flags.end(), false);
}

std::vector<CrownInstance> WithAreas(std::span<const CrownInstance> in,
                                     double gsd) {
  std::vector<CrownInstance> out(in.begin(), in.end());
  for (CrownInstance& c : out) {
    if (!c.area_m2 && gsd > 0.0) DeriveArea(c, gsd);
  }
  return out;
}

StratifyFlags NoFlags(size_t preds, size_t gts) {
  return {std::vector<bool>(gts, false), std::vector<bool>(preds, false)};
}

// Rows of `full` selected by `rows`, in that order.
IouTable SelectRows(const IouTable& full, std::span<const size_t> rows) {
  IouTable out(rows.size(), full.cols());
  for (size_t k = 0; k < rows.size(); ++k) {
    for (const IouEntry& e : full.Row(rows[k])) out.Add(k, e.column, e.iou);
  }
  return out;
}

}  // namespace

std::string_view NmsGeometryName(NmsGeometry g) {
  return g == NmsGeometry::kMask ? "mask" : "box";
}

std::optional<NmsGeometry> ParseNmsGeometry(std::string_view name) {
  if (name == "mask") return NmsGeometry::kMask;
  if (name == "box") return NmsGeometry::kBox;
  return std::nullopt;
}

std::string_view FilterOrderName(FilterOrder o) {
  return o == FilterOrder::kConfidenceFirst ? "confidence_first" : "nms_first";
}

std::optional<FilterOrder> ParseFilterOrder(std::string_view name) {
  if (name == "confidence_first") return FilterOrder::kConfidenceFirst;
  if (name == "nms_first") return FilterOrder::kNmsFirst;
  return std::nullopt;
}

std::string_view EdgePolicyName(EdgePolicy p) {
  return p == EdgePolicy::kNone ? "none" : "demote_truncated";
}

std::optional<EdgePolicy> ParseEdgePolicy(std::string_view name) {
  if (name == "none") return EdgePolicy::kNone;
  if (name == "demote_truncated") return EdgePolicy::kDemoteTruncated;
  return std::nullopt;
}

void AggregationConfig::Validate() const {
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) {
    throw ValidationError("nms_iou must be in (0, 1], got " +
                          std::to_string(nms_iou));
  }
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw ValidationError("confidence_threshold must be in [0, 1], got " +
                          std::to_string(confidence_threshold));
  }
}

TileLayout TileLayout::Identity(const PixelRect& extent) {
  TileLayout layout;
  layout.raster_extent = extent;
  layout.windows["raster"] = extent;
  return layout;
}

NmsCandidates::NmsCandidates(const TilePredictions& tile_predictions,
                             const TileLayout& layout, NmsGeometry geometry,
                             EdgePolicy policy)
    : policy_(policy) {
  const PixelRect& extent = layout.raster_extent;
  for (const auto& [tile_id, predictions] : tile_predictions) {
    const auto it = layout.windows.find(tile_id);
    if (it == layout.windows.end()) {
      throw ValidationError("no window for tile '" + tile_id + "'");
    }
    const PixelRect& w = it->second;
    for (const CrownInstance& local : predictions) {
      if (local.mask && local.mask->Empty()) continue;
      const Box b = InstanceBox(local);
      const bool truncated =
          (w.x > extent.x && b.x0 <= 0.0) ||
          (w.Right() < extent.Right() && b.x1 >= static_cast<double>(w.width)) ||
          (w.y > extent.y && b.y0 <= 0.0) ||
          (w.Bottom() < extent.Bottom() &&
           b.y1 >= static_cast<double>(w.height));
      CrownInstance c = Translated(local, w.x, w.y);
      c.truncated = truncated;
      if (geometry == NmsGeometry::kMask) EnsureMask(c);
      instances_.push_back(std::move(c));
    }
  }
  // Stable: equal keys keep tile-id order, then per-tile input order.
  std::stable_sort(instances_.begin(), instances_.end(),
                   [&](const CrownInstance& a, const CrownInstance& b) {
                     if (policy_ == EdgePolicy::kDemoteTruncated &&
                         a.truncated != b.truncated) {
                       return !a.truncated;
                     }
                     return a.score > b.score;
                   });

  std::vector<Box> boxes;
  boxes.reserve(instances_.size());
  for (const CrownInstance& c : instances_) boxes.push_back(InstanceBox(c));
  const BoxIndex index(boxes);
  overlaps_.resize(instances_.size());
  for (size_t i = 0; i < instances_.size(); ++i) {
    for (uint32_t j : index.Query(boxes[i])) {
      if (j >= i) break;
      double inter = 0.0;
      double area_i = 0.0;
      double area_j = 0.0;
      if (geometry == NmsGeometry::kMask) {
        inter = static_cast<double>(
            IntersectionCount(*instances_[i].mask, *instances_[j].mask));
        area_i = static_cast<double>(instances_[i].mask->Count());
        area_j = static_cast<double>(instances_[j].mask->Count());
      } else {
        inter = BoxIntersection(boxes[i], boxes[j]).Area();
        area_i = boxes[i].Area();
        area_j = boxes[j].Area();
      }
      if (!(inter > 0.0)) continue;
      overlaps_[i].push_back(
          {j, inter / (area_i + area_j - inter), inter / area_i});
    }
  }
}

std::vector<size_t> NmsCandidates::Run(double nms_iou, double confidence,
                                       FilterOrder order) const {
  std::vector<bool> kept(instances_.size(), false);
  std::vector<size_t> out;
  for (size_t i = 0; i < instances_.size(); ++i) {
    const CrownInstance& c = instances_[i];
    if (order == FilterOrder::kConfidenceFirst && c.score < confidence) {
      continue;
    }
    const bool use_coverage =
        policy_ == EdgePolicy::kDemoteTruncated && c.truncated;
    bool suppressed = false;
    for (const Overlap& o : overlaps_[i]) {
      if (!kept[o.earlier]) continue;
      if (o.iou >= nms_iou || (use_coverage && o.coverage >= nms_iou)) {
        suppressed = true;
        break;
      }
    }
    if (suppressed) continue;
    kept[i] = true;
    out.push_back(i);
  }
  if (order == FilterOrder::kNmsFirst) {
    std::erase_if(out,
                  [&](size_t i) { return instances_[i].score < confidence; });
  }
  return out;
}

std::vector<CrownInstance> AggregateTiles(
    const TilePredictions& tile_predictions, const TileLayout& layout,
    const AggregationConfig& config) {
  config.Validate();
  const NmsCandidates candidates(tile_predictions, layout, config.nms_geometry,
                                 config.edge_policy);
  std::vector<CrownInstance> out;
  for (size_t i : candidates.Run(config.nms_iou, config.confidence_threshold,
                                 config.filter_order)) {
    out.push_back(candidates.instances()[i]);
  }
  return out;
}

RasterF1 F1FromCounts(int64_t tp, int64_t fp, int64_t fn) {
  RasterF1 r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  if (tp == 0) return r;
  r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  return r;
}

RasterScorer::RasterScorer(ThresholdSet thresholds, RasterEvalOptions options)
    : thresholds_(std::move(thresholds)), options_(options) {
  for (auto& c : counts_) c.assign(thresholds_.size(), Counts{});
}

void RasterScorer::AddLevel(int slot, const IouTable& ious,
                            std::span<const double> scores,
                            const StratifyFlags& flags) {
  const std::vector<size_t> order = MatchOrder(scores, ious);
  for (size_t t = 0; t < thresholds_.size(); ++t) {
    const MatchResult m =
        GreedyMatchInOrder(ious, order, flags, thresholds_.values()[t]);
    counts_[slot][t].tp += static_cast<int64_t>(m.matched.size());
    counts_[slot][t].fp += static_cast<int64_t>(m.false_positives.size());
    counts_[slot][t].fn += static_cast<int64_t>(m.false_negatives.size());
  }
  population_[slot] +=
      CountFalse(flags.gt_ignored) + CountFalse(flags.pred_out_of_range);
}

void RasterScorer::AddUnstratified(const IouTable& ious,
                                   std::span<const double> scores) {
  AddLevel(0, ious, scores, NoFlags(ious.rows(), ious.cols()));
}

void RasterScorer::Add(std::span<const CrownInstance> predictions,
                       std::span<const CrownInstance> ground_truths,
                       double gsd) {
  const auto preds = WithAreas(predictions, gsd);
  const auto gts = WithAreas(ground_truths, gsd);
  const IouTable ious = ComputeIouTable(preds, gts, options_.iou_kind);
  const std::vector<double> scores = Scores(preds);
  AddLevel(0, ious, scores, NoFlags(preds.size(), gts.size()));
  for (SizeClass c : kAllSizeClasses) {
    AddLevel(1 + static_cast<int>(c), ious, scores, Stratify(preds, gts, c));
  }
}

RasterClassScore RasterScorer::Level(int slot) const {
  RasterClassScore out;
  out.per_threshold.resize(thresholds_.size());
  if (population_[slot] == 0) return out;
  double sum = 0.0;
  for (size_t t = 0; t < thresholds_.size(); ++t) {
    const Counts& c = counts_[slot][t];
    out.per_threshold[t] = F1FromCounts(c.tp, c.fp, c.fn);
    sum += out.per_threshold[t]->f1;
  }
  out.mrf1 = sum / static_cast<double>(thresholds_.size());
  return out;
}

RasterScore RasterScorer::Score() const {
  RasterScore s;
  s.thresholds = thresholds_.values();
  s.all = Level(0);
  if (auto i = thresholds_.IndexOf(0.50)) s.rf1_50 = s.all.per_threshold[*i];
  if (auto i = thresholds_.IndexOf(0.75)) s.rf1_75 = s.all.per_threshold[*i];
  for (SizeClass c : kAllSizeClasses) {
    s.per_class[static_cast<int>(c)] = Level(1 + static_cast<int>(c));
  }
  return s;
}

std::optional<RasterF1> ComputeRf1(std::span<const CrownInstance> predictions,
                                   std::span<const CrownInstance> ground_truths,
                                   double tau,
                                   std::optional<SizeClass> size_filter,
                                   double gsd,
                                   const RasterEvalOptions& options) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ValidationError("IoU threshold must be in (0, 1]");
  }
  const auto preds = WithAreas(predictions, gsd);
  const auto gts = WithAreas(ground_truths, gsd);
  const IouTable ious = ComputeIouTable(preds, gts, options.iou_kind);
  const StratifyFlags flags = Stratify(preds, gts, size_filter);
  if (CountFalse(flags.gt_ignored) + CountFalse(flags.pred_out_of_range) ==
      0) {
    return std::nullopt;
  }
  const MatchResult m = GreedyMatch(ious, Scores(preds), flags, tau);
  return F1FromCounts(static_cast<int64_t>(m.matched.size()),
                      static_cast<int64_t>(m.false_positives.size()),
                      static_cast<int64_t>(m.false_negatives.size()));
}

RasterScore ComputeMrf1(std::span<const CrownInstance> predictions,
                        std::span<const CrownInstance> ground_truths,
                        const ThresholdSet& thresholds, double gsd,
                        const RasterEvalOptions& options) {
  RasterScorer scorer(thresholds, options);
  scorer.Add(predictions, ground_truths, gsd);
  return scorer.Score();
}

ThresholdGrid ThresholdGrid::Default() {
  ThresholdGrid grid;
  for (int k = 30; k <= 95; k += 5) grid.nms_iou.push_back(k / 100.0);
  for (int k = 5; k <= 95; k += 5) grid.confidence.push_back(k / 100.0);
  return grid;
}

void ThresholdGrid::Validate() const {
  if (nms_iou.empty() || confidence.empty()) {
    throw ValidationError("threshold grid is empty");
  }
  for (double v : nms_iou) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw ValidationError("grid nms_iou value outside (0, 1]");
    }
  }
  for (double v : confidence) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("grid confidence value outside [0, 1]");
    }
  }
}

std::string_view ObjectiveName(Objective o) {
  return o == Objective::kMrf1 ? "mrf1" : "rf1_75";
}

std::optional<Objective> ParseObjective(std::string_view name) {
  if (name == "mrf1") return Objective::kMrf1;
  if (name == "rf1_75") return Objective::kRf1At75;
  return std::nullopt;
}

RasterScore EvaluateRasters(std::span<const RasterCase> rasters,
                            const AggregationConfig& config,
                            const ThresholdSet& thresholds,
                            const RasterEvalOptions& options) {
  RasterScorer scorer(thresholds, options);
  for (const RasterCase& r : rasters) {
    const auto kept = AggregateTiles(r.tile_predictions, r.layout, config);
    scorer.Add(kept, r.ground_truths, r.gsd);
  }
  return scorer.Score();
}

OptimizationResult OptimizeThresholds(std::span<const RasterCase> rasters,
                                      const ThresholdGrid& grid,
                                      const AggregationConfig& base,
                                      Objective objective,
                                      const ThresholdSet& thresholds,
                                      const RasterEvalOptions& options) {
  grid.Validate();
  base.Validate();
  if (rasters.empty()) throw ValidationError("validation set is empty");

  struct Prepared {
    NmsCandidates candidates;
    IouTable ious;  // all candidates x ground truth
  };
  std::vector<std::unique_ptr<Prepared>> prepared(rasters.size());
  ParallelFor(rasters.size(), [&](size_t i) {
    const RasterCase& r = rasters[i];
    NmsCandidates candidates(r.tile_predictions, r.layout, base.nms_geometry,
                             base.edge_policy);
    IouTable ious =
        ComputeIouTable(candidates.instances(), r.ground_truths,
                        options.iou_kind);
    prepared[i] = std::make_unique<Prepared>(
        Prepared{std::move(candidates), std::move(ious)});
  });

  // Scored thresholds: the set itself plus 0.50 / 0.75 for the audit columns.
  std::vector<double> taus = thresholds.values();
  const size_t t50 = taus.size();
  taus.push_back(0.50);
  const size_t t75 = taus.size();
  taus.push_back(0.75);

  const size_t n_conf = grid.confidence.size();
  std::vector<GridCell> audit(grid.nms_iou.size() * n_conf);
  ParallelFor(audit.size(), [&](size_t cell) {
    const double nms = grid.nms_iou[cell / n_conf];
    const double conf = grid.confidence[cell % n_conf];
    std::vector<int64_t> tp(taus.size(), 0), fp(taus.size(), 0),
        fn(taus.size(), 0);
    for (const auto& p : prepared) {
      const std::vector<size_t> kept =
          p->candidates.Run(nms, conf, base.filter_order);
      const IouTable sub = SelectRows(p->ious, kept);
      std::vector<double> scores;
      scores.reserve(kept.size());
      for (size_t k : kept) scores.push_back(p->candidates.instances()[k].score);
      const std::vector<size_t> order = MatchOrder(scores, sub);
      const StratifyFlags flags = NoFlags(sub.rows(), sub.cols());
      for (size_t t = 0; t < taus.size(); ++t) {
        const MatchResult m = GreedyMatchInOrder(sub, order, flags, taus[t]);
        tp[t] += static_cast<int64_t>(m.matched.size());
        fp[t] += static_cast<int64_t>(m.false_positives.size());
        fn[t] += static_cast<int64_t>(m.false_negatives.size());
      }
    }
    GridCell& out = audit[cell];
    out.nms_iou = nms;
    out.confidence = conf;
    double sum = 0.0;
    for (size_t t = 0; t < thresholds.size(); ++t) {
      sum += F1FromCounts(tp[t], fp[t], fn[t]).f1;
    }
    out.mrf1 = sum / static_cast<double>(thresholds.size());
    out.rf1_50 = F1FromCounts(tp[t50], fp[t50], fn[t50]).f1;
    out.rf1_75 = F1FromCounts(tp[t75], fp[t75], fn[t75]).f1;
    out.objective = objective == Objective::kMrf1 ? out.mrf1 : out.rf1_75;
  });

  size_t best = 0;
  for (size_t i = 1; i < audit.size(); ++i) {
    const GridCell& a = audit[i];
    const GridCell& b = audit[best];
    if (a.objective != b.objective) {
      if (a.objective > b.objective) best = i;
      continue;
    }
    if (a.confidence != b.confidence) {
      if (a.confidence < b.confidence) best = i;
      continue;
    }
    if (a.nms_iou < b.nms_iou) best = i;
  }
  OptimizationResult result;
  result.best = base;
  result.best.nms_iou = audit[best].nms_iou;
  result.best.confidence_threshold = audit[best].confidence;
  result.best_cell = audit[best];
  result.audit = std::move(audit);
  return result;
}

}  // namespace crowneval
