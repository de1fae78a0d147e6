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
#ifndef CROWNEVAL_RASTER_METRICS_H_
#define CROWNEVAL_RASTER_METRICS_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowneval/crown.h"
#include "crowneval/iou_table.h"
#include "crowneval/matching.h"
#include "crowneval/thresholds.h"

namespace crowneval {

enum class NmsGeometry { kMask, kBox };
enum class FilterOrder { kConfidenceFirst, kNmsFirst };

// How instances cut by an interior tile edge take part in NMS.
//   kNone: plain score-ordered NMS.
//   kDemoteTruncated: complete instances are visited before truncated ones,
//     and a truncated instance is also suppressed when the fraction of its
//     own area covered by a kept instance reaches nms_iou. Partial views of a
//     crown seen whole in an overlapping tile are removed this way.
enum class EdgePolicy { kNone, kDemoteTruncated };

std::string_view NmsGeometryName(NmsGeometry g);
std::optional<NmsGeometry> ParseNmsGeometry(std::string_view name);
std::string_view FilterOrderName(FilterOrder o);
std::optional<FilterOrder> ParseFilterOrder(std::string_view name);
std::string_view EdgePolicyName(EdgePolicy p);
std::optional<EdgePolicy> ParseEdgePolicy(std::string_view name);

struct AggregationConfig {
  double nms_iou = 0.5;
  double confidence_threshold = 0.0;  // instances need score >= threshold
  NmsGeometry nms_geometry = NmsGeometry::kMask;
  FilterOrder filter_order = FilterOrder::kConfidenceFirst;
  EdgePolicy edge_policy = EdgePolicy::kDemoteTruncated;

  void Validate() const;
};

// Where each tile sits in the raster.
struct TileLayout {
  PixelRect raster_extent;
  std::map<std::string, PixelRect> windows;

  // A single tile covering the whole raster, id "raster".
  static TileLayout Identity(const PixelRect& extent);
};

using TilePredictions = std::map<std::string, std::vector<CrownInstance>>;

// Raster-frame candidates in NMS visiting order with their pairwise overlaps,
// reusable across threshold settings.
class NmsCandidates {
 public:
  // Throws ValidationError when a tile id is missing from the layout.
  NmsCandidates(const TilePredictions& tile_predictions,
                const TileLayout& layout, NmsGeometry geometry,
                EdgePolicy policy);

  // Indices (into instances()) kept by NMS, in visiting order.
  std::vector<size_t> Run(double nms_iou, double confidence,
                          FilterOrder order) const;

  const std::vector<CrownInstance>& instances() const { return instances_; }

 private:
  struct Overlap {
    uint32_t earlier = 0;  // index of a higher-priority candidate
    double iou = 0.0;
    double coverage = 0.0;  // |this & earlier| / |this|
  };

  std::vector<CrownInstance> instances_;
  std::vector<std::vector<Overlap>> overlaps_;
  EdgePolicy policy_;
};

// Translates tile predictions into the raster frame, applies the confidence
// filter and suppresses, in visiting order, every instance whose IoU with an
// already kept one is >= nms_iou. Kept instances keep their own score; their
// `truncated` flag records whether they touch an interior tile edge.
std::vector<CrownInstance> AggregateTiles(const TilePredictions& tile_predictions,
                                          const TileLayout& layout,
                                          const AggregationConfig& config);

struct RasterF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
};

// F1 = 2 TP / (2 TP + FP + FN), i.e. 2 TP / (|predictions| + |ground truth|);
// all three scores are 0 when TP = 0.
RasterF1 F1FromCounts(int64_t tp, int64_t fp, int64_t fn);

struct RasterClassScore {
  std::vector<std::optional<RasterF1>> per_threshold;
  std::optional<double> mrf1;
};

struct RasterScore {
  std::vector<double> thresholds;
  RasterClassScore all;
  std::optional<RasterF1> rf1_50;
  std::optional<RasterF1> rf1_75;
  std::array<RasterClassScore, 5> per_class;
};

struct RasterEvalOptions {
  IouKind iou_kind = IouKind::kMask;
};

// Accumulates match counts over one or more rasters (each matched on its
// own) and reports pooled RF1 per threshold and class. A class with neither
// ground truth nor in-range predictions is absent.
class RasterScorer {
 public:
  RasterScorer(ThresholdSet thresholds, RasterEvalOptions options = {});

  // Instances need derived areas; they are derived from `gsd` when missing.
  void Add(std::span<const CrownInstance> predictions,
           std::span<const CrownInstance> ground_truths, double gsd);

  // Adds precomputed IoUs (rows = predictions) for the unstratified level
  // only.
  void AddUnstratified(const IouTable& ious, std::span<const double> scores);

  RasterScore Score() const;

 private:
  struct Counts {
    int64_t tp = 0;
    int64_t fp = 0;
    int64_t fn = 0;
  };
  // Slot 0 is all sizes, slots 1..5 the size classes.
  static constexpr int kSlots = 6;

  void AddLevel(int slot, const IouTable& ious, std::span<const double> scores,
                const StratifyFlags& flags);
  RasterClassScore Level(int slot) const;

  ThresholdSet thresholds_;
  RasterEvalOptions options_;
  std::array<std::vector<Counts>, kSlots> counts_;
  std::array<int64_t, kSlots> population_{};
};

// RF1 at one threshold; absent when neither side has an instance in scope.
std::optional<RasterF1> ComputeRf1(std::span<const CrownInstance> predictions,
                                   std::span<const CrownInstance> ground_truths,
                                   double tau,
                                   std::optional<SizeClass> size_filter,
                                   double gsd,
                                   const RasterEvalOptions& options = {});

// mRF1 = mean of RF1 over the threshold set, with per-class breakdown.
RasterScore ComputeMrf1(std::span<const CrownInstance> predictions,
                        std::span<const CrownInstance> ground_truths,
                        const ThresholdSet& thresholds, double gsd,
                        const RasterEvalOptions& options = {});

// One raster of a validation or test set.
struct RasterCase {
  std::string name;
  double gsd = 0.0;
  TileLayout layout;
  TilePredictions tile_predictions;
  std::vector<CrownInstance> ground_truths;
};

struct ThresholdGrid {
  std::vector<double> nms_iou;
  std::vector<double> confidence;

  // nms_iou in {0.30, 0.35, ..., 0.95}, confidence in {0.05, 0.10, ..., 0.95}.
  static ThresholdGrid Default();
  void Validate() const;
};

enum class Objective { kMrf1, kRf1At75 };

std::string_view ObjectiveName(Objective o);
std::optional<Objective> ParseObjective(std::string_view name);

struct GridCell {
  double nms_iou = 0.0;
  double confidence = 0.0;
  double mrf1 = 0.0;
  double rf1_50 = 0.0;
  double rf1_75 = 0.0;
  double objective = 0.0;
};

struct OptimizationResult {
  AggregationConfig best;
  GridCell best_cell;
  std::vector<GridCell> audit;  // nms-major, confidence-minor grid order
};

// Exhaustive grid search. Counts are pooled over all rasters; absent scores
// count as 0. Ties go to the lower confidence, then the lower nms_iou.
OptimizationResult OptimizeThresholds(std::span<const RasterCase> rasters,
                                      const ThresholdGrid& grid,
                                      const AggregationConfig& base,
                                      Objective objective,
                                      const ThresholdSet& thresholds,
                                      const RasterEvalOptions& options = {});

// Aggregates and scores every raster with one configuration.
RasterScore EvaluateRasters(std::span<const RasterCase> rasters,
                            const AggregationConfig& config,
                            const ThresholdSet& thresholds,
                            const RasterEvalOptions& options = {});

}  // namespace crowneval

#endif  // CROWNEVAL_RASTER_METRICS_H_
