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
#ifndef CROWNEVAL_TILE_METRICS_H_
#define CROWNEVAL_TILE_METRICS_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowneval/crown.h"
#include "crowneval/iou_table.h"
#include "crowneval/matching.h"
#include "crowneval/thresholds.h"

namespace crowneval {

// Predictions and ground truth of one tile, in tile-local pixels. Areas are
// derived from `gsd` when missing.
struct TileCase {
  std::string id;
  double gsd = 0.0;
  std::vector<CrownInstance> predictions;
  std::vector<CrownInstance> ground_truths;
};

struct TileEvalOptions {
  IouKind iou_kind = IouKind::kMask;
  size_t max_detections = kDefaultMaxDetections;  // per tile
};

inline constexpr int kRecallLevels = 101;

// Pooled precision/recall over all tiles at one IoU threshold. Detections are
// ordered by descending score, then tile id, then per-tile match order.
struct PrCurve {
  std::vector<double> scores;
  std::vector<double> precision;  // raw, before the envelope
  std::vector<double> recall;
  std::array<double, kRecallLevels> interpolated{};
  size_t num_ground_truths = 0;
};

// Recall level k of the 101-point grid, computed as k * 0.01 with the last
// level pinned to 1.0.
double RecallLevel(int k);

struct ClassTileMetrics {
  std::optional<double> map;
  std::optional<double> mar;
};

struct TileMetrics {
  std::vector<double> thresholds;
  std::vector<std::optional<double>> ap;  // per threshold
  std::vector<std::optional<double>> ar;
  std::optional<double> map;
  std::optional<double> ap50;
  std::optional<double> ap75;
  std::optional<double> mar;
  std::optional<double> ar50;
  std::optional<double> ar75;
  std::array<ClassTileMetrics, 5> per_class;
  size_t max_detections = kDefaultMaxDetections;
};

// Matches every tile once per (threshold, class) query, reusing the per-tile
// IoU tables.
class TileEvaluator {
 public:
  TileEvaluator(std::span<const TileCase> tiles, TileEvalOptions options);

  PrCurve Curve(double tau, std::optional<SizeClass> size_filter) const;

  // 101-point interpolated AP. Unfiltered: 0 when there is no ground truth
  // but detections exist, absent when neither exists. Size-filtered: absent
  // whenever the class has no ground truth.
  std::optional<double> AveragePrecision(
      double tau, std::optional<SizeClass> size_filter) const;

  // Matched fraction of (non-ignored) ground truth; absent with no ground
  // truth.
  std::optional<double> Recall(double tau,
                               std::optional<SizeClass> size_filter) const;

  std::optional<double> MeanRecall(const ThresholdSet& thresholds,
                                   std::optional<SizeClass> size_filter) const;

  TileMetrics Summary(const ThresholdSet& thresholds) const;

  // Per-tile match results at one threshold, in tile input order.
  std::vector<MatchResult> Matches(double tau,
                                   std::optional<SizeClass> size_filter) const;

 private:
  struct Prepared {
    std::string id;
    IouTable ious;
    std::vector<double> scores;
    std::vector<size_t> order;  // truncated to max_detections
    std::vector<CrownInstance> predictions;
    std::vector<CrownInstance> ground_truths;
  };

  struct Pooled {
    std::vector<double> scores;
    std::vector<bool> is_tp;
    size_t num_ground_truths = 0;
  };

  Pooled Pool(double tau, std::optional<SizeClass> size_filter) const;

  std::vector<Prepared> tiles_;
  std::vector<size_t> id_order_;  // tile indices sorted by id
  TileEvalOptions options_;
};

std::optional<double> AveragePrecision(std::span<const TileCase> tiles,
                                       double tau,
                                       std::optional<SizeClass> size_filter,
                                       const TileEvalOptions& options = {});

std::optional<double> AverageRecall(std::span<const TileCase> tiles,
                                    const ThresholdSet& thresholds,
                                    std::optional<SizeClass> size_filter,
                                    const TileEvalOptions& options = {});

TileMetrics CocoSummary(std::span<const TileCase> tiles,
                        const ThresholdSet& thresholds,
                        const TileEvalOptions& options = {});

}  // namespace crowneval

#endif  // CROWNEVAL_TILE_METRICS_H_
