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
#include "crowneval/matching.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "crowneval/errors.h"

namespace crowneval {

void MatchConfig::Validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ValidationError("IoU threshold must be in (0, 1], got " +
                          std::to_string(iou_threshold));
  }
  if (max_detections < 1) {
    throw ValidationError("max_detections must be at least 1");
  }
}

StratifyFlags Stratify(std::span<const CrownInstance> predictions,
                       std::span<const CrownInstance> ground_truths,
                       std::optional<SizeClass> size_class) {
  StratifyFlags flags;
  flags.gt_ignored.assign(ground_truths.size(), false);
  flags.pred_out_of_range.assign(predictions.size(), false);
  if (!size_class) return flags;
  for (size_t g = 0; g < ground_truths.size(); ++g) {
    flags.gt_ignored[g] = CrownSizeClass(ground_truths[g]) != *size_class;
  }
  for (size_t p = 0; p < predictions.size(); ++p) {
    flags.pred_out_of_range[p] = CrownSizeClass(predictions[p]) != *size_class;
  }
  return flags;
}

std::vector<size_t> MatchOrder(std::span<const double> scores,
                               const IouTable& ious) {
  std::vector<double> best(scores.size(), 0.0);
  for (size_t p = 0; p < scores.size() && p < ious.rows(); ++p) {
    best[p] = ious.RowMax(p);
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return best[a] > best[b];
  });
  return order;
}

MatchResult GreedyMatchInOrder(const IouTable& ious,
                               std::span<const size_t> order,
                               const StratifyFlags& flags, double tau) {
  const size_t num_preds = ious.rows();
  const size_t num_gts = ious.cols();
  if (flags.gt_ignored.size() != num_gts ||
      flags.pred_out_of_range.size() != num_preds) {
    throw ValidationError("stratification flags do not match the IoU table");
  }
  MatchResult result;
  std::vector<bool> gt_taken(num_gts, false);
  std::vector<bool> visited(num_preds, false);

  for (size_t p : order) {
    visited[p] = true;
    int64_t best = -1;
    double best_iou = -1.0;
    int64_t best_ignored = -1;
    double best_ignored_iou = -1.0;
    for (const IouEntry& e : ious.Row(p)) {
      if (e.iou < tau || gt_taken[e.column]) continue;
      if (flags.gt_ignored[e.column]) {
        if (e.iou > best_ignored_iou) {
          best_ignored = e.column;
          best_ignored_iou = e.iou;
        }
      } else if (e.iou > best_iou) {
        best = e.column;
        best_iou = e.iou;
      }
    }
    if (best >= 0) {
      gt_taken[best] = true;
      result.matched.push_back({p, static_cast<size_t>(best), best_iou});
    } else if (best_ignored >= 0) {
      gt_taken[best_ignored] = true;
      result.ignored_predictions.push_back(p);
    } else if (flags.pred_out_of_range[p]) {
      result.ignored_predictions.push_back(p);
    } else {
      result.false_positives.push_back(p);
    }
  }
  for (size_t p = 0; p < num_preds; ++p) {
    if (!visited[p]) result.truncated_predictions.push_back(p);
  }
  for (size_t g = 0; g < num_gts; ++g) {
    if (flags.gt_ignored[g]) {
      result.ignored_ground_truths.push_back(g);
    } else if (!gt_taken[g]) {
      result.false_negatives.push_back(g);
    }
  }
  std::sort(result.false_positives.begin(), result.false_positives.end());
  std::sort(result.ignored_predictions.begin(),
            result.ignored_predictions.end());
  return result;
}

MatchResult GreedyMatch(const IouTable& ious, std::span<const double> scores,
                        const StratifyFlags& flags, double tau,
                        size_t max_detections) {
  if (scores.size() != ious.rows()) {
    throw ValidationError("score count does not match the IoU table");
  }
  std::vector<size_t> order = MatchOrder(scores, ious);
  if (order.size() > max_detections) order.resize(max_detections);
  return GreedyMatchInOrder(ious, order, flags, tau);
}

MatchResult GreedyMatch(std::span<const CrownInstance> predictions,
                        std::span<const CrownInstance> ground_truths,
                        const MatchConfig& config) {
  config.Validate();
  const IouTable ious =
      ComputeIouTable(predictions, ground_truths, config.iou_kind);
  const StratifyFlags flags =
      Stratify(predictions, ground_truths, config.size_filter);
  const std::vector<double> scores = Scores(predictions);
  return GreedyMatch(ious, scores, flags, config.iou_threshold,
                     config.max_detections);
}

std::vector<double> Scores(std::span<const CrownInstance> instances) {
  std::vector<double> out;
  out.reserve(instances.size());
  for (const CrownInstance& c : instances) out.push_back(c.score);
  return out;
}

}  // namespace crowneval
