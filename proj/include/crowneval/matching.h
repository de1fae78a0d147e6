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
#ifndef CROWNEVAL_MATCHING_H_
#define CROWNEVAL_MATCHING_H_

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "crowneval/crown.h"
#include "crowneval/iou_table.h"

namespace crowneval {

inline constexpr size_t kDefaultMaxDetections = 300;
inline constexpr size_t kUnlimitedDetections =
    std::numeric_limits<size_t>::max();

struct MatchConfig {
  double iou_threshold = 0.5;
  IouKind iou_kind = IouKind::kMask;
  std::optional<SizeClass> size_filter;
  size_t max_detections = kDefaultMaxDetections;

  // Throws ValidationError unless the threshold is in (0, 1] and
  // max_detections >= 1.
  void Validate() const;
};

struct MatchedPair {
  size_t prediction = 0;
  size_t ground_truth = 0;
  double iou = 0.0;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

// Indices refer to the input prediction / ground-truth lists. Predictions are
// partitioned by matched, false_positives, ignored_predictions and
// truncated_predictions (beyond max_detections); ground truths by matched,
// false_negatives and ignored_ground_truths. All id lists are ascending;
// `matched` is in processing order.
struct MatchResult {
  std::vector<MatchedPair> matched;
  std::vector<size_t> false_positives;
  std::vector<size_t> false_negatives;
  std::vector<size_t> ignored_predictions;
  std::vector<size_t> ignored_ground_truths;
  std::vector<size_t> truncated_predictions;

  size_t TruePositives() const { return matched.size(); }

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

// Ignore flags for size-stratified evaluation. With no class, nothing is
// ignored.
struct StratifyFlags {
  std::vector<bool> gt_ignored;
  // Predictions whose own area is outside the class; they are dropped rather
  // than counted as false positives when left unmatched.
  std::vector<bool> pred_out_of_range;
};

// Ground truths outside the class are ignored; predictions outside it are
// flagged out-of-range. Requires derived areas when `size_class` is set.
StratifyFlags Stratify(std::span<const CrownInstance> predictions,
                       std::span<const CrownInstance> ground_truths,
                       std::optional<SizeClass> size_class);

// Processing order: descending score, then descending best IoU against any
// ground truth, then input order.
std::vector<size_t> MatchOrder(std::span<const double> scores,
                               const IouTable& ious);

// Greedy one-to-one matching of the predictions listed in `order` (already
// truncated to the detection cap); predictions absent from `order` are
// reported as truncated. Each prediction takes the highest-IoU unmatched,
// non-ignored ground truth with IoU >= tau; failing that, the highest-IoU
// unmatched ignored one (and becomes ignored itself); failing that, it is a
// false positive unless flagged out-of-range. IoU ties go to the lower
// ground-truth index.
MatchResult GreedyMatchInOrder(const IouTable& ious,
                               std::span<const size_t> order,
                               const StratifyFlags& flags, double tau);

MatchResult GreedyMatch(const IouTable& ious, std::span<const double> scores,
                        const StratifyFlags& flags, double tau,
                        size_t max_detections = kUnlimitedDetections);

// Convenience wrapper that builds the IoU table and stratification flags.
MatchResult GreedyMatch(std::span<const CrownInstance> predictions,
                        std::span<const CrownInstance> ground_truths,
                        const MatchConfig& config);

std::vector<double> Scores(std::span<const CrownInstance> instances);

}  // namespace crowneval

#endif  // CROWNEVAL_MATCHING_H_
