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
#include <set>

#include "crowneval/random.h"
#include "gtest/gtest.h"
#include "testing/fixtures.h"
#include "testing/oracles.h"

namespace crowneval {
namespace {

using ::crowneval::testing::BoxCrown;
using ::crowneval::testing::DenseTable;
using ::crowneval::testing::DiscreteScore;
using ::crowneval::testing::OracleMatch;
using ::crowneval::testing::RandomCrowns;
using ::crowneval::testing::RandomDenseTable;
using ::crowneval::testing::SimulateGreedy;

std::set<size_t> AsSet(const std::vector<size_t>& v) {
  return {v.begin(), v.end()};
}

void ExpectSameAsOracle(const MatchResult& got, const OracleMatch& want,
                        const DenseTable& ious) {
  std::set<std::pair<size_t, size_t>> pairs;
  for (const MatchedPair& p : got.matched) {
    pairs.insert({p.prediction, p.ground_truth});
    EXPECT_DOUBLE_EQ(p.iou, ious[p.prediction][p.ground_truth]);
  }
  EXPECT_EQ(pairs, want.pairs);
  EXPECT_EQ(AsSet(got.false_positives), want.false_positives);
  EXPECT_EQ(AsSet(got.false_negatives), want.false_negatives);
  EXPECT_EQ(AsSet(got.ignored_predictions), want.ignored_predictions);
  EXPECT_EQ(AsSet(got.truncated_predictions), want.truncated_predictions);
}

TEST(GreedyMatchTest, IdenticalSetsFullyMatch) {
  std::vector<CrownInstance> crowns = {BoxCrown(0, 0, 4, 4), BoxCrown(10, 0, 3, 5),
                                       BoxCrown(0, 10, 6, 2)};
  for (double tau : {0.5, 0.75, 1.0}) {
    MatchConfig cfg;
    cfg.iou_threshold = tau;
    const MatchResult m = GreedyMatch(crowns, crowns, cfg);
    EXPECT_EQ(m.matched.size(), 3u);
    EXPECT_TRUE(m.false_positives.empty());
    EXPECT_TRUE(m.false_negatives.empty());
  }
}

TEST(GreedyMatchTest, NoPredictionsAllFalseNegatives) {
  std::vector<CrownInstance> gts;
  for (int i = 0; i < 5; ++i) gts.push_back(BoxCrown(10 * i, 0, 3, 3));
  const MatchResult m = GreedyMatch({}, gts, MatchConfig{});
  EXPECT_EQ(m.false_negatives.size(), 5u);
  EXPECT_TRUE(m.matched.empty());
}

TEST(GreedyMatchTest, HandTableAllScoreOrders) {
  // Prediction 0 overlaps both GT 0 and GT 1; prediction 1 only GT 0;
  // prediction 2 reaches GT 2 just above threshold and GT 1 below it.
  const DenseTable ious = {{0.80, 0.60, 0.00},
                           {0.70, 0.00, 0.00},
                           {0.00, 0.45, 0.50}};
  const IouTable table = IouTable::FromDense(ious, 3);
  const StratifyFlags flags{std::vector<bool>(3, false),
                            std::vector<bool>(3, false)};
  std::vector<double> levels = {0.9, 0.8, 0.7};
  std::sort(levels.begin(), levels.end());
  int orders = 0;
  do {
    const MatchResult m = GreedyMatch(table, levels, flags, 0.5);
    ExpectSameAsOracle(m, SimulateGreedy(ious, levels, {false, false, false},
                                         {false, false, false}, 0.5, 300),
                       ious);
    ++orders;
  } while (std::next_permutation(levels.begin(), levels.end()));
  EXPECT_EQ(orders, 6);

  // With prediction 0 first, it takes GT 0 and prediction 1 becomes FP.
  const MatchResult first = GreedyMatch(table, std::vector<double>{0.9, 0.8, 0.7},
                                        flags, 0.5);
  EXPECT_EQ(AsSet(first.false_positives), (std::set<size_t>{1}));
  EXPECT_EQ(AsSet(first.false_negatives), (std::set<size_t>{1}));
  // With prediction 1 first, prediction 0 falls back to GT 1.
  const MatchResult second = GreedyMatch(
      table, std::vector<double>{0.8, 0.9, 0.7}, flags, 0.5);
  EXPECT_EQ(second.matched.size(), 3u);
}

TEST(GreedyMatchTest, EqualScoresProcessHigherBestIouFirst) {
  const DenseTable ious = {{0.6, 0.0}, {0.9, 0.0}};
  const IouTable table = IouTable::FromDense(ious, 2);
  const StratifyFlags flags{{false, false}, {false, false}};
  const MatchResult m =
      GreedyMatch(table, std::vector<double>{1.0, 1.0}, flags, 0.5);
  ASSERT_EQ(m.matched.size(), 1u);
  EXPECT_EQ(m.matched[0].prediction, 1u);
  EXPECT_EQ(m.false_positives, (std::vector<size_t>{0}));
}

TEST(GreedyMatchTest, RandomTablesMatchOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = rng.UniformInt(0, 6), m = rng.UniformInt(0, 6);
    const DenseTable ious = RandomDenseTable(rng, n, m, 0.4);
    std::vector<double> scores(n);
    for (double& s : scores) s = DiscreteScore(rng, 3);
    std::vector<bool> gt_ignored(m), oor(n);
    const bool stratified = rng.Bernoulli(0.5);
    for (size_t g = 0; g < m; ++g) gt_ignored[g] = stratified && rng.Bernoulli(0.3);
    for (size_t p = 0; p < n; ++p) oor[p] = stratified && rng.Bernoulli(0.3);
    const double tau = rng.UniformInt(10, 19) / 20.0;
    const size_t cap = rng.Bernoulli(0.3) ? rng.UniformInt(1, 6) : 300;
    const MatchResult got = GreedyMatch(IouTable::FromDense(ious, m), scores,
                                        StratifyFlags{gt_ignored, oor}, tau, cap);
    SCOPED_TRACE(trial);
    ExpectSameAsOracle(got, SimulateGreedy(ious, scores, gt_ignored, oor, tau, cap),
                       ious);
  }
}

TEST(GreedyMatchTest, PartitionsAndOneToOne) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = rng.UniformInt(0, 12), m = rng.UniformInt(0, 12);
    const DenseTable ious = RandomDenseTable(rng, n, m, 0.6);
    std::vector<double> scores(n);
    for (double& s : scores) s = DiscreteScore(rng);
    std::vector<bool> gt_ignored(m), oor(n);
    for (size_t g = 0; g < m; ++g) gt_ignored[g] = rng.Bernoulli(0.3);
    for (size_t p = 0; p < n; ++p) oor[p] = rng.Bernoulli(0.3);
    const MatchResult r = GreedyMatch(IouTable::FromDense(ious, m), scores,
                                      StratifyFlags{gt_ignored, oor}, 0.5, 8);
    std::vector<int> pred_seen(n, 0), gt_seen(m, 0);
    for (const MatchedPair& p : r.matched) {
      ++pred_seen[p.prediction];
      ++gt_seen[p.ground_truth];
      EXPECT_GE(p.iou, 0.5);
    }
    for (size_t p : r.false_positives) ++pred_seen[p];
    for (size_t p : r.ignored_predictions) ++pred_seen[p];
    for (size_t p : r.truncated_predictions) ++pred_seen[p];
    for (size_t g : r.false_negatives) ++gt_seen[g];
    for (size_t g : r.ignored_ground_truths) ++gt_seen[g];
    for (int c : pred_seen) EXPECT_EQ(c, 1);
    for (int c : gt_seen) EXPECT_EQ(c, 1);
  }
}

TEST(GreedyMatchTest, TruePositivesNonIncreasingInThreshold) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CrownInstance> gts = RandomCrowns(rng, 8, 80, 3, 10);
    std::vector<CrownInstance> preds = RandomCrowns(rng, 8, 80, 3, 10);
    for (auto& p : preds) p.score = DiscreteScore(rng);
    size_t prev = SIZE_MAX;
    for (int k = 5; k <= 100; k += 5) {
      MatchConfig cfg;
      cfg.iou_threshold = k / 100.0;
      const size_t tp = GreedyMatch(preds, gts, cfg).matched.size();
      EXPECT_LE(tp, prev);
      prev = tp;
    }
  }
}

TEST(GreedyMatchTest, InvariantUnderMonotoneScoreRescaling) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const DenseTable ious = RandomDenseTable(rng, 7, 7, 0.5);
    std::vector<double> scores(7), rescaled(7);
    for (size_t i = 0; i < 7; ++i) {
      scores[i] = DiscreteScore(rng, 4);
      rescaled[i] = 0.1 + 0.5 * scores[i] * scores[i];
    }
    const IouTable t = IouTable::FromDense(ious, 7);
    const StratifyFlags flags{std::vector<bool>(7, false),
                              std::vector<bool>(7, false)};
    EXPECT_EQ(GreedyMatch(t, scores, flags, 0.5),
              GreedyMatch(t, rescaled, flags, 0.5));
  }
}

TEST(StratifyTest, AllInClassIsIdentity) {
  std::vector<CrownInstance> crowns = {BoxCrown(0, 0, 2, 2), BoxCrown(5, 5, 2, 2)};
  DeriveAreas(crowns, 1.0);
  const StratifyFlags f = Stratify(crowns, crowns, SizeClass::kTiny);
  EXPECT_EQ(f.gt_ignored, (std::vector<bool>{false, false}));
  EXPECT_EQ(f.pred_out_of_range, (std::vector<bool>{false, false}));
}

TEST(StratifyTest, GiantTruthTinyPrediction) {
  // gsd 1: a 12x12 crown is Giant (144 m^2), a 2x2 one is Tiny.
  std::vector<CrownInstance> gts = {BoxCrown(0, 0, 12, 12)};
  std::vector<CrownInstance> preds = {BoxCrown(0, 0, 2, 2, 0.9)};
  DeriveAreas(gts, 1.0);
  DeriveAreas(preds, 1.0);
  MatchConfig cfg;
  cfg.size_filter = SizeClass::kTiny;
  // IoU 4/144 is below 0.5: the ignored GT cannot absorb it, so it is FP.
  MatchResult m = GreedyMatch(preds, gts, cfg);
  EXPECT_EQ(m.ignored_ground_truths, (std::vector<size_t>{0}));
  EXPECT_EQ(m.false_positives, (std::vector<size_t>{0}));
  // At a low threshold the ignored GT absorbs the prediction.
  cfg.iou_threshold = 0.02;
  m = GreedyMatch(preds, gts, cfg);
  EXPECT_TRUE(m.false_positives.empty());
  EXPECT_EQ(m.ignored_predictions, (std::vector<size_t>{0}));
}

TEST(StratifyTest, EmptyClassGivesEmptyResult) {
  std::vector<CrownInstance> crowns = {BoxCrown(0, 0, 2, 2)};
  DeriveAreas(crowns, 1.0);
  MatchConfig cfg;
  cfg.size_filter = SizeClass::kGiant;
  const MatchResult m = GreedyMatch(crowns, crowns, cfg);
  EXPECT_TRUE(m.matched.empty());
  EXPECT_TRUE(m.false_positives.empty());
  EXPECT_TRUE(m.false_negatives.empty());
}

TEST(MatchConfigTest, Validate) {
  MatchConfig cfg;
  cfg.iou_threshold = 0.0;
  EXPECT_THROW(cfg.Validate(), std::exception);
  cfg.iou_threshold = 0.5;
  cfg.max_detections = 0;
  EXPECT_THROW(cfg.Validate(), std::exception);
}

TEST(MatchConfigTest, DetectionCapTruncatesLowestScores) {
  std::vector<CrownInstance> preds;
  for (int i = 0; i < 5; ++i) preds.push_back(BoxCrown(10 * i, 0, 3, 3, 0.1 * (i + 1)));
  MatchConfig cfg;
  cfg.max_detections = 3;
  const MatchResult m = GreedyMatch(preds, preds, cfg);
  EXPECT_EQ(m.truncated_predictions, (std::vector<size_t>{0, 1}));
  EXPECT_EQ(m.false_negatives, (std::vector<size_t>{0, 1}));
  EXPECT_EQ(m.matched.size(), 3u);
}

}  // namespace
}  // namespace crowneval
