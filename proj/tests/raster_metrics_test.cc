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
#include <tuple>

#include "crowneval/errors.h"
#include "crowneval/random.h"
#include "gtest/gtest.h"
#include "testing/fixtures.h"
#include "testing/oracles.h"

namespace crowneval {
namespace {

using ::crowneval::testing::BoxCrown;
using ::crowneval::testing::BruteForceNms;
using ::crowneval::testing::MultiTileFixture;
using ::crowneval::testing::PerturbedCopies;
using ::crowneval::testing::RandomCrowns;
using ::crowneval::testing::RandomMultiTile;

void ExpectSameInstances(const std::vector<CrownInstance>& got,
                         const std::vector<CrownInstance>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].score, want[i].score) << i;
    EXPECT_EQ(got[i].truncated, want[i].truncated) << i;
    EXPECT_EQ(InstanceMask(got[i]).Trimmed(), InstanceMask(want[i]).Trimmed()) << i;
  }
}

// Order-free comparison: (score, trimmed mask) multisets.
using InstanceKey = std::tuple<double, int64_t, int64_t, std::vector<uint8_t>>;

std::vector<InstanceKey> Keys(const std::vector<CrownInstance>& v) {
  std::vector<InstanceKey> keys;
  for (const CrownInstance& c : v) {
    const BinaryMask m = InstanceMask(c).Trimmed();
    keys.emplace_back(c.score, m.x0(), m.y0(), m.bits());
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

AggregationConfig RandomConfig(Rng& rng) {
  AggregationConfig cfg;
  cfg.nms_iou = rng.UniformInt(6, 20) / 20.0;
  cfg.confidence_threshold = rng.Bernoulli(0.5) ? 0.0 : rng.UniformInt(1, 9) / 10.0;
  cfg.nms_geometry = rng.Bernoulli(0.5) ? NmsGeometry::kMask : NmsGeometry::kBox;
  cfg.filter_order =
      rng.Bernoulli(0.5) ? FilterOrder::kConfidenceFirst : FilterOrder::kNmsFirst;
  cfg.edge_policy =
      rng.Bernoulli(0.5) ? EdgePolicy::kDemoteTruncated : EdgePolicy::kNone;
  return cfg;
}

TEST(AggregateTilesTest, SingleTileIsTranslatedIdentity) {
  TileLayout layout;
  layout.raster_extent = PixelRect{0, 0, 100, 100};
  layout.windows["a"] = PixelRect{0, 0, 100, 100};
  TilePredictions preds;
  preds["a"] = {BoxCrown(0, 0, 5, 5, 0.9), BoxCrown(20, 20, 5, 5, 0.5)};
  const auto out = AggregateTiles(preds, layout, {});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(*out[0].mask, *preds["a"][0].mask);
  EXPECT_FALSE(out[0].truncated);
}

TEST(AggregateTilesTest, DuplicateAcrossTilesKeepsHigherScore) {
  TileLayout layout;
  layout.raster_extent = PixelRect{0, 0, 40, 20};
  layout.windows["left"] = PixelRect{0, 0, 20, 20};
  layout.windows["right"] = PixelRect{10, 0, 20, 20};
  layout.windows["far"] = PixelRect{20, 0, 20, 20};
  TilePredictions preds;
  preds["left"] = {BoxCrown(12, 5, 4, 4, 0.8)};
  preds["right"] = {BoxCrown(2, 5, 4, 4, 0.9)};
  const auto out = AggregateTiles(preds, layout, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].score, 0.9);
  EXPECT_EQ(out[0].mask->frame(), (PixelRect{12, 5, 4, 4}));
}

TEST(AggregateTilesTest, UnknownTileIsError) {
  TilePredictions preds;
  preds["missing"] = {BoxCrown(0, 0, 2, 2, 0.5)};
  EXPECT_THROW(AggregateTiles(preds, TileLayout::Identity({0, 0, 10, 10}), {}),
               ValidationError);
}

TEST(AggregateTilesTest, TruncatedSliverRemovedByCoverage) {
  // The crown lies whole in "right"; "left" sees only a 2-px-wide sliver at
  // its interior edge. The sliver's IoU with the whole crown is low, but its
  // coverage by it is 1.
  TileLayout layout;
  layout.raster_extent = PixelRect{0, 0, 40, 20};
  layout.windows["left"] = PixelRect{0, 0, 20, 20};
  layout.windows["right"] = PixelRect{10, 0, 20, 20};
  TilePredictions preds;
  preds["left"] = {BoxCrown(18, 5, 2, 8, 0.95)};
  preds["right"] = {BoxCrown(8, 5, 8, 8, 0.6)};
  AggregationConfig cfg;
  const auto demoted = AggregateTiles(preds, layout, cfg);
  ASSERT_EQ(demoted.size(), 1u);
  EXPECT_EQ(demoted[0].score, 0.6);
  cfg.edge_policy = EdgePolicy::kNone;
  EXPECT_EQ(AggregateTiles(preds, layout, cfg).size(), 2u);
}

TEST(AggregateTilesTest, MatchesBruteForceOnRandomFixtures) {
  Rng rng(505);
  for (int trial = 0; trial < 200; ++trial) {
    const MultiTileFixture f = RandomMultiTile(rng, 120, 60, 15, 25, 2);
    const AggregationConfig cfg = RandomConfig(rng);
    SCOPED_TRACE(trial);
    const auto got = AggregateTiles(f.predictions, f.layout, cfg);
    {
      SCOPED_TRACE("versus brute force");
      ExpectSameInstances(got, BruteForceNms(f.predictions, f.layout, cfg));
    }
    const auto again =
        AggregateTiles({{"raster", got}}, TileLayout::Identity(f.layout.raster_extent), cfg);
    // The identity layout has no interior edges, so the visiting order may
    // change; the kept set may not.
    EXPECT_EQ(Keys(again), Keys(got));
    size_t total = 0;
    for (const auto& [id, p] : f.predictions) total += p.size();
    EXPECT_LE(got.size(), total);
  }
}

TEST(AggregateTilesTest, ThresholdOneKeepsAllButExactDuplicates) {
  TilePredictions preds;
  preds["raster"] = {BoxCrown(0, 0, 5, 5, 0.9), BoxCrown(1, 0, 5, 5, 0.8),
                     BoxCrown(0, 0, 5, 5, 0.7), BoxCrown(9, 9, 2, 2, 0.1)};
  AggregationConfig cfg;
  cfg.nms_iou = 1.0;
  cfg.confidence_threshold = 0.2;
  const auto out = AggregateTiles(preds, TileLayout::Identity({0, 0, 20, 20}), cfg);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].score, 0.9);
  EXPECT_EQ(out[1].score, 0.8);
}

TEST(RasterF1Test, CountsExample) {
  const RasterF1 r = F1FromCounts(2, 2, 2);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.f1, 0.5);
  const RasterF1 z = F1FromCounts(0, 3, 1);
  EXPECT_EQ(z.f1, 0.0);
  EXPECT_EQ(z.precision, 0.0);
}

TEST(RasterF1Test, PerfectAndAbsent) {
  Rng rng(2);
  const auto crowns = RandomCrowns(rng, 10, 100, 2, 8);
  for (double tau : {0.5, 0.95, 1.0}) {
    const auto r = ComputeRf1(crowns, crowns, tau, std::nullopt, 0.1);
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->f1, 1.0);
  }
  EXPECT_FALSE(ComputeRf1({}, {}, 0.5, std::nullopt, 0.1).has_value());
  const RasterScore s = ComputeMrf1(crowns, crowns, ThresholdSet::Coco(), 0.1);
  EXPECT_EQ(s.all.mrf1, 1.0);
  EXPECT_EQ(s.rf1_50->f1, 1.0);
  EXPECT_EQ(s.rf1_75->f1, 1.0);
}

TEST(RasterF1Test, IdentityAndMeanOnRandomFixtures) {
  Rng rng(31);
  const ThresholdSet t = ThresholdSet::Coco();
  for (int trial = 0; trial < 50; ++trial) {
    const auto gts = RandomCrowns(rng, static_cast<int>(rng.UniformInt(1, 15)), 150, 2, 12);
    const auto preds = PerturbedCopies(rng, gts, 0.8, 3, 3, 150);
    const RasterScore s = ComputeMrf1(preds, gts, t, 0.3);
    double sum = 0.0, prev = 2.0;
    for (size_t i = 0; i < t.size(); ++i) {
      const auto direct = ComputeRf1(preds, gts, t.values()[i], std::nullopt, 0.3);
      ASSERT_TRUE(direct.has_value());
      EXPECT_EQ(direct->f1, s.all.per_threshold[i]->f1);
      const int64_t tp = direct->tp;
      EXPECT_EQ(direct->f1, tp == 0 ? 0.0
                                    : 2.0 * tp / static_cast<double>(preds.size() + gts.size()));
      EXPECT_LE(direct->f1, prev);
      prev = direct->f1;
      sum += direct->f1;
    }
    EXPECT_NEAR(*s.all.mrf1, sum / 10.0, 1e-12);
  }
}

TEST(RasterF1Test, MatchSurvivingHalfTheThresholds) {
  // 20x20 crowns shifted by 3 px: IoU 17/23 ~ 0.739, matched for tau <= 0.70.
  std::vector<CrownInstance> gts, preds;
  for (int i = 0; i < 4; ++i) {
    gts.push_back(BoxCrown(40 * i, 0, 20, 20));
    preds.push_back(BoxCrown(40 * i + 3, 0, 20, 20, 0.9));
  }
  const RasterScore s = ComputeMrf1(preds, gts, ThresholdSet::Coco(), 0.1);
  EXPECT_DOUBLE_EQ(*s.all.mrf1, 0.5);
  EXPECT_EQ(s.rf1_50->f1, 1.0);
  EXPECT_EQ(s.rf1_75->f1, 0.0);
}

TEST(RasterScorerTest, ClassesAbsentWithoutInstances) {
  // gsd 1: 4x4 crowns are Small (16 m^2).
  std::vector<CrownInstance> crowns = {BoxCrown(0, 0, 4, 4)};
  const RasterScore s = ComputeMrf1(crowns, crowns, ThresholdSet::Coco(), 1.0);
  EXPECT_EQ(s.per_class[1].mrf1, 1.0);
  for (int c : {0, 2, 3, 4}) EXPECT_FALSE(s.per_class[c].mrf1.has_value());
}

TEST(RasterScorerTest, PoolsCountsAcrossRasters) {
  RasterScorer scorer(ThresholdSet({0.5}));
  std::vector<CrownInstance> g1 = {BoxCrown(0, 0, 4, 4)};
  std::vector<CrownInstance> p1 = {BoxCrown(0, 0, 4, 4, 0.9)};
  std::vector<CrownInstance> g2 = {BoxCrown(0, 0, 4, 4), BoxCrown(10, 0, 4, 4)};
  scorer.Add(p1, g1, 1.0);
  scorer.Add({}, g2, 1.0);
  const RasterScore s = scorer.Score();
  EXPECT_EQ(s.all.per_threshold[0]->tp, 1);
  EXPECT_EQ(s.all.per_threshold[0]->fn, 2);
  EXPECT_DOUBLE_EQ(s.all.per_threshold[0]->f1, 2.0 / 4.0);
}

std::vector<RasterCase> PlantedDuplicateRasters() {
  // Each crown is predicted whole in two overlapping tiles: once exactly
  // (0.9), once shifted by (3, 2) px (0.8), IoU 306/494 ~ 0.619 to the
  // crown. The shifted copy survives NMS unless nms_iou <= 0.60.
  std::vector<RasterCase> rasters;
  for (int r = 0; r < 2; ++r) {
    RasterCase rc;
    rc.name = "val" + std::to_string(r);
    rc.gsd = 0.1;
    rc.layout.raster_extent = PixelRect{0, 0, 200, 100};
    rc.layout.windows["a"] = PixelRect{0, 0, 150, 100};
    rc.layout.windows["b"] = PixelRect{50, 0, 150, 100};
    const int64_t y = 20 + 30 * r;
    for (int i = 0; i < 3; ++i) {
      const int64_t x = 60 + 25 * i;
      rc.ground_truths.push_back(BoxCrown(x, y, 20, 20));
      rc.tile_predictions["a"].push_back(BoxCrown(x, y, 20, 20, 0.9));
      rc.tile_predictions["b"].push_back(BoxCrown(x - 50 + 3, y + 2, 20, 20, 0.8));
    }
    rasters.push_back(std::move(rc));
  }
  return rasters;
}

TEST(OptimizeThresholdsTest, PlantedDuplicatesNeedLowNms) {
  const auto rasters = PlantedDuplicateRasters();
  const ThresholdSet t = ThresholdSet::Coco();
  AggregationConfig base;
  const ThresholdGrid grid = ThresholdGrid::Default();
  const OptimizationResult r =
      OptimizeThresholds(rasters, grid, base, Objective::kMrf1, t);
  EXPECT_LE(r.best.nms_iou, 0.60);
  EXPECT_EQ(r.best.confidence_threshold, 0.05);
  EXPECT_EQ(r.best.nms_iou, 0.30);
  EXPECT_DOUBLE_EQ(r.best_cell.objective, 1.0);
  ASSERT_EQ(r.audit.size(), grid.nms_iou.size() * grid.confidence.size());
  for (const GridCell& cell : r.audit) {
    AggregationConfig cfg = base;
    cfg.nms_iou = cell.nms_iou;
    cfg.confidence_threshold = cell.confidence;
    const RasterScore direct = EvaluateRasters(rasters, cfg, t);
    EXPECT_NEAR(cell.mrf1, direct.all.mrf1.value_or(0.0), 1e-12)
        << cell.nms_iou << " " << cell.confidence;
    EXPECT_NEAR(cell.rf1_75, direct.rf1_75 ? direct.rf1_75->f1 : 0.0, 1e-12);
  }
}

TEST(OptimizeThresholdsTest, SingleCellAndTieBreak) {
  const auto rasters = PlantedDuplicateRasters();
  ThresholdGrid one{{0.7}, {0.4}};
  const auto r = OptimizeThresholds(rasters, one, {}, Objective::kRf1At75,
                                    ThresholdSet::Coco());
  EXPECT_EQ(r.best.nms_iou, 0.7);
  EXPECT_EQ(r.best.confidence_threshold, 0.4);

  RasterCase perfect;
  perfect.gsd = 0.1;
  perfect.layout = TileLayout::Identity({0, 0, 50, 50});
  perfect.ground_truths = {BoxCrown(5, 5, 10, 10)};
  perfect.tile_predictions["raster"] = {BoxCrown(5, 5, 10, 10, 1.0)};
  const std::vector<RasterCase> rs = {perfect};
  const auto p = OptimizeThresholds(rs, ThresholdGrid::Default(), {},
                                    Objective::kMrf1, ThresholdSet::Coco());
  for (const GridCell& c : p.audit) EXPECT_EQ(c.objective, 1.0);
  EXPECT_EQ(p.best.confidence_threshold, 0.05);
  EXPECT_EQ(p.best.nms_iou, 0.30);
}

TEST(OptimizeThresholdsTest, RejectsEmptyInputs) {
  EXPECT_THROW(OptimizeThresholds({}, ThresholdGrid::Default(), {}, Objective::kMrf1,
                                  ThresholdSet::Coco()),
               ValidationError);
  const auto rasters = PlantedDuplicateRasters();
  EXPECT_THROW(OptimizeThresholds(rasters, ThresholdGrid{}, {}, Objective::kMrf1,
                                  ThresholdSet::Coco()),
               ValidationError);
}

TEST(OptimizeThresholdsTest, DefaultGridShape) {
  const ThresholdGrid g = ThresholdGrid::Default();
  EXPECT_EQ(g.nms_iou.size(), 14u);
  EXPECT_EQ(g.confidence.size(), 19u);
  EXPECT_EQ(g.nms_iou.front(), 0.30);
  EXPECT_EQ(g.confidence.back(), 0.95);
}

}  // namespace
}  // namespace crowneval
