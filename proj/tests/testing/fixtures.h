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
#ifndef CROWNEVAL_TESTS_TESTING_FIXTURES_H_
#define CROWNEVAL_TESTS_TESTING_FIXTURES_H_

#include <cstdint>
#include <vector>

#include "crowneval/crown.h"
#include "crowneval/geometry.h"
#include "crowneval/random.h"
#include "crowneval/raster_metrics.h"

namespace crowneval::testing {

// Star-shaped simple polygon around (cx, cy): angles strictly increase, radii
// drawn from [r_min, r_max].
Polygon RandomStar(Rng& rng, double cx, double cy, double r_min, double r_max,
                   int vertices);

Polygon Rectangle(double x0, double y0, double x1, double y1);

// Pixel-aligned rectangle as a mask instance.
CrownInstance BoxCrown(int64_t x, int64_t y, int64_t w, int64_t h,
                       double score = 1.0, int64_t id = 0);

// Mask instance rasterized from a polygon.
CrownInstance PolygonCrown(const Polygon& polygon, double score = 1.0,
                           int64_t id = 0);

// Random mask instances in a square canvas, overlapping freely.
std::vector<CrownInstance> RandomCrowns(Rng& rng, int count, int64_t canvas,
                                        double r_min, double r_max);

// Prediction-like copies of `truths`: each kept with probability `keep`,
// shifted by up to `max_shift` px per axis, with a discrete score; plus
// `spurious` random crowns with low scores.
std::vector<CrownInstance> PerturbedCopies(Rng& rng,
                                           const std::vector<CrownInstance>& truths,
                                           double keep, int max_shift,
                                           int spurious, int64_t canvas);

// Scores drawn from a small discrete set so ties occur often.
double DiscreteScore(Rng& rng, int levels = 5);

// Dense IoU table with entries drawn from a coarse grid (ties frequent) and a
// given fraction of zeros.
std::vector<std::vector<double>> RandomDenseTable(Rng& rng, size_t rows,
                                                  size_t cols,
                                                  double zero_fraction);

// Two annotators' non-overlapping crowns over a grid of `cells` x `cells`
// cells of `pitch` px. The second set redraws, shifts or omits the first
// set's crowns and adds a few of its own; all scores are 1.
struct AnnotatorPair {
  std::vector<CrownInstance> first;
  std::vector<CrownInstance> second;
};

AnnotatorPair RandomAnnotatorPair(Rng& rng, int cells, double pitch);

// Tiles cut from a square raster with planted crowns. Tile predictions are
// the crowns' in-window parts, jittered and rescored per tile.
struct MultiTileFixture {
  TileLayout layout;
  TilePredictions predictions;
  std::vector<CrownInstance> truths;
};

std::vector<int64_t> WindowOrigins(int64_t extent, int64_t size, int64_t stride);

MultiTileFixture RandomMultiTile(Rng& rng, int64_t raster, int64_t tile,
                                 int64_t stride, int crowns, int max_jitter);

}  // namespace crowneval::testing

#endif  // CROWNEVAL_TESTS_TESTING_FIXTURES_H_
