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
#include "crowneval/crown.h"

#include "crowneval/errors.h"
#include "crowneval/raster_grid.h"
#include "crowneval/random.h"
#include "gtest/gtest.h"
#include "testing/fixtures.h"

namespace crowneval {
namespace {

using ::crowneval::testing::BoxCrown;
using ::crowneval::testing::Rectangle;

TEST(CrownAreaTest, MaskAreaAtGsd) {
  const CrownInstance c = BoxCrown(0, 0, 100, 100);
  EXPECT_DOUBLE_EQ(CrownAreaM2(c, 0.01), 1.0);
}

TEST(CrownAreaTest, PanamaSquare) {
  const CrownInstance c = BoxCrown(0, 0, 547, 547);
  RasterGrid grid{1000, 1000, 0.0183, {}, ""};
  const double area = CrownAreaM2(c, grid);
  EXPECT_NEAR(area, 547.0 * 547.0 * 0.0183 * 0.0183, 1e-9);
  EXPECT_NEAR(area, 100.2, 0.05);
  CrownInstance d = c;
  DeriveArea(d, 0.0183);
  EXPECT_EQ(CrownSizeClass(d), SizeClass::kGiant);
}

TEST(CrownAreaTest, PolygonUsesShoelace) {
  CrownInstance c;
  c.polygon = Rectangle(0, 0, 10.5, 10);
  EXPECT_DOUBLE_EQ(CrownAreaPx(c), 105.0);
  EXPECT_DOUBLE_EQ(CrownAreaM2(c, 0.1), 1.05);
}

TEST(CrownAreaTest, MissingGeometryIsError) {
  EXPECT_THROW(CrownAreaPx(CrownInstance{}), ValidationError);
  EXPECT_THROW(ValidateInstance(CrownInstance{}), ValidationError);
}

TEST(CrownAreaTest, QuadraticInGsd) {
  const CrownInstance c = BoxCrown(3, 4, 17, 9);
  EXPECT_DOUBLE_EQ(CrownAreaM2(c, 0.04), 4.0 * CrownAreaM2(c, 0.02));
}

TEST(SizeClassTest, Examples) {
  EXPECT_EQ(ClassifyArea(5.0), SizeClass::kTiny);
  EXPECT_EQ(ClassifyArea(9.0), SizeClass::kSmall);
  EXPECT_EQ(ClassifyArea(150.0), SizeClass::kGiant);
  EXPECT_EQ(ClassifyArea(100.0), SizeClass::kGiant);
  EXPECT_EQ(ClassifyArea(0.0), SizeClass::kTiny);
  EXPECT_EQ(ClassifyArea(24.999), SizeClass::kSmall);
  EXPECT_EQ(ClassifyArea(25.0), SizeClass::kMedium);
  EXPECT_EQ(ClassifyArea(49.0), SizeClass::kLarge);
  EXPECT_THROW(ClassifyArea(-1.0), ValidationError);
}

TEST(SizeClassTest, MonotoneInArea) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.Uniform(0, 200), b = rng.Uniform(0, 200);
    if (a <= b) {
      EXPECT_LE(static_cast<int>(ClassifyArea(a)),
                static_cast<int>(ClassifyArea(b)));
    }
  }
}

TEST(SizeClassTest, NamesRoundTrip) {
  for (SizeClass c : kAllSizeClasses) {
    EXPECT_EQ(ParseSizeClass(SizeClassName(c)), c);
  }
  EXPECT_FALSE(ParseSizeClass("huge").has_value());
}

TEST(ValidateTest, ScoreRules) {
  CrownInstance gt = BoxCrown(0, 0, 2, 2, 0.5);
  EXPECT_THROW(ValidateInstance(gt), ValidationError);
  gt.source.kind = SourceKind::kPrediction;
  EXPECT_NO_THROW(ValidateInstance(gt));
  gt.score = 1.5;
  EXPECT_THROW(ValidateInstance(gt), ValidationError);
}

TEST(SizeDistributionTest, CountsAndShares) {
  // gsd 1: areas in m^2 equal pixel counts.
  std::vector<CrownInstance> crowns = {BoxCrown(0, 0, 2, 2), BoxCrown(0, 0, 3, 3),
                                       BoxCrown(0, 0, 5, 6), BoxCrown(0, 0, 10, 10)};
  const SizeDistribution d = ComputeSizeDistribution(crowns, 1.0);
  EXPECT_EQ(d.total, 4);
  EXPECT_EQ(d.counts[0], 1);
  EXPECT_EQ(d.counts[1], 1);
  EXPECT_EQ(d.counts[2], 1);
  EXPECT_EQ(d.counts[4], 1);
  EXPECT_DOUBLE_EQ(d.percent[0], 25.0);
  EXPECT_DOUBLE_EQ(d.mean_area_m2, (4 + 9 + 30 + 100) / 4.0);
  EXPECT_DOUBLE_EQ(d.median_area_m2, (9 + 30) / 2.0);
}

TEST(GeoTransformTest, RoundTrip) {
  const GeoTransform t = GeoTransform::NorthUp(500000.0, 1000000.0, 0.0183);
  const Point w = t.PixelToWorld({1, 0});
  EXPECT_NEAR(w.x - 500000.0, 0.0183, 1e-9);
  const Point p = t.WorldToPixel({500000.0 + 0.0183, 1000000.0 - 0.0183});
  EXPECT_NEAR(p.x, 1.0, 1e-6);
  EXPECT_NEAR(p.y, 1.0, 1e-6);
  EXPECT_THROW(GeoTransform({0, 0, 0, 0, 0, 0}).WorldToPixel({1, 1}),
               ValidationError);
}

TEST(RasterGridTest, Validate) {
  EXPECT_THROW((RasterGrid{0, 10, 0.1, {}, ""}.Validate()), ValidationError);
  EXPECT_THROW((RasterGrid{10, 10, 0.0, {}, ""}.Validate()), ValidationError);
  EXPECT_NO_THROW((RasterGrid{10, 10, 0.1, {}, ""}.Validate()));
}

}  // namespace
}  // namespace crowneval
