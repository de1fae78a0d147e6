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
#include "crowneval/agreement.h"

#include "crowneval/errors.h"
#include "crowneval/random.h"
#include "gtest/gtest.h"
#include "testing/fixtures.h"

namespace crowneval {
namespace {

using ::crowneval::testing::AnnotatorPair;
using ::crowneval::testing::BoxCrown;
using ::crowneval::testing::RandomAnnotatorPair;
using ::crowneval::testing::Rectangle;

AgreementOptions Options(double gsd) {
  AgreementOptions o;
  o.gsd = gsd;
  return o;
}

AnnotationSet Set(std::string who, std::vector<CrownInstance> crowns,
                  Polygon region = Rectangle(-1000, -1000, 5000, 5000)) {
  return {std::move(who), std::move(crowns), std::move(region)};
}

TEST(AgreementTest, SelfAgreementIsOnePerNonemptyClass) {
  Rng rng(1);
  const AnnotatorPair pair = RandomAnnotatorPair(rng, 8, 40.0);
  const AnnotationSet a = Set("a", pair.first);
  // gsd 0.25: crowns of radius 5..16 px span several classes.
  const AgreementEntry e = PairwiseAgreement(a, a, Options(0.25));
  EXPECT_EQ(e.score.all.mrf1, 1.0);
  int present = 0;
  for (const RasterClassScore& c : e.score.per_class) {
    if (!c.mrf1) continue;
    ++present;
    EXPECT_EQ(*c.mrf1, 1.0);
  }
  EXPECT_GE(present, 2);
}

TEST(AgreementTest, SingleCrownAgainstNothing) {
  const AnnotationSet a = Set("a", {BoxCrown(0, 0, 10, 10)});
  const AnnotationSet b = Set("b", {});
  EXPECT_EQ(PairwiseAgreement(a, b, Options(0.1)).score.all.mrf1, 0.0);
  EXPECT_EQ(PairwiseAgreement(b, a, Options(0.1)).score.all.mrf1, 0.0);
}

TEST(AgreementTest, UnstratifiedSymmetryUnderRoleSwap) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const AnnotatorPair pair = RandomAnnotatorPair(rng, 6, 36.0);
    const AnnotationSet a = Set("a", pair.first), b = Set("b", pair.second);
    const AgreementOptions o = Options(0.3);
    ValidateAnnotationSet(a, o);
    ValidateAnnotationSet(b, o);
    const RasterScore ab = PairwiseAgreement(a, b, o).score;
    const RasterScore ba = PairwiseAgreement(b, a, o).score;
    ASSERT_TRUE(ab.all.mrf1.has_value());
    EXPECT_NEAR(*ab.all.mrf1, *ba.all.mrf1, 1e-12) << trial;
    for (size_t t = 0; t < ab.thresholds.size(); ++t) {
      EXPECT_EQ(ab.all.per_threshold[t]->tp, ba.all.per_threshold[t]->tp);
    }
  }
}

TEST(AgreementTest, StratifiedScoresCanDifferUnderSwap) {
  // gsd 1: A's crown is 8 m^2 (Tiny), B's covers it plus one column, 10 m^2
  // (Small); IoU 0.8. With A as prediction the Tiny class sees only an
  // ignored match. With B as prediction A is a Tiny reference that B matches
  // at the 7 thresholds <= 0.80.
  const AnnotationSet a = Set("a", {BoxCrown(0, 0, 4, 2)});
  const AnnotationSet b = Set("b", {BoxCrown(0, 0, 5, 2)});
  const auto tiny = static_cast<int>(SizeClass::kTiny);
  const RasterScore ab = PairwiseAgreement(a, b, Options(1.0)).score;
  const RasterScore ba = PairwiseAgreement(b, a, Options(1.0)).score;
  EXPECT_EQ(ab.per_class[tiny].mrf1, 0.0);
  EXPECT_DOUBLE_EQ(*ba.per_class[tiny].mrf1, 0.7);
  EXPECT_EQ(ab.all.mrf1, ba.all.mrf1);
}

TEST(AgreementTest, ClipsToSharedRegion) {
  // The crown straddles the edge of B's region; only its left half counts.
  const AnnotationSet a = Set("a", {BoxCrown(10, 10, 20, 10)}, Rectangle(0, 0, 100, 100));
  const AnnotationSet b = Set("b", {BoxCrown(10, 10, 10, 10)}, Rectangle(0, 0, 20, 100));
  EXPECT_EQ(PairwiseAgreement(a, b, Options(0.1)).score.all.mrf1, 1.0);
  const auto clipped = ClipToRegion(a.crowns, b.region, 0.1);
  ASSERT_EQ(clipped.size(), 1u);
  EXPECT_EQ(clipped[0].mask->Count(), 100);
  EXPECT_TRUE(clipped[0].truncated);
}

TEST(AgreementTest, DisjointRegionsRejected) {
  const AnnotationSet a = Set("a", {}, Rectangle(0, 0, 10, 10));
  const AnnotationSet b = Set("b", {}, Rectangle(20, 0, 30, 10));
  EXPECT_THROW(PairwiseAgreement(a, b, Options(0.1)), ValidationError);
}

TEST(AgreementTest, ValidationRules) {
  const AgreementOptions o = Options(0.1);
  CrownInstance scored = BoxCrown(0, 0, 4, 4, 0.5);
  EXPECT_THROW(ValidateAnnotationSet(Set("a", {scored}), o), ValidationError);
  EXPECT_THROW(ValidateAnnotationSet(Set("a", {BoxCrown(0, 0, 4, 4), BoxCrown(1, 0, 4, 4)}), o),
               ValidationError);
  // A one-pixel touch stays under the epsilon.
  std::vector<CrownInstance> touching = {BoxCrown(0, 0, 10, 10), BoxCrown(9, 9, 10, 10)};
  EXPECT_NO_THROW(ValidateAnnotationSet(Set("a", touching), o));
  EXPECT_THROW(ValidateAnnotationSet(
                   Set("a", {BoxCrown(50, 50, 4, 4)}, Rectangle(0, 0, 10, 10)), o),
               ValidationError);
}

TEST(AgreementMatrixTest, ShapesAndEntries) {
  Rng rng(5);
  const AnnotatorPair p = RandomAnnotatorPair(rng, 5, 40.0);
  const AnnotatorPair q = RandomAnnotatorPair(rng, 5, 40.0);
  const std::vector<AnnotationSet> two = {Set("a", p.first), Set("a2", p.first)};
  const auto m2 = AgreementMatrix(two, Options(0.25));
  ASSERT_EQ(m2.size(), 2u);
  for (const auto& e : m2) {
    EXPECT_EQ(e.score.all.mrf1, 1.0);
    for (const auto& c : e.score.per_class) {
      if (c.mrf1) {
        EXPECT_EQ(*c.mrf1, 1.0);
      }
    }
  }
  const std::vector<AnnotationSet> three = {Set("a", p.first), Set("b", p.second),
                                            Set("c", q.first)};
  const auto m3 = AgreementMatrix(three, Options(0.25));
  ASSERT_EQ(m3.size(), 6u);
  EXPECT_EQ(m3[0].prediction, "a");
  EXPECT_EQ(m3[0].reference, "b");
  EXPECT_EQ(m3[5].prediction, "c");
  EXPECT_EQ(m3[5].reference, "b");
  for (const auto& e : m3) {
    const AnnotationSet* pred = nullptr;
    const AnnotationSet* ref = nullptr;
    for (const auto& s : three) {
      if (s.annotator == e.prediction) pred = &s;
      if (s.annotator == e.reference) ref = &s;
    }
    const RasterScore direct = PairwiseAgreement(*pred, *ref, Options(0.25)).score;
    EXPECT_EQ(e.score.all.mrf1, direct.all.mrf1);
    for (int c = 0; c < 5; ++c) EXPECT_EQ(e.score.per_class[c].mrf1, direct.per_class[c].mrf1);
  }
  EXPECT_THROW(AgreementMatrix(std::vector<AnnotationSet>{Set("a", {})}, Options(0.25)),
               ValidationError);
}

TEST(PooledAgreementTest, SumsCountsAcrossSites) {
  Rng rng(9);
  const AnnotatorPair s1 = RandomAnnotatorPair(rng, 6, 40.0);
  const AnnotatorPair s2 = RandomAnnotatorPair(rng, 4, 40.0);
  const std::vector<AgreementSite> sites = {
      {"one", 0.25, {Set("a", s1.first), Set("b", s1.second)}},
      {"two", 0.1, {Set("b", s2.second), Set("a", s2.first)}},
      {"three", 0.2, {Set("a", s2.second)}},  // no partner: contributes nothing
  };
  const auto pooled = PooledAgreementMatrix(sites, AgreementOptions{});
  ASSERT_EQ(pooled.size(), 2u);
  for (const AgreementEntry& e : pooled) {
    const bool ab = e.prediction == "a";
    const RasterScore r1 =
        ab ? PairwiseAgreement(sites[0].sets[0], sites[0].sets[1], Options(0.25)).score
           : PairwiseAgreement(sites[0].sets[1], sites[0].sets[0], Options(0.25)).score;
    const RasterScore r2 =
        ab ? PairwiseAgreement(sites[1].sets[1], sites[1].sets[0], Options(0.1)).score
           : PairwiseAgreement(sites[1].sets[0], sites[1].sets[1], Options(0.1)).score;
    double sum = 0.0;
    for (size_t t = 0; t < r1.thresholds.size(); ++t) {
      const RasterF1& x = *r1.all.per_threshold[t];
      const RasterF1& y = *r2.all.per_threshold[t];
      const double tp = x.tp + y.tp, fp = x.fp + y.fp, fn = x.fn + y.fn;
      sum += tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
    }
    EXPECT_NEAR(*e.score.all.mrf1, sum / r1.thresholds.size(), 1e-12);
  }
}

TEST(PooledAgreementTest, DuplicateAnnotatorAtOneSiteRejected) {
  const std::vector<AgreementSite> sites = {
      {"one", 0.25, {Set("a", {}), Set("a", {})}}};
  EXPECT_THROW(PooledAgreementMatrix(sites, AgreementOptions{}), ValidationError);
}

}  // namespace
}  // namespace crowneval
