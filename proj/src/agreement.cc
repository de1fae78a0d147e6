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

#include <set>

#include "crowneval/errors.h"
#include "crowneval/iou_table.h"
#include "crowneval/parallel.h"

namespace crowneval {

void ValidateAnnotationSet(const AnnotationSet& set,
                           const AgreementOptions& options) {
  const std::string who = "annotation set '" + set.annotator + "'";
  const Box region_box = set.region.Bounds();
  for (const CrownInstance& c : set.crowns) {
    if (!c.HasGeometry()) {
      throw ValidationError(who + ": crown " + std::to_string(c.id) +
                            " has no geometry");
    }
    if (c.score != 1.0) {
      throw ValidationError(who + ": crown " + std::to_string(c.id) +
                            " has score != 1");
    }
    const bool touches =
        c.polygon ? PolygonIntersectionArea(*c.polygon, set.region) > 0.0
                  : !BoxIntersection(InstanceBox(c), region_box).Empty() &&
                        IntersectionCount(*c.mask,
                                          Rasterize(set.region, c.mask->frame())) > 0;
    if (!touches) {
      throw ValidationError(who + ": crown " + std::to_string(c.id) +
                            " lies outside the region");
    }
  }
  const IouTable self = ComputeIouTable(set.crowns, set.crowns, options.iou_kind);
  for (size_t i = 0; i < self.rows(); ++i) {
    for (const IouEntry& e : self.Row(i)) {
      if (e.column > i && e.iou > options.overlap_epsilon) {
        throw ValidationError(who + ": crowns " + std::to_string(set.crowns[i].id) +
                              " and " + std::to_string(set.crowns[e.column].id) +
                              " overlap (IoU " + std::to_string(e.iou) + ")");
      }
    }
  }
}

std::vector<CrownInstance> ClipToRegion(std::span<const CrownInstance> crowns,
                                        const Polygon& region, double gsd) {
  std::vector<CrownInstance> out;
  for (const CrownInstance& c : crowns) {
    const BinaryMask mask = InstanceMask(c);
    if (mask.Empty()) continue;
    BinaryMask kept = MaskAnd(mask, Rasterize(region, mask.frame())).Trimmed();
    if (kept.Empty()) continue;
    CrownInstance clipped = c;
    clipped.truncated = c.truncated || kept.Count() < mask.Count();
    clipped.mask = std::move(kept);
    clipped.polygon.reset();
    DeriveArea(clipped, gsd);
    out.push_back(std::move(clipped));
  }
  return out;
}

namespace {

struct ClippedPair {
  std::vector<CrownInstance> predictions;
  std::vector<CrownInstance> references;
};

ClippedPair ClipPair(const AnnotationSet& prediction, const AnnotationSet& reference,
                     double gsd) {
  if (!(gsd > 0.0)) throw ValidationError("agreement needs gsd > 0");
  if (!(PolygonIntersectionArea(prediction.region, reference.region) > 0.0)) {
    throw ValidationError("regions of '" + prediction.annotator + "' and '" +
                          reference.annotator + "' are disjoint");
  }
  // Clipping to each region in turn keeps the pixels of the intersection.
  auto clip = [&](const AnnotationSet& s) {
    return ClipToRegion(ClipToRegion(s.crowns, prediction.region, gsd),
                        reference.region, gsd);
  };
  return {clip(prediction), clip(reference)};
}

RasterEvalOptions EvalOptions(const AgreementOptions& options) {
  RasterEvalOptions eval;
  eval.iou_kind = options.iou_kind == IouKind::kPolygon ? IouKind::kMask
                                                        : options.iou_kind;
  return eval;
}

}  // namespace

AgreementEntry PairwiseAgreement(const AnnotationSet& prediction,
                                 const AnnotationSet& reference,
                                 const AgreementOptions& options) {
  const ClippedPair pair = ClipPair(prediction, reference, options.gsd);
  return {prediction.annotator, reference.annotator,
          ComputeMrf1(pair.predictions, pair.references, options.thresholds,
                      options.gsd, EvalOptions(options))};
}

std::vector<AgreementEntry> AgreementMatrix(std::span<const AnnotationSet> sets,
                                            const AgreementOptions& options) {
  if (sets.size() < 2) {
    throw ValidationError("agreement needs at least two annotation sets");
  }
  for (const AnnotationSet& s : sets) ValidateAnnotationSet(s, options);
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < sets.size(); ++i) {
    for (size_t j = 0; j < sets.size(); ++j) {
      if (i != j) pairs.emplace_back(i, j);
    }
  }
  std::vector<AgreementEntry> out(pairs.size());
  ParallelFor(pairs.size(), [&](size_t k) {
    out[k] = PairwiseAgreement(sets[pairs[k].first], sets[pairs[k].second], options);
  });
  return out;
}

std::vector<AgreementEntry> PooledAgreementMatrix(
    std::span<const AgreementSite> sites, const AgreementOptions& options) {
  std::set<std::string> names;
  for (const AgreementSite& site : sites) {
    std::set<std::string> here;
    for (const AnnotationSet& s : site.sets) {
      if (!here.insert(s.annotator).second) {
        throw ValidationError("site '" + site.name + "' lists annotator '" +
                              s.annotator + "' twice");
      }
      AgreementOptions local = options;
      local.gsd = site.gsd;
      ValidateAnnotationSet(s, local);
    }
    names.insert(here.begin(), here.end());
  }
  if (names.size() < 2) {
    throw ValidationError("agreement needs at least two annotators");
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const std::string& p : names) {
    for (const std::string& r : names) {
      if (p != r) pairs.emplace_back(p, r);
    }
  }
  std::vector<AgreementEntry> out(pairs.size());
  ParallelFor(pairs.size(), [&](size_t k) {
    const auto& [pred, ref] = pairs[k];
    RasterScorer scorer(options.thresholds, EvalOptions(options));
    for (const AgreementSite& site : sites) {
      const AnnotationSet* a = nullptr;
      const AnnotationSet* b = nullptr;
      for (const AnnotationSet& s : site.sets) {
        if (s.annotator == pred) a = &s;
        if (s.annotator == ref) b = &s;
      }
      if (!a || !b) continue;
      const ClippedPair pair = ClipPair(*a, *b, site.gsd);
      scorer.Add(pair.predictions, pair.references, site.gsd);
    }
    out[k] = {pred, ref, scorer.Score()};
  });
  return out;
}

}  // namespace crowneval
