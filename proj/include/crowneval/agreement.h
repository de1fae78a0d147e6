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
#ifndef CROWNEVAL_AGREEMENT_H_
#define CROWNEVAL_AGREEMENT_H_

#include <span>
#include <string>
#include <vector>

#include "crowneval/crown.h"
#include "crowneval/geometry.h"
#include "crowneval/raster_metrics.h"
#include "crowneval/thresholds.h"

namespace crowneval {

// One annotator's crowns over a jointly annotated region, in the shared
// raster frame.
struct AnnotationSet {
  std::string annotator;
  std::vector<CrownInstance> crowns;
  Polygon region;
};

struct AgreementOptions {
  ThresholdSet thresholds = ThresholdSet::Coco();
  IouKind iou_kind = IouKind::kMask;
  double gsd = 0.0;
  // Two crowns of one set may not overlap with IoU above this.
  double overlap_epsilon = 0.01;
};

// Throws ValidationError when a score differs from 1, a crown misses the
// region, or two crowns overlap beyond the epsilon.
void ValidateAnnotationSet(const AnnotationSet& set, const AgreementOptions& options);

// Crowns restricted to the pixels of `region` (as masks); crowns left empty
// are dropped and areas are derived from what remains.
std::vector<CrownInstance> ClipToRegion(std::span<const CrownInstance> crowns,
                                        const Polygon& region, double gsd);

struct AgreementEntry {
  std::string prediction;
  std::string reference;
  RasterScore score;
};

// mRF1 of `prediction` against `reference` after clipping both to the
// intersection of their regions. No confidence filter and no NMS. Throws
// ValidationError when the regions are disjoint.
AgreementEntry PairwiseAgreement(const AnnotationSet& prediction,
                                 const AnnotationSet& reference,
                                 const AgreementOptions& options);

// Every ordered pair (i, j), i != j, row-major by input order.
std::vector<AgreementEntry> AgreementMatrix(std::span<const AnnotationSet> sets,
                                            const AgreementOptions& options);

// One site of a multi-site agreement study, with its own GSD.
struct AgreementSite {
  std::string name;
  double gsd = 0.0;
  std::vector<AnnotationSet> sets;
};

// Ordered pairs over all annotator names; each site where both annotators
// are present contributes its match counts to the pair's pooled RF1. The gsd
// of `options` is ignored in favor of each site's own.
std::vector<AgreementEntry> PooledAgreementMatrix(std::span<const AgreementSite> sites,
                                                  const AgreementOptions& options);

}  // namespace crowneval

#endif  // CROWNEVAL_AGREEMENT_H_
