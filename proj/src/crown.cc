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

#include <algorithm>
#include <cmath>

#include "crowneval/errors.h"

namespace crowneval {

std::string_view SizeClassName(SizeClass c) {
  switch (c) {
    case SizeClass::kTiny:
      return "tiny";
    case SizeClass::kSmall:
      return "small";
    case SizeClass::kMedium:
      return "medium";
    case SizeClass::kLarge:
      return "large";
    case SizeClass::kGiant:
      return "giant";
  }
  return "unknown";
}

std::optional<SizeClass> ParseSizeClass(std::string_view name) {
  for (SizeClass c : kAllSizeClasses) {
    if (SizeClassName(c) == name) return c;
  }
  return std::nullopt;
}

SizeClass ClassifyArea(double area_m2) {
  if (!std::isfinite(area_m2) || area_m2 < 0.0) {
    throw ValidationError("crown area must be finite and non-negative, got " +
                          std::to_string(area_m2));
  }
  for (int i = 4; i > 0; --i) {
    if (area_m2 >= kSizeClassLowerBoundsM2[i]) {
      return static_cast<SizeClass>(i);
    }
  }
  return SizeClass::kTiny;
}

void ValidateInstance(const CrownInstance& instance) {
  if (!instance.HasGeometry()) {
    throw ValidationError("crown " + std::to_string(instance.id) +
                          " has no geometry");
  }
  if (!(instance.score >= 0.0 && instance.score <= 1.0)) {
    throw ValidationError("crown " + std::to_string(instance.id) +
                          " score outside [0, 1]");
  }
  if (instance.source.kind != SourceKind::kPrediction &&
      instance.score != 1.0) {
    throw ValidationError("reference crown " + std::to_string(instance.id) +
                          " must carry score 1.0");
  }
}

double CrownAreaPx(const CrownInstance& instance) {
  if (instance.mask) return static_cast<double>(instance.mask->Count());
  if (instance.polygon) return PolygonAreaPx(*instance.polygon);
  throw ValidationError("crown " + std::to_string(instance.id) +
                        " has no geometry to measure");
}

double CrownAreaM2(const CrownInstance& instance, double gsd) {
  if (!(gsd > 0.0)) throw ValidationError("gsd must be positive");
  return CrownAreaPx(instance) * gsd * gsd;
}

void DeriveArea(CrownInstance& instance, double gsd) {
  instance.area_m2 = CrownAreaM2(instance, gsd);
}

void DeriveAreas(std::span<CrownInstance> instances, double gsd) {
  for (CrownInstance& c : instances) DeriveArea(c, gsd);
}

SizeClass CrownSizeClass(const CrownInstance& instance) {
  if (!instance.area_m2) {
    throw ValidationError("crown " + std::to_string(instance.id) +
                          " has no derived area");
  }
  return ClassifyArea(*instance.area_m2);
}

BinaryMask InstanceMask(const CrownInstance& instance) {
  if (instance.mask) return *instance.mask;
  if (instance.polygon) return Rasterize(*instance.polygon);
  throw ValidationError("crown " + std::to_string(instance.id) +
                        " has no geometry to rasterize");
}

void EnsureMask(CrownInstance& instance) {
  if (!instance.mask) instance.mask = InstanceMask(instance);
}

Box InstanceBox(const CrownInstance& instance) {
  if (instance.mask) {
    if (instance.mask->Empty()) return {};
    return MaskToBox(*instance.mask);
  }
  if (instance.polygon) return instance.polygon->Bounds();
  throw ValidationError("crown " + std::to_string(instance.id) +
                        " has no geometry");
}

CrownInstance Translated(const CrownInstance& instance, int64_t dx,
                         int64_t dy) {
  CrownInstance out = instance;
  if (out.polygon) {
    out.polygon = out.polygon->Translated(static_cast<double>(dx),
                                          static_cast<double>(dy));
  }
  if (out.mask) out.mask = out.mask->Translated(dx, dy);
  return out;
}

std::string_view IouKindName(IouKind kind) {
  switch (kind) {
    case IouKind::kMask:
      return "mask";
    case IouKind::kBox:
      return "box";
    case IouKind::kPolygon:
      return "polygon";
  }
  return "unknown";
}

std::optional<IouKind> ParseIouKind(std::string_view name) {
  for (IouKind k : {IouKind::kMask, IouKind::kBox, IouKind::kPolygon}) {
    if (IouKindName(k) == name) return k;
  }
  return std::nullopt;
}

double InstanceIoU(const CrownInstance& a, const CrownInstance& b,
                   IouKind kind) {
  switch (kind) {
    case IouKind::kMask:
      if (a.mask && b.mask) return MaskIoU(*a.mask, *b.mask);
      return MaskIoU(InstanceMask(a), InstanceMask(b));
    case IouKind::kBox:
      return BoxIoU(InstanceBox(a), InstanceBox(b));
    case IouKind::kPolygon:
      if (!a.polygon || !b.polygon) {
        throw ValidationError("polygon IoU needs polygon geometry on both "
                              "crowns");
      }
      return PolygonIoU(*a.polygon, *b.polygon);
  }
  return 0.0;
}

SizeDistribution SizeDistributionFromAreas(std::vector<double> areas_m2) {
  SizeDistribution out;
  for (double area : areas_m2) ++out.counts[static_cast<int>(ClassifyArea(area))];
  out.total = static_cast<int64_t>(areas_m2.size());
  if (out.total == 0) return out;
  double sum = 0.0;
  for (double a : areas_m2) sum += a;
  out.mean_area_m2 = sum / static_cast<double>(out.total);
  std::sort(areas_m2.begin(), areas_m2.end());
  const size_t mid = areas_m2.size() / 2;
  out.median_area_m2 = areas_m2.size() % 2 == 1
                           ? areas_m2[mid]
                           : 0.5 * (areas_m2[mid - 1] + areas_m2[mid]);
  for (int i = 0; i < 5; ++i) {
    out.percent[i] = 100.0 * static_cast<double>(out.counts[i]) /
                     static_cast<double>(out.total);
  }
  return out;
}

SizeDistribution ComputeSizeDistribution(
    std::span<const CrownInstance> crowns, double gsd) {
  std::vector<double> areas;
  areas.reserve(crowns.size());
  for (const CrownInstance& c : crowns) areas.push_back(CrownAreaM2(c, gsd));
  return SizeDistributionFromAreas(std::move(areas));
}

}  // namespace crowneval
