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
#ifndef CROWNEVAL_CROWN_H_
#define CROWNEVAL_CROWN_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowneval/geometry.h"
#include "crowneval/raster_grid.h"

namespace crowneval {

// Ecological crown-area buckets, ordered by area.
enum class SizeClass { kTiny = 0, kSmall, kMedium, kLarge, kGiant };

inline constexpr std::array<SizeClass, 5> kAllSizeClasses = {
    SizeClass::kTiny, SizeClass::kSmall, SizeClass::kMedium,
    SizeClass::kLarge, SizeClass::kGiant};

// Lower bounds in m^2; each class is [bound, next bound) and Giant is
// unbounded above.
inline constexpr std::array<double, 5> kSizeClassLowerBoundsM2 = {
    0.0, 9.0, 25.0, 49.0, 100.0};

std::string_view SizeClassName(SizeClass c);
std::optional<SizeClass> ParseSizeClass(std::string_view name);

// Throws ValidationError for negative or non-finite areas.
SizeClass ClassifyArea(double area_m2);

enum class SourceKind { kGroundTruth, kPrediction, kAnnotator };

struct CrownSource {
  SourceKind kind = SourceKind::kGroundTruth;
  std::string annotator;  // set for kAnnotator only

  friend bool operator==(const CrownSource&, const CrownSource&) = default;
};

// One crown. Geometry is in the pixel frame of the raster (or tile) that owns
// it; at least one of `polygon` and `mask` is present on valid instances.
struct CrownInstance {
  int64_t id = 0;
  std::optional<Polygon> polygon;
  std::optional<BinaryMask> mask;
  double score = 1.0;
  CrownSource source;
  // Set by DeriveArea(); stratified evaluation requires it.
  std::optional<double> area_m2;
  // True when the geometry was cut by a tile window.
  bool truncated = false;

  bool HasGeometry() const { return polygon.has_value() || mask.has_value(); }
};

// Throws ValidationError on missing geometry, score outside [0, 1], or a
// ground-truth/annotator instance whose score is not exactly 1.
void ValidateInstance(const CrownInstance& instance);

// Pixel area: set-pixel count when a mask is present, shoelace area
// otherwise. Throws ValidationError when the instance has no geometry.
double CrownAreaPx(const CrownInstance& instance);

double CrownAreaM2(const CrownInstance& instance, double gsd);
inline double CrownAreaM2(const CrownInstance& instance,
                          const RasterGrid& grid) {
  return CrownAreaM2(instance, grid.gsd);
}

// Fills area_m2 from the geometry.
void DeriveArea(CrownInstance& instance, double gsd);
void DeriveAreas(std::span<CrownInstance> instances, double gsd);

// Size class from area_m2; throws ValidationError when it was never derived.
SizeClass CrownSizeClass(const CrownInstance& instance);

// Rasterizes the polygon when no mask is attached.
BinaryMask InstanceMask(const CrownInstance& instance);
void EnsureMask(CrownInstance& instance);

// Mask box when a mask is present, otherwise the polygon bounds.
Box InstanceBox(const CrownInstance& instance);

CrownInstance Translated(const CrownInstance& instance, int64_t dx,
                         int64_t dy);

enum class IouKind { kMask, kBox, kPolygon };

std::string_view IouKindName(IouKind kind);
std::optional<IouKind> ParseIouKind(std::string_view name);

// Pairwise IoU under the chosen geometry. kPolygon requires polygons on both
// sides.
double InstanceIoU(const CrownInstance& a, const CrownInstance& b,
                   IouKind kind);

// Counts and shares per size class over a crown collection.
struct SizeDistribution {
  std::array<int64_t, 5> counts{};
  std::array<double, 5> percent{};
  int64_t total = 0;
  double mean_area_m2 = 0.0;
  double median_area_m2 = 0.0;
};

SizeDistribution ComputeSizeDistribution(
    std::span<const CrownInstance> crowns, double gsd);
// Same statistics over precomputed areas, e.g. pooled from several rasters.
SizeDistribution SizeDistributionFromAreas(std::vector<double> areas_m2);

}  // namespace crowneval

#endif  // CROWNEVAL_CROWN_H_
