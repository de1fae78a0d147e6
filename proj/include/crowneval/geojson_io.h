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
#ifndef CROWNEVAL_GEOJSON_IO_H_
#define CROWNEVAL_GEOJSON_IO_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "crowneval/crown.h"
#include "crowneval/io_util.h"
#include "crowneval/raster_grid.h"

namespace crowneval {

// One feature mapped to the pixel frame. MultiPolygon features yield one
// entry per part.
struct GeoFeature {
  Polygon polygon;
  Json properties;
  size_t feature_index = 0;
};

// World -> pixel through the inverse geotransform. Throws ValidationError for
// non-invertible transforms and non-polygonal geometry.
std::vector<GeoFeature> ParseGeoJsonFeatures(const Json& doc,
                                             const GeoTransform& transform);

// Crowns: one Polygon feature each (a single-part MultiPolygon is accepted).
// Properties read: "id" (default: feature index), "score" (default 1),
// "annotator" (marks the crown as an annotator's).
std::vector<CrownInstance> ParseGeoJsonCrowns(const Json& doc,
                                              const RasterGrid& grid);
std::vector<CrownInstance> LoadGeoJson(const std::filesystem::path& path,
                                       const RasterGrid& grid);

// Polygons grouped by a string property (e.g. "split"); features missing the
// property are skipped. Each group is returned as a list of parts.
std::map<std::string, std::vector<Polygon>> LoadGeoJsonZones(
    const std::filesystem::path& path, const GeoTransform& transform,
    const std::string& property);

// Pixel -> world; rings are closed, a "crs" member is written when grid.crs
// is set. Crowns must carry a polygon (ValidationError otherwise).
Json CrownsToGeoJson(std::span<const CrownInstance> crowns,
                     const RasterGrid& grid);
void SaveGeoJson(const std::filesystem::path& path,
                 std::span<const CrownInstance> crowns, const RasterGrid& grid);

}  // namespace crowneval

#endif  // CROWNEVAL_GEOJSON_IO_H_
