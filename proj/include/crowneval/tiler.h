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
#ifndef CROWNEVAL_TILER_H_
#define CROWNEVAL_TILER_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowneval/crown.h"
#include "crowneval/geometry.h"
#include "crowneval/raster_grid.h"

namespace crowneval {

struct TilingSpec {
  int64_t tile_size = 1777;
  double overlap = 0.75;             // in [0, 1)
  std::optional<Polygon> zone;       // raster pixel frame
  double min_annotation_area_ratio = 0.0;

  // max(1, floor(tile_size * (1 - overlap))).
  int64_t Stride() const;
  // Throws ValidationError unless tile_size >= 1, 0 <= overlap < 1 and the
  // area ratio is in [0, 1].
  void Validate() const;
};

// Window origins along one axis: 0, stride, 2 * stride, ... while the window
// fits, then one window flush with the far edge if the extent is not yet
// covered. A tile larger than the extent yields the single origin 0.
std::vector<int64_t> AxisOrigins(int64_t extent, int64_t tile_size,
                                 int64_t stride);

struct PlannedTile {
  std::string id;     // "r<row>_c<col>" on the full origin grid
  int row = 0;
  int col = 0;
  PixelRect window;   // clamped to the raster extent
};

// Row-major windows; those whose zone intersection has no pixel are dropped.
std::vector<PlannedTile> PlanTiles(const RasterGrid& grid,
                                   const TilingSpec& spec);

// Interleaved 8-bit raster, row-major.
struct Image {
  int64_t width = 0;
  int64_t height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;

  Image() = default;
  Image(int64_t w, int64_t h, int c)
      : width(w), height(h), channels(c),
        pixels(static_cast<size_t>(w * h * c), 0) {}

  uint8_t* At(int64_t x, int64_t y) {
    return pixels.data() + (y * width + x) * channels;
  }
  const uint8_t* At(int64_t x, int64_t y) const {
    return pixels.data() + (y * width + x) * channels;
  }
  PixelRect Extent() const { return {0, 0, width, height}; }

  friend bool operator==(const Image&, const Image&) = default;
};

struct Tile {
  std::string id;
  PixelRect window;     // raster frame
  Image pixels;         // window-sized; invalid pixels are zero
  BinaryMask validity;  // tile-local frame {0, 0, width, height}
  std::vector<CrownInstance> annotations;  // tile-local

  int64_t ValidCount() const { return validity.Count(); }
};

// Copies the window. Pixels outside the raster or outside `zone_mask` (raster
// frame, when given) are zeroed and invalid. Throws ValidationError when the
// window misses the raster.
Tile CutTile(const Image& raster, const PlannedTile& planned,
             const BinaryMask* zone_mask);

// Clips crowns (raster frame) to the window and returns them in tile-local
// coordinates. Crowns whose kept fraction of area is below
// min_annotation_area_ratio, or with nothing left, are dropped; partially
// kept crowns are flagged truncated and lose their cached area.
std::vector<CrownInstance> ClipAnnotations(std::span<const CrownInstance> crowns,
                                           const PixelRect& window,
                                           double min_annotation_area_ratio);

// Plans and cuts all tiles of one raster, clipping `crowns` into each. Tiles
// come back in plan order.
std::vector<Tile> CutTiles(const Image& raster, const RasterGrid& grid,
                           const TilingSpec& spec,
                           std::span<const CrownInstance> crowns);

struct SplitStats {
  int64_t crowns = 0;
  double hectares = 0.0;
  SizeDistribution sizes;
};

// Crown counts and zone areas per split. Each crown goes to the zone holding
// the largest share of its area; crowns touching no zone are counted under
// the key "unassigned" (hectares 0). Throws ValidationError when two zones
// overlap with positive area.
std::map<std::string, SplitStats> SplitCensus(
    const std::map<std::string, Polygon>& zones,
    std::span<const CrownInstance> crowns, double gsd);

// Census pooled over several rasters whose splits may consist of several
// disjoint parts. Each part is a zone for assignment and overlap checks;
// statistics are reported per split name, with "unassigned" as above.
class CensusAccumulator {
 public:
  void Add(const std::map<std::string, std::vector<Polygon>>& splits,
           std::span<const CrownInstance> crowns, double gsd);

  std::map<std::string, SplitStats> Stats() const;
  SizeDistribution All() const;  // every crown added

 private:
  std::map<std::string, std::vector<double>> areas_m2_;
  std::map<std::string, double> hectares_;
};

// Zone id per crown (empty string when unassigned), same rule as above.
std::vector<std::string> AssignToZones(const std::map<std::string, Polygon>& zones,
                                       std::span<const CrownInstance> crowns);

}  // namespace crowneval

#endif  // CROWNEVAL_TILER_H_
