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
#include "crowneval/tiler.h"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "crowneval/errors.h"
#include "crowneval/parallel.h"

namespace crowneval {

namespace {

std::optional<BinaryMask> ZoneMask(const TilingSpec& spec,
                                   const PixelRect& extent) {
  if (!spec.zone) return std::nullopt;
  return Rasterize(*spec.zone, extent);
}

std::vector<PlannedTile> Plan(const RasterGrid& grid, const TilingSpec& spec,
                              const BinaryMask* zone_mask) {
  const int64_t stride = spec.Stride();
  const std::vector<int64_t> xs = AxisOrigins(grid.width, spec.tile_size, stride);
  const std::vector<int64_t> ys =
      AxisOrigins(grid.height, spec.tile_size, stride);
  std::vector<PlannedTile> out;
  for (size_t r = 0; r < ys.size(); ++r) {
    for (size_t c = 0; c < xs.size(); ++c) {
      PlannedTile t;
      t.row = static_cast<int>(r);
      t.col = static_cast<int>(c);
      t.id = "r" + std::to_string(r) + "_c" + std::to_string(c);
      t.window = Intersect(PixelRect{xs[c], ys[r], spec.tile_size, spec.tile_size},
                           grid.Extent());
      if (zone_mask && zone_mask->Cropped(t.window).Empty()) continue;
      out.push_back(std::move(t));
    }
  }
  return out;
}

// Area of `crown` inside `zone`, in pixel^2.
double ZoneShare(const CrownInstance& crown, const Polygon& zone) {
  if (crown.mask) {
    const BinaryMask& m = *crown.mask;
    if (m.Empty()) return 0.0;
    return static_cast<double>(IntersectionCount(m, Rasterize(zone, m.frame())));
  }
  if (crown.polygon) return PolygonIntersectionArea(*crown.polygon, zone);
  throw ValidationError("crown " + std::to_string(crown.id) + " has no geometry");
}

}  // namespace

int64_t TilingSpec::Stride() const {
  const double raw = std::floor(static_cast<double>(tile_size) * (1.0 - overlap));
  return std::max<int64_t>(1, static_cast<int64_t>(raw));
}

void TilingSpec::Validate() const {
  if (tile_size < 1) throw ValidationError("tile_size must be >= 1");
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw ValidationError("overlap must be in [0, 1), got " +
                          std::to_string(overlap));
  }
  if (!(min_annotation_area_ratio >= 0.0 && min_annotation_area_ratio <= 1.0)) {
    throw ValidationError("min_annotation_area_ratio must be in [0, 1]");
  }
}

std::vector<int64_t> AxisOrigins(int64_t extent, int64_t tile_size,
                                 int64_t stride) {
  if (extent <= 0 || tile_size <= 0 || stride <= 0) {
    throw ValidationError("axis extent, tile size and stride must be positive");
  }
  if (tile_size >= extent) return {0};
  std::vector<int64_t> out;
  for (int64_t o = 0; o + tile_size <= extent; o += stride) out.push_back(o);
  if (out.back() + tile_size < extent) out.push_back(extent - tile_size);
  return out;
}

std::vector<PlannedTile> PlanTiles(const RasterGrid& grid,
                                   const TilingSpec& spec) {
  grid.Validate();
  spec.Validate();
  const auto zone = ZoneMask(spec, grid.Extent());
  return Plan(grid, spec, zone ? &*zone : nullptr);
}

Tile CutTile(const Image& raster, const PlannedTile& planned,
             const BinaryMask* zone_mask) {
  const PixelRect& w = planned.window;
  const PixelRect inside = Intersect(w, raster.Extent());
  if (w.Empty() || inside.Empty()) {
    throw ValidationError("tile " + planned.id + " lies outside the raster");
  }
  Tile tile;
  tile.id = planned.id;
  tile.window = w;
  tile.pixels = Image(w.width, w.height, raster.channels);
  tile.validity = BinaryMask(PixelRect{0, 0, w.width, w.height});
  const size_t px = static_cast<size_t>(raster.channels);
  for (int64_t y = inside.y; y < inside.Bottom(); ++y) {
    for (int64_t x = inside.x; x < inside.Right(); ++x) {
      if (zone_mask && !zone_mask->At(x, y)) continue;
      std::memcpy(tile.pixels.At(x - w.x, y - w.y), raster.At(x, y), px);
      tile.validity.Set(x - w.x, y - w.y);
    }
  }
  return tile;
}

std::vector<CrownInstance> ClipAnnotations(std::span<const CrownInstance> crowns,
                                           const PixelRect& window,
                                           double min_annotation_area_ratio) {
  std::vector<CrownInstance> out;
  const Box box = window.ToBox();
  for (const CrownInstance& crown : crowns) {
    const double original = CrownAreaPx(crown);
    if (!(original > 0.0)) continue;
    CrownInstance local = crown;
    double kept = 0.0;
    if (crown.polygon) {
      const auto clipped = ClipToRect(*crown.polygon, box);
      local.polygon.reset();
      if (clipped) local.polygon = clipped->Translated(-window.x, -window.y);
      if (!crown.mask) kept = clipped ? PolygonAreaPx(*clipped) : 0.0;
    }
    if (crown.mask) {
      const BinaryMask cropped = crown.mask->Cropped(window).Trimmed();
      kept = static_cast<double>(cropped.Count());
      local.mask = cropped.Translated(-window.x, -window.y);
    }
    if (!(kept > 0.0) || kept / original < min_annotation_area_ratio) continue;
    const bool truncated = crown.mask ? kept < original
                                      : kept < original * (1.0 - 1e-12);
    if (truncated) local.area_m2.reset();
    local.truncated = crown.truncated || truncated;
    out.push_back(std::move(local));
  }
  return out;
}

std::vector<Tile> CutTiles(const Image& raster, const RasterGrid& grid,
                           const TilingSpec& spec,
                           std::span<const CrownInstance> crowns) {
  grid.Validate();
  spec.Validate();
  if (raster.width != grid.width || raster.height != grid.height) {
    throw ValidationError("image size does not match the raster grid");
  }
  const auto zone = ZoneMask(spec, grid.Extent());
  const BinaryMask* zone_ptr = zone ? &*zone : nullptr;
  const std::vector<PlannedTile> plan = Plan(grid, spec, zone_ptr);
  std::vector<Tile> tiles(plan.size());
  ParallelFor(plan.size(), [&](size_t i) {
    tiles[i] = CutTile(raster, plan[i], zone_ptr);
    tiles[i].annotations =
        ClipAnnotations(crowns, plan[i].window, spec.min_annotation_area_ratio);
  });
  return tiles;
}

std::vector<std::string> AssignToZones(const std::map<std::string, Polygon>& zones,
                                       std::span<const CrownInstance> crowns) {
  std::vector<std::string> out(crowns.size());
  ParallelFor(crowns.size(), [&](size_t i) {
    double best = 0.0;
    for (const auto& [name, zone] : zones) {
      const double share = ZoneShare(crowns[i], zone);
      if (share > best) {
        best = share;
        out[i] = name;
      }
    }
  });
  return out;
}

std::map<std::string, SplitStats> SplitCensus(
    const std::map<std::string, Polygon>& zones,
    std::span<const CrownInstance> crowns, double gsd) {
  if (!(gsd > 0.0)) throw ValidationError("gsd must be positive");
  for (auto a = zones.begin(); a != zones.end(); ++a) {
    for (auto b = std::next(a); b != zones.end(); ++b) {
      const double overlap = PolygonIntersectionArea(a->second, b->second);
      const double scale =
          std::min(PolygonAreaPx(a->second), PolygonAreaPx(b->second));
      if (overlap > 1e-9 * scale) {
        throw ValidationError("zones '" + a->first + "' and '" + b->first +
                              "' overlap");
      }
    }
  }
  const std::vector<std::string> assignment = AssignToZones(zones, crowns);
  std::map<std::string, std::vector<CrownInstance>> members;
  std::map<std::string, SplitStats> out;
  for (const auto& [name, zone] : zones) {
    out[name].hectares = PolygonAreaPx(zone) * gsd * gsd / 10000.0;
    members[name];
  }
  for (size_t i = 0; i < crowns.size(); ++i) {
    const std::string key = assignment[i].empty() ? "unassigned" : assignment[i];
    members[key].push_back(crowns[i]);
  }
  for (const auto& [name, list] : members) {
    SplitStats& s = out[name];
    s.crowns = static_cast<int64_t>(list.size());
    s.sizes = ComputeSizeDistribution(list, gsd);
  }
  return out;
}

void CensusAccumulator::Add(const std::map<std::string, std::vector<Polygon>>& splits,
                            std::span<const CrownInstance> crowns, double gsd) {
  std::map<std::string, Polygon> zones;
  std::map<std::string, std::string> split_of;
  for (const auto& [split, parts] : splits) {
    for (size_t k = 0; k < parts.size(); ++k) {
      const std::string key = split + "#" + std::to_string(k);
      zones.emplace(key, parts[k]);
      split_of[key] = split;
    }
  }
  // SplitCensus validates gsd and zone disjointness and measures each part.
  const auto parts = SplitCensus(zones, {}, gsd);
  const std::vector<std::string> assignment = AssignToZones(zones, crowns);
  for (const auto& [key, split] : split_of) {
    hectares_[split] += parts.at(key).hectares;
    areas_m2_[split];
  }
  for (size_t i = 0; i < crowns.size(); ++i) {
    const std::string split =
        assignment[i].empty() ? "unassigned" : split_of.at(assignment[i]);
    areas_m2_[split].push_back(CrownAreaM2(crowns[i], gsd));
  }
}

std::map<std::string, SplitStats> CensusAccumulator::Stats() const {
  std::map<std::string, SplitStats> out;
  for (const auto& [split, areas] : areas_m2_) {
    SplitStats& s = out[split];
    s.crowns = static_cast<int64_t>(areas.size());
    const auto h = hectares_.find(split);
    s.hectares = h == hectares_.end() ? 0.0 : h->second;
    s.sizes = SizeDistributionFromAreas(areas);
  }
  return out;
}

SizeDistribution CensusAccumulator::All() const {
  std::vector<double> all;
  for (const auto& [split, areas] : areas_m2_) {
    all.insert(all.end(), areas.begin(), areas.end());
  }
  return SizeDistributionFromAreas(std::move(all));
}

}  // namespace crowneval
