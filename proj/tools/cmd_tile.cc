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
#include <map>
#include <set>
#include <sstream>

#include "cli_context.h"
#include "crowneval/checksum.h"
#include "crowneval/config.h"
#include "crowneval/errors.h"
#include "crowneval/geojson_io.h"
#include "crowneval/parallel.h"
#include "crowneval/tiff_io.h"
#include "crowneval/tiler.h"

namespace crowneval::cli {

namespace fs = std::filesystem;

namespace {

// Tiles are cut and written in batches so memory stays bounded on large
// orthomosaics.
constexpr size_t kBatch = 32;

struct TileRecord {
  std::string split;
  std::string raster;
  std::string id;
  PixelRect window;
  std::string file;
  std::string sha256;
  int64_t valid_pixels = 0;
  std::vector<CrownInstance> annotations;
};

Json WindowJson(const PixelRect& w) { return {w.x, w.y, w.width, w.height}; }

}  // namespace

void RunTile(Context& ctx) {
  const Json& config = ctx.config();
  CheckKeys(config, "config", {"seed", "tiling", "rasters"});
  TilingSpec spec = ParseTiling(config.value("tiling", Json::object()));
  if (!config.contains("rasters") || !config["rasters"].is_array() ||
      config["rasters"].empty()) {
    throw ValidationError("config.rasters must be a non-empty array");
  }

  std::vector<TileRecord> records;
  std::map<std::string, Json> census_by_raster;
  CensusAccumulator pooled;
  std::set<std::string> names;
  for (size_t ri = 0; ri < config["rasters"].size(); ++ri) {
    const Json& entry = config["rasters"][ri];
    const std::string where = "rasters." + std::to_string(ri);
    CheckKeys(entry, where,
              {"name", "raster", "gsd", "annotations", "zones", "zone_property"});
    const std::string name = RequiredField<std::string>(entry, where, "name");
    if (!names.insert(name).second) {
      throw ValidationError("duplicate raster name '" + name + "'");
    }
    const GeoRaster source =
        ReadGeoTiff(ctx.Input(RequiredField<std::string>(entry, where, "raster")));
    const auto gsd = entry.contains("gsd")
                         ? std::optional(Field<double>(entry, where, "gsd", 0.0))
                         : std::nullopt;
    const RasterGrid grid = GridFromTiff(source.info, gsd);
    grid.Validate();
    std::vector<CrownInstance> crowns;
    if (entry.contains("annotations")) {
      crowns = LoadGroundTruth(
          ctx, Field<std::string>(entry, where, "annotations", ""), grid, name);
    }
    std::map<std::string, std::vector<Polygon>> splits;
    if (entry.contains("zones")) {
      splits = LoadGeoJsonZones(
          ctx.Input(Field<std::string>(entry, where, "zones", "")), grid.transform,
          Field<std::string>(entry, where, "zone_property", "split"));
      if (splits.empty()) throw ValidationError(where + ": zones file has no zones");
    } else {
      const PixelRect e = grid.Extent();
      splits["all"] = {Polygon::Create(Ring{{0.0, 0.0},
                                    {static_cast<double>(e.width), 0.0},
                                    {static_cast<double>(e.width),
                                     static_cast<double>(e.height)},
                                    {0.0, static_cast<double>(e.height)}})};
    }
    CensusAccumulator local;
    local.Add(splits, crowns, grid.gsd);
    pooled.Add(splits, crowns, grid.gsd);
    census_by_raster[name] = ToJson(local.Stats());

    for (const auto& [split, parts] : splits) {
      for (size_t k = 0; k < parts.size(); ++k) {
        TilingSpec part_spec = spec;
        part_spec.zone = entry.contains("zones") ? std::optional(parts[k]) : std::nullopt;
        const std::optional<BinaryMask> zone_mask =
            part_spec.zone ? std::optional(Rasterize(*part_spec.zone, grid.Extent()))
                           : std::nullopt;
        const std::vector<PlannedTile> plan = PlanTiles(grid, part_spec);
        const std::string prefix = parts.size() > 1 ? "p" + std::to_string(k) + "_" : "";
        const fs::path dir = fs::path("tiles") / split / name;
        fs::create_directories(ctx.out_dir() / dir);
        for (size_t start = 0; start < plan.size(); start += kBatch) {
          const size_t n = std::min(kBatch, plan.size() - start);
          std::vector<TileRecord> batch(n);
          ParallelFor(n, [&](size_t i) {
            const PlannedTile& p = plan[start + i];
            Tile tile = CutTile(source.color, p, zone_mask ? &*zone_mask : nullptr);
            if (source.alpha) {
              tile.validity = MaskAnd(tile.validity,
                                      source.alpha->Cropped(p.window).Translated(
                                          -p.window.x, -p.window.y));
            }
            TileRecord& r = batch[i];
            r.split = split;
            r.raster = name;
            r.id = prefix + p.id;
            r.window = p.window;
            r.file = (dir / (r.id + ".tif")).generic_string();
            r.valid_pixels = tile.validity.Count();
            r.annotations = ClipAnnotations(crowns, p.window,
                                            spec.min_annotation_area_ratio);
            const fs::path path = ctx.out_dir() / r.file;
            WriteGeoTiff(path, tile.pixels, &tile.validity,
                         ShiftedTransform(grid.transform, p.window.x, p.window.y),
                         grid.crs);
            r.sha256 = Sha256File(path);
          });
          for (TileRecord& r : batch) records.push_back(std::move(r));
        }
      }
    }
  }

  // COCO file per split and the tile manifest.
  std::map<std::string, std::vector<CocoTile>> coco;
  Json manifest = Json::array();
  for (const TileRecord& r : records) {
    auto& tiles = coco[r.split];
    CocoTile t;
    t.image.id = static_cast<int64_t>(tiles.size()) + 1;
    t.image.file_name = r.file;
    t.image.width = r.window.width;
    t.image.height = r.window.height;
    t.image.raster = r.raster;
    t.image.window = r.window;
    t.instances = r.annotations;
    tiles.push_back(std::move(t));
    manifest.push_back({{"tile_id", r.id},
                        {"raster", r.raster},
                        {"split", r.split},
                        {"window", WindowJson(r.window)},
                        {"file", r.file},
                        {"sha256", r.sha256},
                        {"valid_pixels", r.valid_pixels},
                        {"annotations", r.annotations.size()}});
  }
  Json split_files = Json::object();
  for (const auto& [split, tiles] : coco) {
    const std::string file = split + ".coco.json";
    ctx.WriteOutput(file, CanonicalJson(CocoToJson(tiles)));
    split_files[split] = {{"file", file}, {"tiles", tiles.size()}};
  }
  ctx.WriteOutput("tile_manifest.json", CanonicalJson({{"tiles", manifest}}));

  const auto census = pooled.Stats();
  Json report = {{"tiling", ToJson(spec)},
                 {"tiles", records.size()},
                 {"splits", split_files},
                 {"census", ToJson(census)},
                 {"census_by_raster", census_by_raster},
                 {"sizes", ToJson(pooled.All())}};
  std::ostringstream s;
  s << records.size() << " tiles, stride " << spec.Stride() << " px\n"
    << CensusText(census);
  ctx.Finish(report, s.str());
}

}  // namespace crowneval::cli
