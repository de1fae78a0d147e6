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
#include <memory>
#include <set>
#include <sstream>

#include "cli_context.h"
#include "crowneval/batch_backend.h"
#include "crowneval/config.h"
#include "crowneval/errors.h"
#include "crowneval/geojson_io.h"
#include "crowneval/pipeline.h"
#include "crowneval/random.h"
#include "crowneval/tiff_io.h"
#include "crowneval/tile_metrics.h"

namespace crowneval::cli {

namespace fs = std::filesystem;

namespace {

// Stream keys for seeds derived from the run seed.
enum : uint64_t { kSeedDetector = 1, kSeedSegmenter = 2, kSeedScenes = 3 };

std::vector<SceneRaster> LoadScenes(Context& ctx) {
  const Json& config = ctx.config();
  if (config.contains("scenes") == config.contains("rasters")) {
    throw ValidationError("give exactly one of \"scenes\" and \"rasters\"");
  }
  std::vector<SceneRaster> scenes;
  if (config.contains("scenes")) {
    const Json& j = config["scenes"];
    const SceneOptions options = ParseSceneOptions(j);
    const int64_t count = Field<int64_t>(j, "scenes", "count", 3);
    if (count < 1) throw ValidationError("scenes.count must be >= 1");
    const uint64_t seed = Field<uint64_t>(j, "scenes", "seed",
                                          DeriveSeed(ctx.seed(), {kSeedScenes}));
    for (int64_t i = 0; i < count; ++i) {
      scenes.push_back(MakeScene("scene" + std::to_string(i), options,
                                 DeriveSeed(seed, {static_cast<uint64_t>(i)})));
    }
    return scenes;
  }
  const Json& list = config["rasters"];
  if (!list.is_array() || list.empty()) {
    throw ValidationError("config.rasters must be a non-empty array");
  }
  std::set<std::string> names;
  for (size_t i = 0; i < list.size(); ++i) {
    const Json& entry = list[i];
    const std::string where = "rasters." + std::to_string(i);
    CheckKeys(entry, where, {"name", "raster", "gsd", "ground_truth"});
    SceneRaster s;
    s.name = RequiredField<std::string>(entry, where, "name");
    if (!names.insert(s.name).second) {
      throw ValidationError("duplicate raster name '" + s.name + "'");
    }
    const GeoRaster raster =
        ReadGeoTiff(ctx.Input(RequiredField<std::string>(entry, where, "raster")));
    const auto gsd = entry.contains("gsd")
                         ? std::optional(Field<double>(entry, where, "gsd", 0.0))
                         : std::nullopt;
    s.grid = GridFromTiff(raster.info, gsd);
    s.grid.Validate();
    s.image = raster.color;
    s.truths = LoadGroundTruth(
        ctx, RequiredField<std::string>(entry, where, "ground_truth"), s.grid, s.name);
    scenes.push_back(std::move(s));
  }
  return scenes;
}

BatchOptions ParseBatch(const Json& j, const std::string& where) {
  CheckKeys(j, where, {"kind", "dir", "timeout_ms", "poll_ms", "single_flight"});
  BatchOptions o;
  o.dir = RequiredField<std::string>(j, where, "dir");
  o.timeout = std::chrono::milliseconds(
      Field<int64_t>(j, where, "timeout_ms", o.timeout.count()));
  o.poll_interval = std::chrono::milliseconds(
      Field<int64_t>(j, where, "poll_ms", o.poll_interval.count()));
  o.single_flight = Field(j, where, "single_flight", o.single_flight);
  if (o.timeout.count() <= 0 || o.poll_interval.count() <= 0) {
    throw ValidationError(where + ": timeout_ms and poll_ms must be positive");
  }
  return o;
}

std::string Kind(const Json& j, const std::string& where) {
  const std::string kind = Field<std::string>(j, where, "kind", "oracle");
  if (kind != "oracle" && kind != "batch") {
    throw ValidationError(where + ".kind must be \"oracle\" or \"batch\"");
  }
  return kind;
}

std::unique_ptr<Detector> MakeDetector(Context& ctx,
                                       std::span<const SceneRaster> scenes) {
  const Json j = ctx.config().value("detector", Json::object());
  if (Kind(j, "detector") == "batch") {
    return std::make_unique<BatchDetector>(ParseBatch(j, "detector"));
  }
  return std::make_unique<OracleDetector>(
      TruthsByRaster(scenes), ParseDetectorNoise(j),
      Field<uint64_t>(j, "detector", "seed", DeriveSeed(ctx.seed(), {kSeedDetector})));
}

std::unique_ptr<BoxPromptSegmenter> MakeSegmenter(Context& ctx,
                                                  std::span<const SceneRaster> scenes) {
  const Json j = ctx.config().value("segmenter", Json::object());
  if (Kind(j, "segmenter") == "batch") {
    return std::make_unique<BatchSegmenter>(ParseBatch(j, "segmenter"));
  }
  return std::make_unique<OracleSegmenter>(
      TruthsByRaster(scenes), ParseSegmenterNoise(j),
      Field<uint64_t>(j, "segmenter", "seed",
                      DeriveSeed(ctx.seed(), {kSeedSegmenter})));
}

// Writes each raster (TIFF + ground-truth GeoJSON) and the per-tile
// predictions as COCO, in the forms eval-raster reads.
void Export(Context& ctx, std::span<const SceneRaster> scenes, const PipelineRun& run) {
  fs::create_directories(ctx.out_dir() / "rasters");
  for (const SceneRaster& s : scenes) {
    WriteGeoTiff(ctx.out_dir() / "rasters" / (s.name + ".tif"), s.image, nullptr,
                 s.grid.transform, s.grid.crs);
    SaveGeoJson(ctx.out_dir() / "rasters" / (s.name + ".geojson"), s.truths, s.grid);
  }
  std::vector<CocoTile> tiles;
  for (const RasterCase& rc : run.raster_cases) {
    for (const auto& [id, preds] : rc.tile_predictions) {
      CocoTile t;
      t.image.id = static_cast<int64_t>(tiles.size()) + 1;
      t.image.file_name = id;
      t.image.raster = rc.name;
      t.image.window = rc.layout.windows.at(id);
      t.image.width = t.image.window->width;
      t.image.height = t.image.window->height;
      t.instances = preds;
      tiles.push_back(std::move(t));
    }
  }
  ctx.WriteOutput("predictions.coco.json", CanonicalJson(CocoToJson(tiles)));
}

}  // namespace

void RunPipeline(Context& ctx) {
  const Json& config = ctx.config();
  CheckKeys(config, "config",
            {"seed", "scenes", "rasters", "detector", "segmenter", "tiling",
             "aggregation", "pipeline", "thresholds", "iou_kind", "max_detections",
             "export"});
  EndToEndConfig e2e;
  e2e.tiling = ParseTiling(config.value("tiling", Json::object()));
  e2e.aggregation = ParseAggregation(config.value("aggregation", Json::object()));
  e2e.pipeline = ParsePipelineConfig(config.value("pipeline", Json::object()));
  e2e.thresholds = ThresholdsFrom(config);
  e2e.tile_eval.iou_kind = IouKindFrom(config);
  e2e.raster_eval.iou_kind = e2e.tile_eval.iou_kind;
  const auto max_det = Field<int64_t>(config, "config", "max_detections",
                                      static_cast<int64_t>(e2e.tile_eval.max_detections));
  if (max_det < 1) throw ValidationError("config.max_detections must be >= 1");
  e2e.tile_eval.max_detections = static_cast<size_t>(max_det);
  const bool export_outputs = Field(config, "config", "export", false);

  const std::vector<SceneRaster> scenes = LoadScenes(ctx);
  const std::unique_ptr<Detector> detector = MakeDetector(ctx, scenes);
  const std::unique_ptr<BoxPromptSegmenter> segmenter = MakeSegmenter(ctx, scenes);

  const PipelineRun run = RunOnScenes(scenes, *detector, *segmenter, e2e);
  const TileMetrics tile = CocoSummary(run.tile_cases, e2e.thresholds, e2e.tile_eval);
  const RasterScore raster = EvaluateRasters(run.raster_cases, e2e.aggregation,
                                             e2e.thresholds, e2e.raster_eval);
  if (export_outputs) Export(ctx, scenes, run);

  Json names = Json::array();
  int64_t crowns = 0;
  for (const SceneRaster& s : scenes) {
    names.push_back(s.name);
    crowns += static_cast<int64_t>(s.truths.size());
  }
  Json report = {{"rasters", names},
                 {"crowns", crowns},
                 {"tiles", run.tile_cases.size()},
                 {"tiling", ToJson(e2e.tiling)},
                 {"aggregation", ToJson(e2e.aggregation)},
                 {"pipeline", ToJson(e2e.pipeline)},
                 {"stats", ToJson(run.stats)},
                 {"tile_metrics", ToJson(tile)},
                 {"raster_score", ToJson(raster)}};
  std::ostringstream s;
  s << scenes.size() << " rasters, " << crowns << " crowns, "
    << run.tile_cases.size() << " tiles, " << run.stats.instances
    << " instances\n"
    << "tile level\n"
    << TileMetricsText(tile) << "raster level\n"
    << RasterScoreText(raster);
  ctx.Finish(report, s.str());
}

}  // namespace crowneval::cli
