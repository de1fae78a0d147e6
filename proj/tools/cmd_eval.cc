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
#include "crowneval/config.h"
#include "crowneval/errors.h"
#include "crowneval/tile_metrics.h"

namespace crowneval::cli {

namespace {

std::vector<RasterCase> LoadRasterCases(Context& ctx) {
  const Json& config = ctx.config();
  if (!config.contains("rasters") || !config["rasters"].is_array() ||
      config["rasters"].empty()) {
    throw ValidationError("config.rasters must be a non-empty array");
  }
  std::vector<RasterCase> cases;
  std::set<std::string> names;
  for (size_t i = 0; i < config["rasters"].size(); ++i) {
    const Json& entry = config["rasters"][i];
    const std::string where = "rasters." + std::to_string(i);
    CheckKeys(entry, where,
              {"name", "raster", "grid", "gsd", "ground_truth", "predictions"});
    RasterCase rc;
    rc.name = RequiredField<std::string>(entry, where, "name");
    if (!names.insert(rc.name).second) {
      throw ValidationError("duplicate raster name '" + rc.name + "'");
    }
    const RasterGrid grid = LoadGrid(ctx, entry, where);
    rc.gsd = grid.gsd;
    rc.ground_truths = LoadGroundTruth(
        ctx, RequiredField<std::string>(entry, where, "ground_truth"), grid, rc.name);
    RasterPredictions preds = LoadRasterPredictions(
        ctx, RequiredField<std::string>(entry, where, "predictions"), grid, rc.name);
    rc.layout = std::move(preds.layout);
    rc.tile_predictions = std::move(preds.tiles);
    cases.push_back(std::move(rc));
  }
  return cases;
}

AggregationConfig AggregationFrom(Context& ctx) {
  const Json& config = ctx.config();
  if (config.contains("aggregation_file")) {
    if (config.contains("aggregation")) {
      throw ValidationError("give either aggregation or aggregation_file");
    }
    const Json doc = ReadJsonFile(
        ctx.Input(Field<std::string>(config, "config", "aggregation_file", "")));
    if (!doc.is_object() || !doc.contains("aggregation")) {
      throw ValidationError("aggregation_file lacks an \"aggregation\" object");
    }
    return ParseAggregation(doc["aggregation"]);
  }
  return ParseAggregation(config.value("aggregation", Json::object()));
}

}  // namespace

void RunEvalTiles(Context& ctx) {
  const Json& config = ctx.config();
  CheckKeys(config, "config",
            {"seed", "ground_truth", "predictions", "gsd", "gsd_by_raster",
             "thresholds", "iou_kind", "max_detections"});
  const std::vector<CocoTile> gt =
      LoadCoco(ctx.Input(RequiredField<std::string>(config, "config", "ground_truth")));
  const Json pred_doc = ReadJsonFile(
      ctx.Input(RequiredField<std::string>(config, "config", "predictions")));
  std::vector<CocoImage> images;
  for (const CocoTile& t : gt) images.push_back(t.image);
  const std::vector<CocoTile> preds =
      pred_doc.is_array() ? ParseCocoResults(pred_doc, images) : ParseCoco(pred_doc);

  const auto default_gsd = config.contains("gsd")
                               ? std::optional(Field<double>(config, "config", "gsd", 0.0))
                               : std::nullopt;
  const auto by_raster = Field<std::map<std::string, double>>(
      config, "config", "gsd_by_raster", {});
  auto tile_id = [](const CocoImage& img) {
    return img.file_name.empty() ? "image" + std::to_string(img.id) : img.file_name;
  };

  std::map<std::string, size_t> index;
  std::vector<TileCase> cases;
  for (const CocoTile& t : gt) {
    TileCase tc;
    tc.id = tile_id(t.image);
    const auto it = by_raster.find(t.image.raster);
    if (it != by_raster.end()) {
      tc.gsd = it->second;
    } else if (default_gsd) {
      tc.gsd = *default_gsd;
    } else {
      throw ValidationError("no gsd for tile '" + tc.id + "' (raster '" +
                            t.image.raster + "')");
    }
    tc.ground_truths = t.instances;
    if (!index.emplace(tc.id, cases.size()).second) {
      throw ValidationError("duplicate tile '" + tc.id + "'");
    }
    cases.push_back(std::move(tc));
  }
  for (const CocoTile& t : preds) {
    const auto it = index.find(tile_id(t.image));
    if (it == index.end()) {
      throw ValidationError("predictions for unknown tile '" + tile_id(t.image) + "'");
    }
    for (CrownInstance c : t.instances) {
      c.source.kind = SourceKind::kPrediction;
      cases[it->second].predictions.push_back(std::move(c));
    }
  }
  TileEvalOptions options;
  options.iou_kind = IouKindFrom(config);
  const auto max_det = Field<int64_t>(config, "config", "max_detections",
                                      static_cast<int64_t>(options.max_detections));
  if (max_det < 1) throw ValidationError("config.max_detections must be >= 1");
  options.max_detections = static_cast<size_t>(max_det);

  const TileMetrics metrics = CocoSummary(cases, ThresholdsFrom(config), options);
  Json report = {{"tiles", cases.size()}, {"metrics", ToJson(metrics)}};
  ctx.Finish(report, TileMetricsText(metrics));
}

void RunEvalRaster(Context& ctx) {
  CheckKeys(ctx.config(), "config",
            {"seed", "rasters", "aggregation", "aggregation_file", "thresholds",
             "iou_kind"});
  const AggregationConfig aggregation = AggregationFrom(ctx);
  const std::vector<RasterCase> cases = LoadRasterCases(ctx);
  const ThresholdSet thresholds = ThresholdsFrom(ctx.config());
  RasterEvalOptions options;
  options.iou_kind = IouKindFrom(ctx.config());

  const RasterScore pooled = EvaluateRasters(cases, aggregation, thresholds, options);
  Json per_raster = Json::object();
  for (const RasterCase& rc : cases) {
    per_raster[rc.name] = ToJson(EvaluateRasters(std::span(&rc, 1), aggregation,
                                                 thresholds, options));
  }
  Json report = {{"aggregation", ToJson(aggregation)},
                 {"score", ToJson(pooled)},
                 {"per_raster", per_raster}};
  ctx.Finish(report, RasterScoreText(pooled));
}

void RunOptimizeThresholds(Context& ctx) {
  const Json& config = ctx.config();
  CheckKeys(config, "config",
            {"seed", "rasters", "aggregation", "thresholds", "iou_kind", "grid",
             "objective"});
  const AggregationConfig base =
      ParseAggregation(config.value("aggregation", Json::object()));
  const ThresholdGrid grid = config.contains("grid")
                                 ? ParseThresholdGrid(config["grid"])
                                 : ThresholdGrid::Default();
  const Objective objective = config.contains("objective")
                                  ? ParseObjectiveJson(config["objective"])
                                  : Objective::kMrf1;
  const std::vector<RasterCase> cases = LoadRasterCases(ctx);
  RasterEvalOptions options;
  options.iou_kind = IouKindFrom(config);

  const OptimizationResult result = OptimizeThresholds(
      cases, grid, base, objective, ThresholdsFrom(config), options);
  ctx.WriteOutput("audit.csv", AuditCsv(result.audit, base.filter_order));
  const Json best = {{"aggregation", ToJson(result.best)},
                     {"objective", ObjectiveName(objective)},
                     {"best", ToJson(result.best_cell)}};
  ctx.WriteOutput("best_aggregation.json", CanonicalJson(best));

  std::ostringstream s;
  s << "objective " << ObjectiveName(objective) << "  best nms_iou "
    << FormatNumber(result.best.nms_iou) << "  confidence "
    << FormatNumber(result.best.confidence_threshold) << "\n"
    << "mRF1 " << FormatPercent(result.best_cell.mrf1) << "  RF1_50 "
    << FormatPercent(result.best_cell.rf1_50) << "  RF1_75 "
    << FormatPercent(result.best_cell.rf1_75) << "\n";
  Json report = {{"aggregation", ToJson(result.best)},
                 {"best", ToJson(result.best_cell)},
                 {"grid", ToJson(grid)},
                 {"objective", ObjectiveName(objective)},
                 {"grid_cells", result.audit.size()}};
  ctx.Finish(report, s.str());
}

}  // namespace crowneval::cli
