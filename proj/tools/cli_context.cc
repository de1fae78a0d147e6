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
#include "cli_context.h"

#include <chrono>
#include <ctime>
#include <set>

#include "crowneval/checksum.h"
#include "crowneval/config.h"
#include "crowneval/errors.h"
#include "crowneval/geojson_io.h"
#include "crowneval/tiff_io.h"

namespace crowneval::cli {

namespace fs = std::filesystem;

namespace {

std::string UtcNow() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool IsGeoJson(const std::string& path) {
  const std::string ext = fs::path(path).extension().string();
  return ext == ".geojson";
}

}  // namespace

Context::Context(std::string command, Json config, fs::path out_dir,
                 bool record_time, std::ostream& out)
    : command_(std::move(command)),
      config_(std::move(config)),
      out_dir_(std::move(out_dir)),
      record_time_(record_time),
      out_(out) {
  if (!config_.is_object()) throw ValidationError("config must be a JSON object");
  seed_ = Field<uint64_t>(config_, "config", "seed", 0);
}

fs::path Context::Input(const std::string& configured) {
  if (configured.empty()) throw ValidationError("empty input path");
  const fs::path path(configured);
  if (!fs::is_regular_file(path)) throw IoError("cannot read " + path.string());
  const std::string sum = Sha256File(path);
  if (expected_) {
    const auto it = expected_->find(configured);
    if (it != expected_->end() && it->second != sum) {
      throw ValidationError("input " + configured +
                            " differs from the recorded run (sha256 " + sum +
                            ", recorded " + it->second + ")");
    }
  }
  inputs_[configured] = sum;
  return path;
}

void Context::ExpectInputs(std::map<std::string, std::string> inputs) {
  expected_ = std::move(inputs);
}

void Context::WriteOutput(const std::string& name, std::string_view text) {
  WriteTextFile(out_dir_ / name, text);
}

void Context::Finish(Json report, const std::string& summary) {
  RunManifest manifest;
  manifest.command = command_;
  manifest.config = config_;
  manifest.inputs = inputs_;
  manifest.seed = seed_;
  if (record_time_) manifest.started_at = UtcNow();
  report["manifest"] = manifest.ToJson();
  report["command"] = command_;
  WriteOutput("report.json", CanonicalJson(report));
  WriteOutput("summary.txt", summary);
  out_ << summary;
}

RasterGrid LoadGrid(Context& ctx, const Json& entry, const std::string& where) {
  const auto gsd = entry.contains("gsd")
                       ? std::optional(Field<double>(entry, where, "gsd", 0.0))
                       : std::nullopt;
  if (entry.contains("raster")) {
    const fs::path path = ctx.Input(RequiredField<std::string>(entry, where, "raster"));
    RasterGrid grid = GridFromTiff(ReadTiffInfo(path), gsd);
    grid.Validate();
    return grid;
  }
  if (!entry.contains("grid")) {
    throw ValidationError(where + " needs \"raster\" or \"grid\"");
  }
  const Json& g = entry["grid"];
  const std::string gw = where + ".grid";
  CheckKeys(g, gw, {"width", "height", "gsd", "transform", "crs"});
  RasterGrid grid;
  grid.width = RequiredField<int64_t>(g, gw, "width");
  grid.height = RequiredField<int64_t>(g, gw, "height");
  grid.gsd = RequiredField<double>(g, gw, "gsd");
  if (gsd) grid.gsd = *gsd;
  grid.crs = Field<std::string>(g, gw, "crs", "");
  if (g.contains("transform")) {
    grid.transform =
        GeoTransform(Field<std::array<double, 6>>(g, gw, "transform", {}));
  } else {
    // Pixel coordinates scaled to meters, y pointing down.
    grid.transform = GeoTransform({0.0, grid.gsd, 0.0, 0.0, 0.0, grid.gsd});
  }
  grid.Validate();
  return grid;
}

std::vector<CrownInstance> LoadGroundTruth(Context& ctx, const std::string& path,
                                           const RasterGrid& grid,
                                           const std::string& raster) {
  const fs::path file = ctx.Input(path);
  std::vector<CrownInstance> out;
  if (IsGeoJson(path)) {
    out = LoadGeoJson(file, grid);
  } else {
    // A COCO document with one image covering the raster.
    const std::vector<CocoTile> tiles = LoadCoco(file);
    const CocoTile* match = nullptr;
    for (const CocoTile& t : tiles) {
      if (t.image.raster == raster || (tiles.size() == 1 && t.image.raster.empty())) {
        if (match) {
          throw ValidationError(path + ": several images for raster '" + raster + "'");
        }
        match = &t;
      }
    }
    if (!match) throw ValidationError(path + ": no image for raster '" + raster + "'");
    const PixelRect w = match->image.window.value_or(grid.Extent());
    for (const CrownInstance& c : match->instances) {
      if (c.source.kind == SourceKind::kPrediction) {
        throw ValidationError(path + ": ground truth carries scores");
      }
      out.push_back(Translated(c, w.x, w.y));
    }
  }
  DeriveAreas(out, grid.gsd);
  return out;
}

RasterPredictions LoadRasterPredictions(Context& ctx, const std::string& path,
                                        const RasterGrid& grid,
                                        const std::string& raster) {
  const std::vector<CocoTile> tiles = LoadCoco(ctx.Input(path));
  RasterPredictions out;
  out.layout.raster_extent = grid.Extent();
  for (const CocoTile& t : tiles) {
    if (t.image.raster != raster) continue;
    const std::string id = t.image.file_name.empty()
                               ? "image" + std::to_string(t.image.id)
                               : t.image.file_name;
    const PixelRect w = t.image.window.value_or(grid.Extent());
    if (!out.layout.windows.emplace(id, w).second) {
      throw ValidationError(path + ": duplicate tile '" + id + "'");
    }
    auto& preds = out.tiles[id];
    for (CrownInstance c : t.instances) {
      c.source.kind = SourceKind::kPrediction;
      preds.push_back(std::move(c));
    }
  }
  if (out.layout.windows.empty()) {
    throw ValidationError(path + ": no images for raster '" + raster + "'");
  }
  return out;
}

ThresholdSet ThresholdsFrom(const Json& config) {
  return config.contains("thresholds") ? ParseThresholds(config["thresholds"])
                                       : ThresholdSet::Coco();
}

IouKind IouKindFrom(const Json& config) {
  return config.contains("iou_kind") ? ParseIouKindJson(config["iou_kind"])
                                     : IouKind::kMask;
}

}  // namespace crowneval::cli
