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
#include <algorithm>
#include <sstream>

#include "cli_context.h"
#include "crowneval/agreement.h"
#include "crowneval/config.h"
#include "crowneval/errors.h"
#include "crowneval/geojson_io.h"

namespace crowneval::cli {

namespace fs = std::filesystem;

namespace {

// Site entries for a dataset directory (see crowneval/dataset.h for the
// layout): one per subdirectory of <root>/agreement.
Json DatasetSites(const std::string& root) {
  const fs::path base = fs::path(root) / "agreement";
  if (!fs::is_directory(base)) throw IoError("no agreement data at " + base.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(base)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  Json sites = Json::array();
  for (const fs::path& dir : dirs) {
    const std::string name = dir.filename().string();
    Json annotators = Json::object();
    for (const auto& f : fs::directory_iterator(dir)) {
      if (f.path().extension() == ".geojson" && f.path().filename() != "region.geojson") {
        annotators[f.path().stem().string()] = f.path().string();
      }
    }
    sites.push_back({{"name", name},
                     {"raster", (fs::path(root) / name / "orthomosaic.tif").string()},
                     {"region", (dir / "region.geojson").string()},
                     {"annotators", annotators}});
  }
  if (sites.empty()) throw IoError("no agreement sites under " + base.string());
  return sites;
}

AgreementSite LoadSite(Context& ctx, const Json& entry, const std::string& where,
                       const std::string& default_name) {
  CheckKeys(entry, where, {"name", "raster", "grid", "gsd", "region", "annotators"});
  AgreementSite site;
  site.name = Field<std::string>(entry, where, "name", default_name);
  const RasterGrid grid = LoadGrid(ctx, entry, where);
  site.gsd = grid.gsd;
  const Polygon region = [&] {
    if (!entry.contains("region")) {
      const double w = static_cast<double>(grid.width);
      const double h = static_cast<double>(grid.height);
      return Polygon::Create({{0, 0}, {w, 0}, {w, h}, {0, h}});
    }
    const std::string path = Field<std::string>(entry, where, "region", "");
    const std::vector<GeoFeature> features =
        ParseGeoJsonFeatures(ReadJsonFile(ctx.Input(path)), grid.transform);
    if (features.size() != 1) {
      throw ValidationError(path + ": expected one region polygon, got " +
                            std::to_string(features.size()));
    }
    return features[0].polygon;
  }();
  const auto annotators =
      Field<std::map<std::string, std::string>>(entry, where, "annotators", {});
  for (const auto& [who, path] : annotators) {
    std::vector<CrownInstance> crowns = LoadGeoJson(ctx.Input(path), grid);
    for (CrownInstance& c : crowns) {
      c.source.kind = SourceKind::kAnnotator;
      c.source.annotator = who;
    }
    site.sets.push_back({who, std::move(crowns), region});
  }
  return site;
}

}  // namespace

void RunAgreement(Context& ctx) {
  const Json& config = ctx.config();
  CheckKeys(config, "config",
            {"seed", "dataset", "sites", "name", "raster", "grid", "gsd", "region",
             "annotators", "thresholds", "iou_kind", "overlap_epsilon"});
  const int modes = config.contains("dataset") + config.contains("sites") +
                    config.contains("annotators");
  if (modes != 1) {
    throw ValidationError(
        "give exactly one of \"dataset\", \"sites\" or a single site's \"annotators\"");
  }
  std::vector<AgreementSite> sites;
  if (config.contains("annotators")) {
    Json entry = Json::object();
    for (const char* key : {"name", "raster", "grid", "gsd", "region", "annotators"}) {
      if (config.contains(key)) entry[key] = config[key];
    }
    sites.push_back(LoadSite(ctx, entry, "config", "site"));
  } else {
    const Json entries = config.contains("dataset")
                             ? DatasetSites(Field<std::string>(config, "config",
                                                               "dataset", ""))
                             : config["sites"];
    if (!entries.is_array() || entries.empty()) {
      throw ValidationError("config.sites must be a non-empty array");
    }
    for (size_t i = 0; i < entries.size(); ++i) {
      sites.push_back(LoadSite(ctx, entries[i], "sites." + std::to_string(i),
                               "site" + std::to_string(i)));
    }
  }
  AgreementOptions options;
  options.thresholds = ThresholdsFrom(config);
  options.iou_kind = IouKindFrom(config);
  options.overlap_epsilon =
      Field(config, "config", "overlap_epsilon", options.overlap_epsilon);

  const std::vector<AgreementEntry> entries = PooledAgreementMatrix(sites, options);
  Json site_names = Json::array();
  for (const AgreementSite& s : sites) site_names.push_back(s.name);
  Json report = {{"sites", site_names}, {"matrix", ToJson(std::span(entries))}};
  ctx.Finish(report, AgreementText(entries));
}

}  // namespace crowneval::cli
