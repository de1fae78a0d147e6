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
#include "crowneval/dataset.h"

#include <algorithm>

#include "crowneval/errors.h"
#include "crowneval/geojson_io.h"
#include "crowneval/tiff_io.h"

namespace crowneval {

namespace fs = std::filesystem;

namespace {

constexpr char kOrthomosaic[] = "orthomosaic.tif";
constexpr char kAgreementDir[] = "agreement";

RasterGrid SiteGrid(const fs::path& dir) {
  return GridFromTiff(ReadTiffInfo(dir / kOrthomosaic));
}

void RequireFile(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("missing file " + path.string());
}

}  // namespace

std::vector<DatasetSite> ListDatasetSites(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("no dataset at " + root.string());
  std::vector<DatasetSite> sites;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory() || entry.path().filename() == kAgreementDir) continue;
    if (!fs::is_regular_file(entry.path() / kOrthomosaic)) continue;
    sites.push_back({entry.path().filename().string(), entry.path(),
                     SiteGrid(entry.path())});
  }
  std::sort(sites.begin(), sites.end(),
            [](const DatasetSite& a, const DatasetSite& b) { return a.name < b.name; });
  if (sites.empty()) throw IoError("no sites under " + root.string());
  return sites;
}

DatasetCensus CensusDataset(const fs::path& root) {
  DatasetCensus out;
  CensusAccumulator pooled;
  for (const DatasetSite& site : ListDatasetSites(root)) {
    RequireFile(site.dir / "crowns.geojson");
    RequireFile(site.dir / "splits.geojson");
    const std::vector<CrownInstance> crowns =
        LoadGeoJson(site.dir / "crowns.geojson", site.grid);
    const auto splits =
        LoadGeoJsonZones(site.dir / "splits.geojson", site.grid.transform, "split");
    CensusAccumulator local;
    local.Add(splits, crowns, site.grid.gsd);
    pooled.Add(splits, crowns, site.grid.gsd);
    out.per_site[site.name] = local.Stats();
  }
  out.splits = pooled.Stats();
  out.all = pooled.All();
  return out;
}

std::vector<AgreementSite> LoadAgreementSites(const fs::path& root) {
  const fs::path base = root / kAgreementDir;
  if (!fs::is_directory(base)) throw IoError("no agreement data at " + base.string());
  std::vector<AgreementSite> sites;
  for (const auto& entry : fs::directory_iterator(base)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    const RasterGrid grid = SiteGrid(root / name);
    const fs::path region_path = entry.path() / "region.geojson";
    RequireFile(region_path);
    const std::vector<GeoFeature> region =
        ParseGeoJsonFeatures(ReadJsonFile(region_path), grid.transform);
    if (region.size() != 1) {
      throw ValidationError(region_path.string() + ": expected one polygon, got " +
                            std::to_string(region.size()));
    }
    AgreementSite site{name, grid.gsd, {}};
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(entry.path())) {
      if (f.path().extension() == ".geojson" && f.path().filename() != "region.geojson") {
        files.push_back(f.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      site.sets.push_back({f.stem().string(), LoadGeoJson(f, grid), region[0].polygon});
    }
    sites.push_back(std::move(site));
  }
  std::sort(sites.begin(), sites.end(),
            [](const AgreementSite& a, const AgreementSite& b) { return a.name < b.name; });
  if (sites.empty()) throw IoError("no agreement sites under " + base.string());
  return sites;
}

}  // namespace crowneval
