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
#ifndef CROWNEVAL_DATASET_H_
#define CROWNEVAL_DATASET_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "crowneval/agreement.h"
#include "crowneval/raster_grid.h"
#include "crowneval/tiler.h"

namespace crowneval {

// Ingestion of a benchmark stored locally as
//
//   <root>/<site>/orthomosaic.tif      georeferenced; supplies grid and GSD
//   <root>/<site>/crowns.geojson       one polygon feature per crown
//   <root>/<site>/splits.geojson       zone polygons with a "split" property;
//                                      a split may have several features
//   <root>/agreement/<site>/region.geojson     one polygon
//   <root>/agreement/<site>/<annotator>.geojson
//
// Every layout assumption lives in this module.
struct DatasetSite {
  std::string name;
  std::filesystem::path dir;
  RasterGrid grid;
};

// Sites in name order; a site is any subdirectory holding orthomosaic.tif.
std::vector<DatasetSite> ListDatasetSites(const std::filesystem::path& root);

struct DatasetCensus {
  // Pooled over sites; crowns outside every zone are under "unassigned".
  std::map<std::string, SplitStats> splits;
  std::map<std::string, std::map<std::string, SplitStats>> per_site;
  SizeDistribution all;  // every crown of every site
};

DatasetCensus CensusDataset(const std::filesystem::path& root);

// Annotation sets of <root>/agreement, each site using the grid of the
// matching orthomosaic.
std::vector<AgreementSite> LoadAgreementSites(const std::filesystem::path& root);

}  // namespace crowneval

#endif  // CROWNEVAL_DATASET_H_
