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
#ifndef CROWNEVAL_REPORT_H_
#define CROWNEVAL_REPORT_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowneval/agreement.h"
#include "crowneval/io_util.h"
#include "crowneval/pipeline.h"
#include "crowneval/raster_metrics.h"
#include "crowneval/tile_metrics.h"
#include "crowneval/tiler.h"

namespace crowneval {

std::string_view ToolVersion();

// Everything needed to rerun a command: the effective configuration (after
// overrides), checksums of every input file, the seed and the tool version.
// The start time is recorded only on request so that reruns compare equal.
struct RunManifest {
  std::string command;
  Json config;
  std::map<std::string, std::string> inputs;  // path as configured -> sha256
  uint64_t seed = 0;
  std::string tool_version{ToolVersion()};
  std::optional<std::string> started_at;

  Json ToJson() const;
  static RunManifest FromJson(const Json& j);
};

Json ToJson(const TileMetrics& m);
Json ToJson(const RasterF1& f);
Json ToJson(const RasterScore& s);
Json ToJson(const PipelineStats& s);
Json ToJson(const SizeDistribution& d);
Json ToJson(const std::map<std::string, SplitStats>& census);
Json ToJson(std::span<const AgreementEntry> entries);
Json ToJson(const GridCell& cell);

// Shortest decimal that round-trips.
std::string FormatNumber(double v);
// Percent with one decimal ("57.3"); "-" when absent.
std::string FormatPercent(std::optional<double> v);

// nms_iou,confidence,mrf1,rf1_50,rf1_75,filter_mode
std::string AuditCsv(std::span<const GridCell> audit, FilterOrder mode);

// Human-readable summaries in percent.
std::string TileMetricsText(const TileMetrics& m);
std::string RasterScoreText(const RasterScore& s);
std::string AgreementText(std::span<const AgreementEntry> entries);
std::string CensusText(const std::map<std::string, SplitStats>& census);

}  // namespace crowneval

#endif  // CROWNEVAL_REPORT_H_
