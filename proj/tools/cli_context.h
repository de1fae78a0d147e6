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
#ifndef CROWNEVAL_TOOLS_CLI_CONTEXT_H_
#define CROWNEVAL_TOOLS_CLI_CONTEXT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "crowneval/coco_io.h"
#include "crowneval/crown.h"
#include "crowneval/io_util.h"
#include "crowneval/raster_grid.h"
#include "crowneval/raster_metrics.h"
#include "crowneval/report.h"

namespace crowneval::cli {

// State shared by one command run. Relative input paths are resolved against
// the working directory and recorded as written in the configuration.
class Context {
 public:
  Context(std::string command, Json config, std::filesystem::path out_dir,
          bool record_time, std::ostream& out);

  const std::string& command() const { return command_; }
  const Json& config() const { return config_; }
  uint64_t seed() const { return seed_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }
  std::ostream& out() { return out_; }

  // Checksums the file and records it in the manifest. When rerunning from a
  // recorded manifest, a checksum that differs is a ValidationError.
  std::filesystem::path Input(const std::string& configured);
  void ExpectInputs(std::map<std::string, std::string> inputs);

  // Writes `name` under the output directory (atomically).
  void WriteOutput(const std::string& name, std::string_view text);

  // report.json (with the manifest under "manifest") and summary.txt; the
  // summary is echoed to the output stream.
  void Finish(Json report, const std::string& summary);

 private:
  std::string command_;
  Json config_;
  std::filesystem::path out_dir_;
  bool record_time_;
  std::ostream& out_;
  uint64_t seed_ = 0;
  std::map<std::string, std::string> inputs_;
  std::optional<std::map<std::string, std::string>> expected_;
};

// Reader helpers shared by the commands. `where` names the config section in
// error messages.
RasterGrid LoadGrid(Context& ctx, const Json& entry, const std::string& where);
std::vector<CrownInstance> LoadGroundTruth(Context& ctx, const std::string& path,
                                           const RasterGrid& grid,
                                           const std::string& raster);

// Predictions of one raster from a COCO file whose images carry the raster
// name and their window. An image without a window covers the whole raster.
struct RasterPredictions {
  TileLayout layout;
  TilePredictions tiles;
};
RasterPredictions LoadRasterPredictions(Context& ctx, const std::string& path,
                                        const RasterGrid& grid,
                                        const std::string& raster);

ThresholdSet ThresholdsFrom(const Json& config);
IouKind IouKindFrom(const Json& config);

// Command entry points.
void RunTile(Context& ctx);
void RunEvalTiles(Context& ctx);
void RunEvalRaster(Context& ctx);
void RunOptimizeThresholds(Context& ctx);
void RunAgreement(Context& ctx);
void RunPipeline(Context& ctx);

}  // namespace crowneval::cli

#endif  // CROWNEVAL_TOOLS_CLI_CONTEXT_H_
