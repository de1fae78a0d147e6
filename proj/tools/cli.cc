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
#include "cli.h"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_context.h"
#include "crowneval/config.h"
#include "crowneval/errors.h"
#include "crowneval/report.h"

namespace crowneval::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  bool record_time = false;
};

struct Command {
  const char* name;
  const char* help;
  void (*run)(Context&);
};

constexpr Command kCommands[] = {
    {"tile", "cut rasters into zone-masked tiles with COCO annotations", RunTile},
    {"eval-tiles", "COCO-style tile metrics (mAP, mAR) per size class", RunEvalTiles},
    {"eval-raster", "raster-level mRF1 after NMS aggregation of tile predictions",
     RunEvalRaster},
    {"optimize-thresholds", "grid search of NMS IoU and confidence thresholds",
     RunOptimizeThresholds},
    {"agreement", "pairwise inter-annotator agreement matrix", RunAgreement},
    {"pipeline-run", "detector -> box prompts -> segmenter over tiled rasters",
     RunPipeline},
};

bool LooksLikeManifest(const Json& j) {
  return j.is_object() && j.contains("command") && j.contains("config") &&
         j.contains("tool_version");
}

int Execute(const Command& command, const CommonFlags& flags, std::ostream& out) {
  Json doc = ReadJsonFile(flags.config);
  std::optional<RunManifest> recorded;
  if (doc.is_object() && doc.contains("manifest") && LooksLikeManifest(doc["manifest"])) {
    recorded = RunManifest::FromJson(doc["manifest"]);
  } else if (LooksLikeManifest(doc)) {
    recorded = RunManifest::FromJson(doc);
  }
  if (recorded) {
    if (recorded->command != command.name) {
      throw ValidationError(flags.config + " records command '" + recorded->command +
                            "', not '" + command.name + "'");
    }
    doc = recorded->config;
  }
  Json config = ApplyOverrides(std::move(doc), flags.overrides);
  std::error_code ec;
  fs::create_directories(flags.out, ec);
  if (ec) throw IoError("cannot create output directory " + flags.out);
  Context ctx(command.name, std::move(config), flags.out, flags.record_time, out);
  if (recorded) ctx.ExpectInputs(recorded->inputs);
  command.run(ctx);
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tree-crown instance segmentation evaluation toolkit", "crowneval"};
  app.set_version_flag("--version", std::string(ToolVersion()));
  app.require_subcommand(1);
  CommonFlags flags;
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("-c,--config", flags.config,
                    "JSON config, or a report/manifest of an earlier run to repeat")
        ->required();
    sub->add_option("--set", flags.overrides,
                    "override a config value: dotted.key=value (repeatable)");
    sub->add_option("-o,--out", flags.out, "output directory")->required();
    sub->add_flag("--record-time", flags.record_time,
                  "record the start time in the manifest (reports then differ per run)");
    subs[c.name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? e.what() : app.help())
          << "\n";
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  for (const Command& c : kCommands) {
    if (!subs[c.name]->parsed()) continue;
    try {
      return Execute(c, flags, out);
    } catch (const ValidationError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const IoError& e) {
      err << "I/O error: " << e.what() << "\n";
      return kExitIo;
    } catch (const fs::filesystem_error& e) {
      err << "I/O error: " << e.what() << "\n";
      return kExitIo;
    }
  }
  return kExitValidation;
}

}  // namespace crowneval::cli
