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
#include "crowneval/batch_backend.h"

#include <unistd.h>

#include <system_error>
#include <thread>

#include "crowneval/coco_io.h"
#include "crowneval/errors.h"
#include "crowneval/io_util.h"
#include "crowneval/rle.h"
#include "crowneval/tiff_io.h"

namespace crowneval {

namespace fs = std::filesystem;

namespace {

std::atomic<uint64_t> g_job_counter{0};

Json BoxJson(const Box& b) { return Json::array({b.x0, b.y0, b.x1, b.y1}); }

Box BoxFromJson(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) throw ValidationError("box must be [x0, y0, x1, y1]");
  return {v[0], v[1], v[2], v[3]};
}

// Writes the tile and request, waits for the result, cleans up.
Json Exchange(const BatchOptions& options, const TileView& tile,
              const std::string& kind, Json request) {
  const fs::path job =
      options.dir / (kind + "-" + std::to_string(::getpid()) + "-" +
                     std::to_string(g_job_counter.fetch_add(1)));
  std::error_code ec;
  fs::create_directories(job, ec);
  if (ec) throw IoError("cannot create job directory " + job.string());
  Image color = tile.pixels;
  if (color.channels == 4 || color.channels == 2) {
    // Drop an existing alpha channel; validity supplies the new one.
    Image stripped(color.width, color.height, color.channels - 1);
    for (int64_t i = 0; i < color.width * color.height; ++i) {
      std::copy_n(color.pixels.data() + i * color.channels, stripped.channels,
                  stripped.pixels.data() + i * stripped.channels);
    }
    color = std::move(stripped);
  }
  WriteGeoTiff(job / "tile.tif", color, &tile.validity, std::nullopt, "");
  request["protocol"] = 1;
  request["kind"] = kind;
  request["tile"] = "tile.tif";
  request["raster"] = std::string(tile.raster);
  request["tile_id"] = std::string(tile.tile_id);
  request["window"] = {tile.window.x, tile.window.y, tile.window.width,
                       tile.window.height};
  WriteTextFile(job / "request.json", CanonicalJson(request));

  const fs::path result = job / "result.json";
  const auto deadline = std::chrono::steady_clock::now() + options.timeout;
  while (!fs::exists(result)) {
    if (std::chrono::steady_clock::now() > deadline) {
      throw IoError("backend timed out on " + job.string());
    }
    std::this_thread::sleep_for(options.poll_interval);
  }
  Json reply = ReadJsonFile(result);
  fs::remove_all(job, ec);
  if (reply.contains("error")) {
    throw IoError("backend error for " + std::string(tile.tile_id) + ": " +
                  reply["error"].dump());
  }
  return reply;
}

}  // namespace

BatchDetector::BatchDetector(BatchOptions options) : options_(std::move(options)) {}

std::vector<Detection> BatchDetector::Detect(const TileView& tile) {
  const Json reply = Exchange(options_, tile, "detect", Json::object());
  std::vector<Detection> out;
  try {
    for (const Json& d : reply.at("detections")) {
      out.push_back({BoxFromJson(d.at("box")), d.at("score").get<double>()});
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed detector result: ") + e.what());
  }
  return out;
}

BatchSegmenter::BatchSegmenter(BatchOptions options)
    : options_(std::move(options)) {}

std::vector<SegmentedMask> BatchSegmenter::Segment(const TileView& tile,
                                                   std::span<const Box> prompts) {
  Json boxes = Json::array();
  for (const Box& b : prompts) boxes.push_back(BoxJson(b));
  const Json reply = Exchange(options_, tile, "segment", {{"prompts", boxes}});
  std::vector<SegmentedMask> out;
  try {
    for (const Json& m : reply.at("masks")) {
      out.push_back({DecodeRle(ParseRleJson(m.at("segmentation"))),
                     m.at("score").get<double>()});
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed segmenter result: ") + e.what());
  }
  return out;
}

BatchResponder::BatchResponder(fs::path dir, Detector* detector,
                               BoxPromptSegmenter* segmenter)
    : dir_(std::move(dir)), detector_(detector), segmenter_(segmenter) {}

size_t BatchResponder::ServeOnce() {
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) return 0;
  std::vector<fs::path> jobs;
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    if (entry.is_directory() && fs::exists(entry.path() / "request.json") &&
        !fs::exists(entry.path() / "result.json")) {
      jobs.push_back(entry.path());
    }
  }
  std::sort(jobs.begin(), jobs.end());
  for (const fs::path& job : jobs) {
    Json reply;
    try {
      const Json req = ReadJsonFile(job / "request.json");
      const GeoRaster tile = ReadGeoTiff(job / req.at("tile").get<std::string>());
      const auto w = req.at("window").get<std::vector<int64_t>>();
      const BinaryMask validity =
          tile.alpha ? *tile.alpha
                     : BinaryMask(PixelRect{0, 0, tile.color.width,
                                            tile.color.height},
                                  std::vector<uint8_t>(tile.color.pixels.size() /
                                                           tile.color.channels,
                                                       1));
      const std::string raster = req.at("raster").get<std::string>();
      const std::string tile_id = req.at("tile_id").get<std::string>();
      const TileView view{raster, tile_id, PixelRect{w.at(0), w.at(1), w.at(2), w.at(3)},
                          tile.color, validity};
      const std::string kind = req.at("kind").get<std::string>();
      if (kind == "detect" && detector_) {
        Json dets = Json::array();
        for (const Detection& d : detector_->Detect(view)) {
          dets.push_back({{"box", BoxJson(d.box)}, {"score", d.score}});
        }
        reply = {{"detections", dets}};
      } else if (kind == "segment" && segmenter_) {
        std::vector<Box> prompts;
        for (const Json& b : req.at("prompts")) prompts.push_back(BoxFromJson(b));
        Json masks = Json::array();
        const PixelRect frame{0, 0, tile.color.width, tile.color.height};
        for (const SegmentedMask& m : segmenter_->Segment(view, prompts)) {
          masks.push_back({{"segmentation", RleToJson(EncodeRle(m.mask, frame))},
                           {"score", m.score}});
        }
        reply = {{"masks", masks}};
      } else {
        reply = {{"error", "no model for request kind '" + kind + "'"}};
      }
    } catch (const std::exception& e) {
      reply = {{"error", e.what()}};
    }
    WriteTextFile(job / "result.json", CanonicalJson(reply));
  }
  return jobs.size();
}

void BatchResponder::ServeUntil(const std::atomic<bool>& stop,
                                std::chrono::milliseconds poll) {
  while (!stop.load()) {
    if (ServeOnce() == 0) std::this_thread::sleep_for(poll);
  }
}

}  // namespace crowneval
