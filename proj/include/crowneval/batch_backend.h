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
#ifndef CROWNEVAL_BATCH_BACKEND_H_
#define CROWNEVAL_BATCH_BACKEND_H_

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>

#include "crowneval/pipeline.h"

namespace crowneval {

// File exchange with an external model process. Each call creates a job
// directory <dir>/<job>/ holding tile.tif (RGB + alpha validity, tile
// georeferencing when known) and request.json, written last and atomically:
//
//   {"protocol": 1, "kind": "detect" | "segment", "tile": "tile.tif",
//    "raster": ..., "tile_id": ..., "window": [x, y, w, h],
//    "prompts": [[x0, y0, x1, y1], ...]}            (segment only)
//
// The backend answers by atomically creating result.json in the same
// directory:
//
//   {"detections": [{"box": [x0, y0, x1, y1], "score": s}, ...]}
//   {"masks": [{"segmentation": {"size": [h, w], "counts": ...},
//               "score": s}, ...]}
//   {"error": "message"}
//
// Boxes and masks are tile-local. The job directory is removed once the
// result is read.
struct BatchOptions {
  std::filesystem::path dir;
  std::chrono::milliseconds timeout{120000};
  std::chrono::milliseconds poll_interval{10};
  bool single_flight = false;
};

class BatchDetector : public Detector {
 public:
  explicit BatchDetector(BatchOptions options);
  std::vector<Detection> Detect(const TileView& tile) override;
  bool single_flight() const override { return options_.single_flight; }

 private:
  BatchOptions options_;
};

class BatchSegmenter : public BoxPromptSegmenter {
 public:
  explicit BatchSegmenter(BatchOptions options);
  std::vector<SegmentedMask> Segment(const TileView& tile,
                                     std::span<const Box> prompts) override;
  bool single_flight() const override { return options_.single_flight; }

 private:
  BatchOptions options_;
};

// Reference backend: answers pending jobs under `dir` with in-process models.
// Either model may be null; its requests are then answered with an error.
class BatchResponder {
 public:
  BatchResponder(std::filesystem::path dir, Detector* detector,
                 BoxPromptSegmenter* segmenter);

  // Answers every job that has a request and no result; returns how many.
  size_t ServeOnce();
  void ServeUntil(const std::atomic<bool>& stop,
                  std::chrono::milliseconds poll = std::chrono::milliseconds(5));

 private:
  std::filesystem::path dir_;
  Detector* detector_;
  BoxPromptSegmenter* segmenter_;
};

}  // namespace crowneval

#endif  // CROWNEVAL_BATCH_BACKEND_H_
