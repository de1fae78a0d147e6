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
#ifndef CROWNEVAL_COCO_IO_H_
#define CROWNEVAL_COCO_IO_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowneval/crown.h"
#include "crowneval/io_util.h"
#include "crowneval/rle.h"

namespace crowneval {

// A COCO image entry. `raster` and `window` are optional extension keys
// locating the tile in its source orthomosaic.
struct CocoImage {
  int64_t id = 0;
  std::string file_name;
  int64_t width = 0;
  int64_t height = 0;
  std::string raster;
  std::optional<PixelRect> window;

  friend bool operator==(const CocoImage&, const CocoImage&) = default;
};

// Instances are in the image's pixel frame.
struct CocoTile {
  CocoImage image;
  std::vector<CrownInstance> instances;
};

// Dataset form {"images": [...], "annotations": [...]}. Annotations with a
// "score" become predictions. Tiles come back in "images" order. Throws
// ValidationError on schema errors, dangling image ids and bad RLE sums.
std::vector<CocoTile> ParseCoco(const Json& doc);
std::vector<CocoTile> LoadCoco(const std::filesystem::path& path);

// Results form: a bare array of annotations with scores, attached to the
// given images (which may have no annotations).
std::vector<CocoTile> ParseCocoResults(const Json& doc,
                                       std::span<const CocoImage> images);
std::vector<CocoTile> LoadCocoResults(const std::filesystem::path& path,
                                      std::span<const CocoImage> images);

// Polygons without holes are written as COCO polygons, everything else as
// compressed RLE over the image. Scores are written for non-ground-truth
// instances. Throws ValidationError when a mask leaves its image.
Json CocoToJson(std::span<const CocoTile> tiles);
void SaveCoco(const std::filesystem::path& path, std::span<const CocoTile> tiles);

// {"size": [h, w], "counts": "<compressed>" or [runs...]}.
RleMask ParseRleJson(const Json& j);
Json RleToJson(const RleMask& rle);

}  // namespace crowneval

#endif  // CROWNEVAL_COCO_IO_H_
