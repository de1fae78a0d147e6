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
#ifndef CROWNEVAL_TIFF_IO_H_
#define CROWNEVAL_TIFF_IO_H_

#include <filesystem>
#include <optional>
#include <string>

#include "crowneval/geometry.h"
#include "crowneval/raster_grid.h"
#include "crowneval/tiler.h"

namespace crowneval {

struct TiffInfo {
  int64_t width = 0;
  int64_t height = 0;
  int color_channels = 0;
  bool has_alpha = false;
  std::optional<GeoTransform> transform;
  std::string crs;  // "EPSG:<code>" or a free-form citation; may be empty
};

struct GeoRaster {
  TiffInfo info;
  Image color;                      // alpha stripped
  std::optional<BinaryMask> alpha;  // set where alpha > 0, frame {0,0,w,h}
};

// Header and georeferencing only; no pixel data is read.
TiffInfo ReadTiffInfo(const std::filesystem::path& path);

// 8-bit unsigned, chunky layout, stripped or tiled. Throws IoError on
// unreadable or unsupported files.
GeoRaster ReadGeoTiff(const std::filesystem::path& path);

// Writes `color` (1 or 3 channels) with an optional alpha channel that is 255
// on `validity` pixels and 0 elsewhere. Georeferencing is written as pixel
// scale + tie point for north-up transforms, as a model transformation
// otherwise. Output is deterministic (no timestamps).
void WriteGeoTiff(const std::filesystem::path& path, const Image& color,
                  const BinaryMask* validity,
                  const std::optional<GeoTransform>& transform,
                  const std::string& crs);

// Transform of a sub-window whose top-left pixel is (dx, dy).
GeoTransform ShiftedTransform(const GeoTransform& t, int64_t dx, int64_t dy);

// Grid of a georeferenced TIFF; gsd from the transform (square pixels
// required) unless `gsd_override` is given.
RasterGrid GridFromTiff(const TiffInfo& info,
                        std::optional<double> gsd_override = std::nullopt);

}  // namespace crowneval

#endif  // CROWNEVAL_TIFF_IO_H_
