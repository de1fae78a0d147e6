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
#ifndef CROWNEVAL_RASTER_GRID_H_
#define CROWNEVAL_RASTER_GRID_H_

#include <array>
#include <cstdint>
#include <string>

#include "crowneval/geometry.h"

namespace crowneval {

// Six-parameter affine pixel -> world mapping in the GDAL convention:
//   world_x = c[0] + px * c[1] + py * c[2]
//   world_y = c[3] + px * c[4] + py * c[5]
class GeoTransform {
 public:
  GeoTransform() : coeffs_{0.0, 1.0, 0.0, 0.0, 0.0, 1.0} {}
  explicit GeoTransform(const std::array<double, 6>& coeffs)
      : coeffs_(coeffs) {}

  // North-up transform with square pixels of `gsd` world units.
  static GeoTransform NorthUp(double origin_x, double origin_y, double gsd);

  const std::array<double, 6>& coeffs() const { return coeffs_; }

  double Determinant() const {
    return coeffs_[1] * coeffs_[5] - coeffs_[2] * coeffs_[4];
  }
  bool Invertible() const;

  Point PixelToWorld(Point pixel) const;
  // Throws ValidationError when the transform is singular.
  Point WorldToPixel(Point world) const;

  friend bool operator==(const GeoTransform&, const GeoTransform&) = default;

 private:
  std::array<double, 6> coeffs_;
};

// Orthomosaic frame.
struct RasterGrid {
  int64_t width = 0;
  int64_t height = 0;
  double gsd = 0.0;  // meters per pixel, uniform in x and y
  GeoTransform transform;
  std::string crs;

  PixelRect Extent() const { return {0, 0, width, height}; }
  // Throws ValidationError unless gsd > 0 and both dimensions are positive.
  void Validate() const;
};

}  // namespace crowneval

#endif  // CROWNEVAL_RASTER_GRID_H_
