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
#include "crowneval/raster_grid.h"

#include <cmath>

#include "crowneval/errors.h"

namespace crowneval {

GeoTransform GeoTransform::NorthUp(double origin_x, double origin_y,
                                   double gsd) {
  return GeoTransform({origin_x, gsd, 0.0, origin_y, 0.0, -gsd});
}

bool GeoTransform::Invertible() const {
  const double det = Determinant();
  return std::isfinite(det) && det != 0.0;
}

Point GeoTransform::PixelToWorld(Point pixel) const {
  const auto& c = coeffs_;
  return {c[0] + pixel.x * c[1] + pixel.y * c[2],
          c[3] + pixel.x * c[4] + pixel.y * c[5]};
}

Point GeoTransform::WorldToPixel(Point world) const {
  if (!Invertible()) {
    throw ValidationError("geotransform is not invertible");
  }
  const auto& c = coeffs_;
  const double det = Determinant();
  const double dx = world.x - c[0];
  const double dy = world.y - c[3];
  return {(c[5] * dx - c[2] * dy) / det, (c[1] * dy - c[4] * dx) / det};
}

void RasterGrid::Validate() const {
  if (!(gsd > 0.0) || !std::isfinite(gsd)) {
    throw ValidationError("raster gsd must be positive, got " +
                          std::to_string(gsd));
  }
  if (width <= 0 || height <= 0) {
    throw ValidationError("raster dimensions must be positive");
  }
}

}  // namespace crowneval
