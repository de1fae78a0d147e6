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
#ifndef CROWNEVAL_GEOMETRY_H_
#define CROWNEVAL_GEOMETRY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace crowneval {

// All coordinates are raster pixel units. Pixel (c, r) covers the unit square
// [c, c+1) x [r, r+1); its center is (c + 0.5, r + 0.5).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

using Ring = std::vector<Point>;

// Signed shoelace area of a ring, positive for counter-clockwise order in a
// y-up frame.
double SignedRingArea(std::span<const Point> ring);

// Axis-aligned box [x0, x1) x [y0, y1).
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double Width() const { return x1 > x0 ? x1 - x0 : 0.0; }
  double Height() const { return y1 > y0 ? y1 - y0 : 0.0; }
  double Area() const { return Width() * Height(); }
  bool Empty() const { return !(x1 > x0 && y1 > y0); }

  friend bool operator==(const Box&, const Box&) = default;
};

double BoxIoU(const Box& a, const Box& b);
Box BoxIntersection(const Box& a, const Box& b);

// Integer pixel window.
struct PixelRect {
  int64_t x = 0;
  int64_t y = 0;
  int64_t width = 0;
  int64_t height = 0;

  int64_t Right() const { return x + width; }
  int64_t Bottom() const { return y + height; }
  int64_t Area() const { return Empty() ? 0 : width * height; }
  bool Empty() const { return width <= 0 || height <= 0; }
  bool Contains(int64_t px, int64_t py) const {
    return px >= x && px < Right() && py >= y && py < Bottom();
  }
  Box ToBox() const {
    return {static_cast<double>(x), static_cast<double>(y),
            static_cast<double>(Right()), static_cast<double>(Bottom())};
  }

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

PixelRect Intersect(const PixelRect& a, const PixelRect& b);

// Smallest pixel window containing every pixel whose area meets the box.
PixelRect EnclosingPixelRect(const Box& box);

// Polygon with one exterior ring and optional holes. Rings are stored open:
// the closing edge from the last vertex back to the first is implicit, and a
// repeated closing vertex on input is removed by Create().
class Polygon {
 public:
  // Throws ValidationError when a ring has fewer than 3 distinct vertices or
  // zero signed area.
  static Polygon Create(Ring exterior, std::vector<Ring> holes = {});

  const Ring& exterior() const { return exterior_; }
  const std::vector<Ring>& holes() const { return holes_; }

  Box Bounds() const;
  Polygon Translated(double dx, double dy) const;
  double Perimeter() const;

  friend bool operator==(const Polygon&, const Polygon&) = default;

 private:
  Polygon(Ring exterior, std::vector<Ring> holes)
      : exterior_(std::move(exterior)), holes_(std::move(holes)) {}

  Ring exterior_;
  std::vector<Ring> holes_;
};

// Area of the exterior minus the holes, in pixel^2.
double PolygonAreaPx(const Polygon& polygon);

// Even-odd test over all rings with the same half-open convention that
// Rasterize() applies to pixel centers.
bool PolygonContains(const Polygon& polygon, Point p);

// Clips every ring against the rectangle (Sutherland-Hodgman). The result may
// carry zero-width bridges where a non-convex ring re-enters the window; these
// do not change area or even-odd membership. Returns nullopt when nothing of
// positive area remains.
std::optional<Polygon> ClipToRect(const Polygon& polygon, const Box& rect);

// Exact area of the intersection of two polygons.
double PolygonIntersectionArea(const Polygon& a, const Polygon& b);

// Exact vector IoU. Throws ValidationError when both areas are zero.
double PolygonIoU(const Polygon& a, const Polygon& b);

// Binary mask placed in the raster frame by its origin offset.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(const PixelRect& frame);
  // `bits` is row-major, one byte per pixel, nonzero = set.
  BinaryMask(const PixelRect& frame, std::vector<uint8_t> bits);

  const PixelRect& frame() const { return frame_; }
  int64_t x0() const { return frame_.x; }
  int64_t y0() const { return frame_.y; }
  int64_t width() const { return frame_.width; }
  int64_t height() const { return frame_.height; }

  // Raster-frame accessors; pixels outside the frame read as unset.
  bool At(int64_t x, int64_t y) const;
  void Set(int64_t x, int64_t y, bool value = true);

  int64_t Count() const { return count_; }
  bool Empty() const { return count_ == 0; }

  std::span<const uint8_t> Row(int64_t local_row) const {
    return {bits_.data() + local_row * frame_.width,
            static_cast<size_t>(frame_.width)};
  }
  const std::vector<uint8_t>& bits() const { return bits_; }

  // Tight window around set pixels, nullopt when empty.
  std::optional<PixelRect> TightBounds() const;

  BinaryMask Translated(int64_t dx, int64_t dy) const;
  // Restricts the frame to `window` (pixels outside are discarded).
  BinaryMask Cropped(const PixelRect& window) const;
  // Crops to the tight bounds; an empty mask becomes a 0x0 mask.
  BinaryMask Trimmed() const;

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.frame_ == b.frame_ && a.bits_ == b.bits_;
  }

 private:
  PixelRect frame_;
  std::vector<uint8_t> bits_;
  int64_t count_ = 0;
};

int64_t IntersectionCount(const BinaryMask& a, const BinaryMask& b);

// |a & b| / |a | b| in the shared raster frame. Throws ValidationError when
// both masks are empty.
double MaskIoU(const BinaryMask& a, const BinaryMask& b);

// Tight box [min, max + 1) of set pixels. Throws ValidationError when empty.
Box MaskToBox(const BinaryMask& mask);

// Pixel is set iff its center lies inside the polygon (even-odd rule over all
// rings). An empty result is allowed.
BinaryMask Rasterize(const Polygon& polygon, const PixelRect& window);

// Rasterizes over the polygon's own enclosing window.
BinaryMask Rasterize(const Polygon& polygon);

BinaryMask MaskAnd(const BinaryMask& a, const BinaryMask& b);
BinaryMask MaskOr(const BinaryMask& a, const BinaryMask& b);

}  // namespace crowneval

#endif  // CROWNEVAL_GEOMETRY_H_
