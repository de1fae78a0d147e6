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
#include "crowneval/geometry.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include "crowneval/errors.h"

namespace crowneval {

namespace {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint>;
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;

BgPolygon ToBoost(const Polygon& polygon) {
  BgPolygon out;
  for (const Point& p : polygon.exterior()) {
    out.outer().emplace_back(p.x, p.y);
  }
  for (const Ring& hole : polygon.holes()) {
    auto& inner = out.inners().emplace_back();
    for (const Point& p : hole) inner.emplace_back(p.x, p.y);
  }
  bg::correct(out);
  return out;
}

// Drops a trailing vertex equal to the first one.
Ring OpenRing(Ring ring) {
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

bool RingHasArea(std::span<const Point> ring) {
  return ring.size() >= 3 && SignedRingArea(ring) != 0.0;
}

struct Edge {
  Point a;
  Point b;
};

void CollectEdges(const Ring& ring, std::vector<Edge>* edges) {
  const size_t n = ring.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % n];
    if (a.y != b.y) edges->push_back({a, b});
  }
}

// x of the crossing between the edge and the horizontal line y; only valid
// when the edge straddles the line under the half-open rule.
inline double CrossingX(const Edge& e, double y) {
  return e.a.x + (y - e.a.y) * (e.b.x - e.a.x) / (e.b.y - e.a.y);
}

inline bool Straddles(const Edge& e, double y) {
  return (e.a.y > y) != (e.b.y > y);
}

template <typename Inside>
Ring ClipRingAgainst(const Ring& ring, Inside inside,
                     Point (*cut)(const Point&, const Point&, double),
                     double bound) {
  Ring out;
  const size_t n = ring.size();
  if (n == 0) return out;
  for (size_t i = 0; i < n; ++i) {
    const Point& cur = ring[i];
    const Point& prev = ring[(i + n - 1) % n];
    const bool cur_in = inside(cur);
    const bool prev_in = inside(prev);
    if (cur_in) {
      if (!prev_in) out.push_back(cut(prev, cur, bound));
      out.push_back(cur);
    } else if (prev_in) {
      out.push_back(cut(prev, cur, bound));
    }
  }
  return out;
}

Point CutAtX(const Point& a, const Point& b, double x) {
  const double t = (x - a.x) / (b.x - a.x);
  return {x, a.y + t * (b.y - a.y)};
}

Point CutAtY(const Point& a, const Point& b, double y) {
  const double t = (y - a.y) / (b.y - a.y);
  return {a.x + t * (b.x - a.x), y};
}

Ring ClipRing(const Ring& ring, const Box& r) {
  Ring out = ClipRingAgainst(
      ring, [&](const Point& p) { return p.x >= r.x0; }, CutAtX, r.x0);
  out = ClipRingAgainst(
      out, [&](const Point& p) { return p.x <= r.x1; }, CutAtX, r.x1);
  out = ClipRingAgainst(
      out, [&](const Point& p) { return p.y >= r.y0; }, CutAtY, r.y0);
  out = ClipRingAgainst(
      out, [&](const Point& p) { return p.y <= r.y1; }, CutAtY, r.y1);
  return out;
}

}  // namespace

double SignedRingArea(std::span<const Point> ring) {
  const size_t n = ring.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

Box BoxIntersection(const Box& a, const Box& b) {
  return {std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1),
          std::min(a.y1, b.y1)};
}

double BoxIoU(const Box& a, const Box& b) {
  const double inter = BoxIntersection(a, b).Area();
  const double uni = a.Area() + b.Area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

PixelRect Intersect(const PixelRect& a, const PixelRect& b) {
  const int64_t x0 = std::max(a.x, b.x);
  const int64_t y0 = std::max(a.y, b.y);
  const int64_t x1 = std::min(a.Right(), b.Right());
  const int64_t y1 = std::min(a.Bottom(), b.Bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return {x0, y0, x1 - x0, y1 - y0};
}

PixelRect EnclosingPixelRect(const Box& box) {
  const auto x0 = static_cast<int64_t>(std::floor(box.x0));
  const auto y0 = static_cast<int64_t>(std::floor(box.y0));
  const auto x1 = static_cast<int64_t>(std::ceil(box.x1));
  const auto y1 = static_cast<int64_t>(std::ceil(box.y1));
  return {x0, y0, std::max<int64_t>(0, x1 - x0), std::max<int64_t>(0, y1 - y0)};
}

Polygon Polygon::Create(Ring exterior, std::vector<Ring> holes) {
  exterior = OpenRing(std::move(exterior));
  if (exterior.size() < 3) {
    throw ValidationError("polygon exterior needs at least 3 vertices, got " +
                          std::to_string(exterior.size()));
  }
  for (const Point& p : exterior) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("polygon has a non-finite coordinate");
    }
  }
  if (SignedRingArea(exterior) == 0.0) {
    throw ValidationError("polygon exterior ring has zero area");
  }
  for (Ring& hole : holes) {
    hole = OpenRing(std::move(hole));
    if (!RingHasArea(hole)) {
      throw ValidationError("polygon hole is degenerate");
    }
  }
  return Polygon(std::move(exterior), std::move(holes));
}

Box Polygon::Bounds() const {
  Box b{exterior_[0].x, exterior_[0].y, exterior_[0].x, exterior_[0].y};
  for (const Point& p : exterior_) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

Polygon Polygon::Translated(double dx, double dy) const {
  auto shift = [&](const Ring& ring) {
    Ring out = ring;
    for (Point& p : out) {
      p.x += dx;
      p.y += dy;
    }
    return out;
  };
  std::vector<Ring> holes;
  holes.reserve(holes_.size());
  for (const Ring& h : holes_) holes.push_back(shift(h));
  return Polygon(shift(exterior_), std::move(holes));
}

double Polygon::Perimeter() const {
  auto ring_length = [](const Ring& ring) {
    double total = 0.0;
    for (size_t i = 0; i < ring.size(); ++i) {
      const Point& a = ring[i];
      const Point& b = ring[(i + 1) % ring.size()];
      total += std::hypot(b.x - a.x, b.y - a.y);
    }
    return total;
  };
  double total = ring_length(exterior_);
  for (const Ring& h : holes_) total += ring_length(h);
  return total;
}

double PolygonAreaPx(const Polygon& polygon) {
  double area = std::abs(SignedRingArea(polygon.exterior()));
  for (const Ring& hole : polygon.holes()) {
    area -= std::abs(SignedRingArea(hole));
  }
  if (!(area > 0.0)) {
    throw ValidationError("polygon has non-positive area after holes");
  }
  return area;
}

bool PolygonContains(const Polygon& polygon, Point p) {
  bool inside = false;
  auto visit = [&](const Ring& ring) {
    const size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
      const Edge e{ring[i], ring[(i + 1) % n]};
      if (e.a.y != e.b.y && Straddles(e, p.y) && CrossingX(e, p.y) > p.x) {
        inside = !inside;
      }
    }
  };
  visit(polygon.exterior());
  for (const Ring& h : polygon.holes()) visit(h);
  return inside;
}

std::optional<Polygon> ClipToRect(const Polygon& polygon, const Box& rect) {
  Ring exterior = ClipRing(polygon.exterior(), rect);
  if (!RingHasArea(exterior)) return std::nullopt;
  std::vector<Ring> holes;
  for (const Ring& h : polygon.holes()) {
    Ring clipped = ClipRing(h, rect);
    if (RingHasArea(clipped)) holes.push_back(std::move(clipped));
  }
  Polygon out = Polygon::Create(std::move(exterior), std::move(holes));
  double area = std::abs(SignedRingArea(out.exterior()));
  for (const Ring& h : out.holes()) area -= std::abs(SignedRingArea(h));
  if (!(area > 0.0)) return std::nullopt;
  return out;
}

double PolygonIntersectionArea(const Polygon& a, const Polygon& b) {
  if (BoxIntersection(a.Bounds(), b.Bounds()).Empty()) return 0.0;
  BgMultiPolygon out;
  bg::intersection(ToBoost(a), ToBoost(b), out);
  return bg::area(out);
}

double PolygonIoU(const Polygon& a, const Polygon& b) {
  const double area_a = PolygonAreaPx(a);
  const double area_b = PolygonAreaPx(b);
  const double inter = PolygonIntersectionArea(a, b);
  const double uni = area_a + area_b - inter;
  if (!(uni > 0.0)) throw ValidationError("polygon IoU of two empty shapes");
  return std::clamp(inter / uni, 0.0, 1.0);
}

BinaryMask::BinaryMask(const PixelRect& frame)
    : frame_(frame),
      bits_(static_cast<size_t>(std::max<int64_t>(0, frame.Area())), 0) {
  if (frame.Empty()) frame_ = {frame.x, frame.y, 0, 0};
}

BinaryMask::BinaryMask(const PixelRect& frame, std::vector<uint8_t> bits)
    : frame_(frame), bits_(std::move(bits)) {
  if (frame.Empty()) {
    frame_ = {frame.x, frame.y, 0, 0};
    bits_.clear();
  }
  if (static_cast<int64_t>(bits_.size()) != frame_.Area()) {
    throw ValidationError("mask bit count " + std::to_string(bits_.size()) +
                          " does not match frame area " +
                          std::to_string(frame_.Area()));
  }
  for (uint8_t& b : bits_) {
    b = b != 0 ? 1 : 0;
    count_ += b;
  }
}

bool BinaryMask::At(int64_t x, int64_t y) const {
  if (!frame_.Contains(x, y)) return false;
  return bits_[(y - frame_.y) * frame_.width + (x - frame_.x)] != 0;
}

void BinaryMask::Set(int64_t x, int64_t y, bool value) {
  if (!frame_.Contains(x, y)) {
    throw ValidationError("mask write outside frame at (" + std::to_string(x) +
                          ", " + std::to_string(y) + ")");
  }
  uint8_t& b = bits_[(y - frame_.y) * frame_.width + (x - frame_.x)];
  const uint8_t v = value ? 1 : 0;
  count_ += static_cast<int64_t>(v) - static_cast<int64_t>(b);
  b = v;
}

std::optional<PixelRect> BinaryMask::TightBounds() const {
  if (count_ == 0) return std::nullopt;
  int64_t min_x = frame_.width, max_x = -1, min_y = frame_.height, max_y = -1;
  for (int64_t r = 0; r < frame_.height; ++r) {
    const uint8_t* row = bits_.data() + r * frame_.width;
    int64_t first = -1;
    int64_t last = -1;
    for (int64_t c = 0; c < frame_.width; ++c) {
      if (row[c]) {
        if (first < 0) first = c;
        last = c;
      }
    }
    if (first < 0) continue;
    min_x = std::min(min_x, first);
    max_x = std::max(max_x, last);
    min_y = std::min(min_y, r);
    max_y = r;
  }
  return PixelRect{frame_.x + min_x, frame_.y + min_y, max_x - min_x + 1,
                   max_y - min_y + 1};
}

BinaryMask BinaryMask::Translated(int64_t dx, int64_t dy) const {
  BinaryMask out = *this;
  out.frame_.x += dx;
  out.frame_.y += dy;
  return out;
}

BinaryMask BinaryMask::Cropped(const PixelRect& window) const {
  const PixelRect target = Intersect(frame_, window);
  if (target.Empty()) return BinaryMask(PixelRect{target.x, target.y, 0, 0});
  std::vector<uint8_t> bits(static_cast<size_t>(target.Area()));
  for (int64_t r = 0; r < target.height; ++r) {
    const uint8_t* src = bits_.data() +
                         (target.y - frame_.y + r) * frame_.width +
                         (target.x - frame_.x);
    std::copy(src, src + target.width, bits.begin() + r * target.width);
  }
  return BinaryMask(target, std::move(bits));
}

BinaryMask BinaryMask::Trimmed() const {
  const auto bounds = TightBounds();
  if (!bounds) return BinaryMask(PixelRect{frame_.x, frame_.y, 0, 0});
  return Cropped(*bounds);
}

int64_t IntersectionCount(const BinaryMask& a, const BinaryMask& b) {
  const PixelRect overlap = Intersect(a.frame(), b.frame());
  if (overlap.Empty() || a.Empty() || b.Empty()) return 0;
  int64_t total = 0;
  for (int64_t y = overlap.y; y < overlap.Bottom(); ++y) {
    const uint8_t* pa = a.Row(y - a.y0()).data() + (overlap.x - a.x0());
    const uint8_t* pb = b.Row(y - b.y0()).data() + (overlap.x - b.x0());
    for (int64_t i = 0; i < overlap.width; ++i) total += pa[i] & pb[i];
  }
  return total;
}

double MaskIoU(const BinaryMask& a, const BinaryMask& b) {
  const int64_t inter = IntersectionCount(a, b);
  const int64_t uni = a.Count() + b.Count() - inter;
  if (uni == 0) throw ValidationError("mask IoU of two empty masks");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Box MaskToBox(const BinaryMask& mask) {
  const auto bounds = mask.TightBounds();
  if (!bounds) throw ValidationError("bounding box of an empty mask");
  return bounds->ToBox();
}

BinaryMask Rasterize(const Polygon& polygon, const PixelRect& window) {
  if (window.Empty()) return BinaryMask(window);
  std::vector<Edge> edges;
  CollectEdges(polygon.exterior(), &edges);
  for (const Ring& h : polygon.holes()) CollectEdges(h, &edges);

  std::vector<uint8_t> bits(static_cast<size_t>(window.Area()), 0);
  std::vector<double> xs;
  for (int64_t r = 0; r < window.height; ++r) {
    const double yc = static_cast<double>(window.y + r) + 0.5;
    xs.clear();
    for (const Edge& e : edges) {
      if (Straddles(e, yc)) xs.push_back(CrossingX(e, yc));
    }
    std::sort(xs.begin(), xs.end());
    uint8_t* row = bits.data() + r * window.width;
    // Centers in [xs[k], xs[k+1]) are inside.
    for (size_t k = 0; k + 1 < xs.size(); k += 2) {
      auto lo = static_cast<int64_t>(std::ceil(xs[k] - 0.5));
      auto hi = static_cast<int64_t>(std::ceil(xs[k + 1] - 0.5));
      lo = std::max(lo, window.x);
      hi = std::min(hi, window.Right());
      for (int64_t c = lo; c < hi; ++c) row[c - window.x] = 1;
    }
  }
  return BinaryMask(window, std::move(bits));
}

BinaryMask Rasterize(const Polygon& polygon) {
  return Rasterize(polygon, EnclosingPixelRect(polygon.Bounds()));
}

BinaryMask MaskAnd(const BinaryMask& a, const BinaryMask& b) {
  const PixelRect overlap = Intersect(a.frame(), b.frame());
  if (overlap.Empty()) return BinaryMask(PixelRect{overlap.x, overlap.y, 0, 0});
  std::vector<uint8_t> bits(static_cast<size_t>(overlap.Area()));
  for (int64_t y = overlap.y; y < overlap.Bottom(); ++y) {
    const uint8_t* pa = a.Row(y - a.y0()).data() + (overlap.x - a.x0());
    const uint8_t* pb = b.Row(y - b.y0()).data() + (overlap.x - b.x0());
    uint8_t* out = bits.data() + (y - overlap.y) * overlap.width;
    for (int64_t i = 0; i < overlap.width; ++i) out[i] = pa[i] & pb[i];
  }
  return BinaryMask(overlap, std::move(bits));
}

BinaryMask MaskOr(const BinaryMask& a, const BinaryMask& b) {
  if (a.frame().Empty()) return b;
  if (b.frame().Empty()) return a;
  const int64_t x0 = std::min(a.x0(), b.x0());
  const int64_t y0 = std::min(a.y0(), b.y0());
  const int64_t x1 = std::max(a.frame().Right(), b.frame().Right());
  const int64_t y1 = std::max(a.frame().Bottom(), b.frame().Bottom());
  const PixelRect frame{x0, y0, x1 - x0, y1 - y0};
  std::vector<uint8_t> bits(static_cast<size_t>(frame.Area()), 0);
  for (const BinaryMask* m : {&a, &b}) {
    for (int64_t r = 0; r < m->height(); ++r) {
      const auto row = m->Row(r);
      uint8_t* out =
          bits.data() + (m->y0() + r - y0) * frame.width + (m->x0() - x0);
      for (int64_t i = 0; i < m->width(); ++i) out[i] |= row[i];
    }
  }
  return BinaryMask(frame, std::move(bits));
}

}  // namespace crowneval
