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
#include "crowneval/pipeline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "crowneval/errors.h"
#include "crowneval/parallel.h"
#include "crowneval/random.h"

namespace crowneval {

namespace {

// Stream tags for DeriveSeed so unrelated draws never share a sequence.
enum : uint64_t {
  kStreamDrop = 1,
  kStreamJitter,
  kStreamSpurious,
  kStreamBoundary,
  kStreamPlacement,
  kStreamTexture,
};

void CheckScore(double s, const char* what) {
  if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
    throw ValidationError(std::string(what) + " score outside [0, 1]");
  }
}

uint64_t Key(int64_t v) { return static_cast<uint64_t>(v); }

// Visible part of each crown in the tile-local frame. Entries for crowns
// outside the window are empty masks.
std::vector<BinaryMask> VisibleMasks(const std::vector<BinaryMask>& masks,
                                     const TileView& tile) {
  std::vector<BinaryMask> out;
  out.reserve(masks.size());
  for (const BinaryMask& m : masks) {
    BinaryMask local =
        m.Cropped(tile.window).Translated(-tile.window.x, -tile.window.y);
    if (!local.Empty()) local = MaskAnd(local, tile.validity);
    out.push_back(std::move(local));
  }
  return out;
}

std::map<std::string, std::vector<BinaryMask>> MasksOf(
    const std::map<std::string, std::vector<CrownInstance>>& truths) {
  std::map<std::string, std::vector<BinaryMask>> out;
  for (const auto& [name, crowns] : truths) {
    auto& masks = out[name];
    masks.reserve(crowns.size());
    for (const CrownInstance& c : crowns) masks.push_back(InstanceMask(c));
  }
  return out;
}

const std::vector<BinaryMask>& LookupRaster(
    const std::map<std::string, std::vector<BinaryMask>>& masks,
    std::string_view raster) {
  const auto it = masks.find(std::string(raster));
  if (it == masks.end()) {
    throw ValidationError("oracle has no ground truth for raster '" +
                          std::string(raster) + "'");
  }
  return it->second;
}

Box ClampBox(const Box& b, const PixelRect& frame) {
  return Box{std::clamp(b.x0, static_cast<double>(frame.x),
                        static_cast<double>(frame.Right())),
             std::clamp(b.y0, static_cast<double>(frame.y),
                        static_cast<double>(frame.Bottom())),
             std::clamp(b.x1, static_cast<double>(frame.x),
                        static_cast<double>(frame.Right())),
             std::clamp(b.y1, static_cast<double>(frame.y),
                        static_cast<double>(frame.Bottom()))};
}

// Pixels whose centers lie inside `box`.
BinaryMask BoxMask(const Box& box, const PixelRect& frame) {
  const auto lo_x = static_cast<int64_t>(std::ceil(box.x0 - 0.5));
  const auto lo_y = static_cast<int64_t>(std::ceil(box.y0 - 0.5));
  const auto hi_x = static_cast<int64_t>(std::floor(box.x1 - 0.5)) + 1;
  const auto hi_y = static_cast<int64_t>(std::floor(box.y1 - 0.5)) + 1;
  const PixelRect r =
      Intersect(PixelRect{lo_x, lo_y, std::max<int64_t>(0, hi_x - lo_x),
                          std::max<int64_t>(0, hi_y - lo_y)},
                frame);
  if (r.Empty()) return BinaryMask(PixelRect{frame.x, frame.y, 0, 0});
  return BinaryMask(r, std::vector<uint8_t>(static_cast<size_t>(r.Area()), 1));
}

// Flips each pixel that has a 4-neighbor of the other state with
// probability `rate`. The frame grows by one pixel so the outer boundary can
// gain pixels.
BinaryMask FlipBoundary(const BinaryMask& mask, double rate, Rng& rng) {
  const PixelRect f{mask.x0() - 1, mask.y0() - 1, mask.width() + 2,
                    mask.height() + 2};
  BinaryMask out(f);
  for (int64_t y = f.y; y < f.Bottom(); ++y) {
    for (int64_t x = f.x; x < f.Right(); ++x) {
      const bool v = mask.At(x, y);
      const bool edge = mask.At(x - 1, y) != v || mask.At(x + 1, y) != v ||
                        mask.At(x, y - 1) != v || mask.At(x, y + 1) != v;
      out.Set(x, y, edge && rng.Bernoulli(rate) ? !v : v);
    }
  }
  return out;
}

template <typename DetectFn, typename SegmentFn>
std::vector<CrownInstance> RunWith(const TileView& tile, DetectFn&& detect,
                                   SegmentFn&& segment,
                                   const PipelineConfig& config,
                                   PipelineStats* stats) {
  const PixelRect frame{0, 0, tile.window.width, tile.window.height};
  PipelineStats local;
  local.tiles = 1;

  std::vector<Detection> dets = detect(tile);
  local.detections = static_cast<int64_t>(dets.size());
  std::vector<Detection> boxes;
  boxes.reserve(dets.size());
  for (const Detection& d : dets) {
    CheckScore(d.score, "detection");
    const Box b = ClampBox(d.box, frame);
    if (b.Empty()) {
      ++local.empty_boxes_dropped;
      continue;
    }
    boxes.push_back({b, d.score});
  }
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
  if (boxes.size() > config.max_instances) {
    local.capped = static_cast<int64_t>(boxes.size() - config.max_instances);
    boxes.resize(config.max_instances);
  }

  std::vector<CrownInstance> out;
  if (!boxes.empty()) {
    std::vector<Box> prompts;
    prompts.reserve(boxes.size());
    for (const Detection& d : boxes) prompts.push_back(d.box);
    std::vector<SegmentedMask> masks = segment(tile, prompts);
    if (masks.size() != prompts.size()) {
      throw ValidationError("segmenter returned " +
                            std::to_string(masks.size()) + " masks for " +
                            std::to_string(prompts.size()) + " prompts");
    }
    for (size_t i = 0; i < masks.size(); ++i) {
      CheckScore(masks[i].score, "mask");
      BinaryMask m = masks[i].mask.Cropped(frame).Trimmed();
      if (m.Empty()) {
        ++local.empty_masks_dropped;
        continue;
      }
      CrownInstance c;
      c.id = static_cast<int64_t>(out.size());
      c.mask = std::move(m);
      c.score = CombineScores(config.combiner, boxes[i].score, masks[i].score);
      c.source.kind = SourceKind::kPrediction;
      out.push_back(std::move(c));
    }
  }
  local.instances = static_cast<int64_t>(out.size());
  if (stats != nullptr) *stats += local;
  return out;
}

}  // namespace

std::string_view ScoreCombinerName(ScoreCombiner c) {
  switch (c) {
    case ScoreCombiner::kProduct:
      return "product";
    case ScoreCombiner::kGeometricMean:
      return "geometric_mean";
    case ScoreCombiner::kDetectionOnly:
      return "detection_only";
  }
  return "unknown";
}

std::optional<ScoreCombiner> ParseScoreCombiner(std::string_view name) {
  for (ScoreCombiner c : {ScoreCombiner::kProduct, ScoreCombiner::kGeometricMean,
                          ScoreCombiner::kDetectionOnly}) {
    if (ScoreCombinerName(c) == name) return c;
  }
  return std::nullopt;
}

double CombineScores(ScoreCombiner c, double detection, double mask) {
  switch (c) {
    case ScoreCombiner::kProduct:
      return detection * mask;
    case ScoreCombiner::kGeometricMean:
      return std::sqrt(detection * mask);
    case ScoreCombiner::kDetectionOnly:
      return detection;
  }
  return detection;
}

void PipelineConfig::Validate() const {
  if (max_instances == 0) {
    throw ValidationError("max_instances must be positive");
  }
}

PipelineStats& PipelineStats::operator+=(const PipelineStats& o) {
  tiles += o.tiles;
  detections += o.detections;
  empty_boxes_dropped += o.empty_boxes_dropped;
  capped += o.capped;
  empty_masks_dropped += o.empty_masks_dropped;
  instances += o.instances;
  return *this;
}

std::vector<CrownInstance> RunPipeline(const TileView& tile, Detector& detector,
                                       BoxPromptSegmenter& segmenter,
                                       const PipelineConfig& config,
                                       PipelineStats* stats) {
  config.Validate();
  return RunWith(
      tile, [&](const TileView& t) { return detector.Detect(t); },
      [&](const TileView& t, std::span<const Box> p) {
        return segmenter.Segment(t, p);
      },
      config, stats);
}

BackendGate::BackendGate(Detector& detector, BoxPromptSegmenter& segmenter)
    : detector_(detector), segmenter_(segmenter) {}

std::vector<Detection> BackendGate::Detect(const TileView& tile) {
  if (!detector_.single_flight()) return detector_.Detect(tile);
  std::lock_guard<std::mutex> lock(detector_mu_);
  return detector_.Detect(tile);
}

std::vector<SegmentedMask> BackendGate::Segment(const TileView& tile,
                                                std::span<const Box> prompts) {
  if (!segmenter_.single_flight()) return segmenter_.Segment(tile, prompts);
  std::lock_guard<std::mutex> lock(segmenter_mu_);
  return segmenter_.Segment(tile, prompts);
}

OracleDetector::OracleDetector(
    std::map<std::string, std::vector<CrownInstance>> truths,
    DetectorNoise noise, uint64_t seed)
    : truths_(std::move(truths)),
      masks_(MasksOf(truths_)),
      noise_(noise),
      seed_(seed) {
  if (noise_.shift_sigma_px < 0 || noise_.scale_sigma < 0 ||
      noise_.drop_rate < 0 || noise_.drop_rate > 1 ||
      noise_.spurious_rate < 0) {
    throw ValidationError("invalid detector noise parameters");
  }
}

std::vector<Detection> OracleDetector::Detect(const TileView& tile) {
  const std::vector<BinaryMask> visible =
      VisibleMasks(LookupRaster(masks_, tile.raster), tile);
  const PixelRect frame{0, 0, tile.window.width, tile.window.height};
  const uint64_t raster_key = std::hash<std::string_view>{}(tile.raster);
  std::vector<Detection> out;
  int64_t seen = 0;
  for (size_t i = 0; i < visible.size(); ++i) {
    if (visible[i].Empty()) continue;
    ++seen;
    Rng drop(DeriveSeed(seed_, {kStreamDrop, raster_key, i}));
    if (drop.Bernoulli(noise_.drop_rate)) continue;
    const Box truth = MaskToBox(visible[i]);
    Rng rng(DeriveSeed(seed_, {kStreamJitter, raster_key, i,
                               Key(tile.window.x), Key(tile.window.y)}));
    const double cx = (truth.x0 + truth.x1) / 2 + noise_.shift_sigma_px * rng.Normal();
    const double cy = (truth.y0 + truth.y1) / 2 + noise_.shift_sigma_px * rng.Normal();
    const double s = std::exp(noise_.scale_sigma * rng.Normal());
    const double hw = truth.Width() * s / 2, hh = truth.Height() * s / 2;
    const Box jittered =
        ClampBox(Box{cx - hw, cy - hh, cx + hw, cy + hh}, frame);
    if (jittered.Empty()) continue;
    out.push_back({jittered, BoxIoU(jittered, truth)});
  }
  Rng rng(DeriveSeed(seed_, {kStreamSpurious, raster_key, Key(tile.window.x),
                             Key(tile.window.y)}));
  const double expected = noise_.spurious_rate * static_cast<double>(seen);
  int64_t count = static_cast<int64_t>(std::floor(expected));
  if (rng.Bernoulli(expected - std::floor(expected))) ++count;
  for (int64_t k = 0; k < count; ++k) {
    const double w = rng.Uniform(8.0, 40.0), h = rng.Uniform(8.0, 40.0);
    const double x = rng.Uniform(0.0, std::max(1.0, frame.width - w));
    const double y = rng.Uniform(0.0, std::max(1.0, frame.height - h));
    const Box b = ClampBox(Box{x, y, x + w, y + h}, frame);
    const double score = rng.Uniform(0.01, 0.3);
    if (!b.Empty()) out.push_back({b, score});
  }
  return out;
}

OracleSegmenter::OracleSegmenter(
    std::map<std::string, std::vector<CrownInstance>> truths,
    SegmenterNoise noise, uint64_t seed)
    : masks_(MasksOf(truths)), noise_(noise), seed_(seed) {
  if (noise_.erode_radius < 0 || noise_.dilate_radius < 0 ||
      noise_.boundary_flip_rate < 0 || noise_.boundary_flip_rate > 1) {
    throw ValidationError("invalid segmenter noise parameters");
  }
}

std::vector<SegmentedMask> OracleSegmenter::Segment(
    const TileView& tile, std::span<const Box> prompts) {
  const std::vector<BinaryMask> visible =
      VisibleMasks(LookupRaster(masks_, tile.raster), tile);
  const PixelRect frame{0, 0, tile.window.width, tile.window.height};
  const uint64_t raster_key = std::hash<std::string_view>{}(tile.raster);
  std::vector<std::optional<Box>> boxes(visible.size());
  for (size_t i = 0; i < visible.size(); ++i) {
    if (!visible[i].Empty()) boxes[i] = MaskToBox(visible[i]);
  }

  std::vector<SegmentedMask> out;
  out.reserve(prompts.size());
  for (const Box& prompt : prompts) {
    size_t pick = visible.size();
    double best = 0.0;
    for (size_t i = 0; i < boxes.size(); ++i) {
      if (!boxes[i]) continue;
      const double iou = BoxIoU(prompt, *boxes[i]);
      if (iou > best) {
        best = iou;
        pick = i;
      }
    }
    const bool fallback = pick == visible.size();
    if (fallback) {
      const double px = (prompt.x0 + prompt.x1) / 2;
      const double py = (prompt.y0 + prompt.y1) / 2;
      double nearest = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < boxes.size(); ++i) {
        if (!boxes[i]) continue;
        const double dx = (boxes[i]->x0 + boxes[i]->x1) / 2 - px;
        const double dy = (boxes[i]->y0 + boxes[i]->y1) / 2 - py;
        if (dx * dx + dy * dy < nearest) {
          nearest = dx * dx + dy * dy;
          pick = i;
        }
      }
      if (pick == visible.size()) {
        out.push_back({BinaryMask(PixelRect{0, 0, 0, 0}), 0.0});
        continue;
      }
      out.push_back({visible[pick], 0.0});
      continue;
    }
    const BinaryMask& original = visible[pick];
    BinaryMask m = original;
    if (noise_.erode_radius > 0) m = Erode(m, noise_.erode_radius);
    if (noise_.dilate_radius > 0) m = Dilate(m, noise_.dilate_radius);
    if (noise_.boundary_flip_rate > 0) {
      Rng rng(DeriveSeed(seed_, {kStreamBoundary, raster_key, pick,
                                 Key(tile.window.x), Key(tile.window.y)}));
      m = FlipBoundary(m, noise_.boundary_flip_rate, rng);
    }
    m = m.Cropped(frame);
    if (noise_.clip_to_prompt) m = MaskAnd(m, BoxMask(prompt, frame));
    const double score =
        m.Empty() ? 0.0 : static_cast<double>(IntersectionCount(m, original)) /
                              static_cast<double>(m.Count() + original.Count() -
                                                  IntersectionCount(m, original));
    out.push_back({std::move(m), score});
  }
  return out;
}

BinaryMask Erode(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  const int64_t w = mask.width(), h = mask.height();
  const PixelRect f = mask.frame();
  // Separable min filter; run lengths of set pixels decide membership.
  std::vector<uint8_t> rows(static_cast<size_t>(w * h), 0);
  for (int64_t y = 0; y < h; ++y) {
    const auto row = mask.Row(y);
    int64_t run = 0;  // set pixels ending at x
    std::vector<int64_t> left(static_cast<size_t>(w));
    for (int64_t x = 0; x < w; ++x) {
      run = row[x] ? run + 1 : 0;
      left[x] = run;
    }
    run = 0;
    for (int64_t x = w - 1; x >= 0; --x) {
      run = row[x] ? run + 1 : 0;
      rows[y * w + x] = left[x] > radius && run > radius;
    }
  }
  std::vector<uint8_t> bits(static_cast<size_t>(w * h), 0);
  for (int64_t x = 0; x < w; ++x) {
    std::vector<int64_t> up(static_cast<size_t>(h));
    int64_t run = 0;
    for (int64_t y = 0; y < h; ++y) {
      run = rows[y * w + x] ? run + 1 : 0;
      up[y] = run;
    }
    run = 0;
    for (int64_t y = h - 1; y >= 0; --y) {
      run = rows[y * w + x] ? run + 1 : 0;
      bits[y * w + x] = up[y] > radius && run > radius;
    }
  }
  return BinaryMask(f, std::move(bits));
}

BinaryMask Dilate(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  const int64_t r = radius;
  const PixelRect f{mask.x0() - r, mask.y0() - r, mask.width() + 2 * r,
                    mask.height() + 2 * r};
  const int64_t w = f.width, h = f.height;
  // Distance to the nearest set pixel along a row, then along a column.
  std::vector<uint8_t> rows(static_cast<size_t>(w * h), 0);
  for (int64_t y = 0; y < h; ++y) {
    int64_t last = std::numeric_limits<int32_t>::min();
    std::vector<int64_t> dist(static_cast<size_t>(w));
    for (int64_t x = 0; x < w; ++x) {
      if (mask.At(f.x + x, f.y + y)) last = x;
      dist[x] = x - last;
    }
    last = std::numeric_limits<int32_t>::max();
    for (int64_t x = w - 1; x >= 0; --x) {
      if (mask.At(f.x + x, f.y + y)) last = x;
      rows[y * w + x] = std::min(dist[x], last - x) <= r;
    }
  }
  std::vector<uint8_t> bits(static_cast<size_t>(w * h), 0);
  for (int64_t x = 0; x < w; ++x) {
    int64_t last = std::numeric_limits<int32_t>::min();
    std::vector<int64_t> dist(static_cast<size_t>(h));
    for (int64_t y = 0; y < h; ++y) {
      if (rows[y * w + x]) last = y;
      dist[y] = y - last;
    }
    last = std::numeric_limits<int32_t>::max();
    for (int64_t y = h - 1; y >= 0; --y) {
      if (rows[y * w + x]) last = y;
      bits[y * w + x] = std::min(dist[y], last - y) <= r;
    }
  }
  return BinaryMask(f, std::move(bits));
}

SceneRaster MakeScene(std::string name, const SceneOptions& options,
                      uint64_t seed) {
  if (options.size <= 0 || options.crowns < 0 || options.gsd <= 0 ||
      options.min_radius_px <= 0 ||
      options.max_radius_px < options.min_radius_px || options.min_gap_px < 0) {
    throw ValidationError("invalid scene options");
  }
  SceneRaster scene;
  scene.name = std::move(name);
  scene.grid.width = options.size;
  scene.grid.height = options.size;
  scene.grid.gsd = options.gsd;
  scene.grid.transform = GeoTransform::NorthUp(0.0, 0.0, options.gsd);

  struct Disc {
    double x, y, r;
  };
  std::vector<Disc> discs;
  Rng rng(DeriveSeed(seed, {kStreamPlacement}));
  const double gap = options.min_gap_px;
  auto clear_of_pitch = [&](double c, double r) {
    if (options.avoid_pitch <= 0) return true;
    const double p = static_cast<double>(options.avoid_pitch);
    const double nearest = std::round(c / p) * p;
    return std::abs(c - nearest) >= r + gap;
  };
  const int64_t max_attempts = 500 * static_cast<int64_t>(options.crowns) + 100;
  for (int64_t attempt = 0;
       attempt < max_attempts &&
       static_cast<int>(discs.size()) < options.crowns;
       ++attempt) {
    const double r = rng.Uniform(options.min_radius_px, options.max_radius_px);
    const double lo = r + gap, hi = static_cast<double>(options.size) - r - gap;
    if (hi <= lo) continue;
    const Disc d{rng.Uniform(lo, hi), rng.Uniform(lo, hi), r};
    if (!clear_of_pitch(d.x, r) || !clear_of_pitch(d.y, r)) continue;
    bool clear = true;
    for (const Disc& o : discs) {
      const double need = d.r + o.r + gap;
      if ((d.x - o.x) * (d.x - o.x) + (d.y - o.y) * (d.y - o.y) < need * need) {
        clear = false;
        break;
      }
    }
    if (clear) discs.push_back(d);
  }
  if (static_cast<int>(discs.size()) < options.crowns) {
    throw ValidationError("could only place " + std::to_string(discs.size()) +
                          " of " + std::to_string(options.crowns) + " crowns");
  }

  for (const Disc& d : discs) {
    // Star outline with every vertex between 0.6 r and r.
    const int vertices = 9 + static_cast<int>(rng.UniformInt(0, 6));
    const double step = 2.0 * std::numbers::pi / vertices;
    const double phase = rng.Uniform(0.0, step);
    Ring ring;
    for (int v = 0; v < vertices; ++v) {
      const double angle = phase + step * (v + rng.Uniform(0.1, 0.9));
      const double rv = rng.Uniform(0.6 * d.r, d.r);
      ring.push_back({d.x + rv * std::cos(angle), d.y + rv * std::sin(angle)});
    }
    CrownInstance c;
    c.id = static_cast<int64_t>(scene.truths.size());
    c.polygon = Polygon::Create(std::move(ring));
    c.mask = Rasterize(*c.polygon).Trimmed();
    if (c.mask->Empty()) continue;
    DeriveArea(c, options.gsd);
    scene.truths.push_back(std::move(c));
  }

  scene.image = Image(options.size, options.size, 3);
  Rng tex(DeriveSeed(seed, {kStreamTexture}));
  for (int64_t y = 0; y < options.size; ++y) {
    for (int64_t x = 0; x < options.size; ++x) {
      uint8_t* px = scene.image.At(x, y);
      const auto n = static_cast<int>(tex.UniformInt(0, 24));
      px[0] = static_cast<uint8_t>(96 + n);
      px[1] = static_cast<uint8_t>(80 + n);
      px[2] = static_cast<uint8_t>(60 + n);
    }
  }
  for (const CrownInstance& c : scene.truths) {
    const auto g = static_cast<int>(tex.UniformInt(110, 200));
    const BinaryMask& m = *c.mask;
    for (int64_t y = m.y0(); y < m.y0() + m.height(); ++y) {
      for (int64_t x = m.x0(); x < m.x0() + m.width(); ++x) {
        if (!m.At(x, y)) continue;
        uint8_t* px = scene.image.At(x, y);
        const auto n = static_cast<int>(tex.UniformInt(0, 30));
        px[0] = static_cast<uint8_t>(30 + n);
        px[1] = static_cast<uint8_t>(g + n / 2);
        px[2] = static_cast<uint8_t>(40 + n);
      }
    }
  }
  return scene;
}

std::map<std::string, std::vector<CrownInstance>> TruthsByRaster(
    std::span<const SceneRaster> scenes) {
  std::map<std::string, std::vector<CrownInstance>> out;
  for (const SceneRaster& s : scenes) {
    if (!out.emplace(s.name, s.truths).second) {
      throw ValidationError("duplicate raster name '" + s.name + "'");
    }
  }
  return out;
}

PipelineRun RunOnScenes(std::span<const SceneRaster> scenes, Detector& detector,
                        BoxPromptSegmenter& segmenter,
                        const EndToEndConfig& config) {
  config.tiling.Validate();
  config.pipeline.Validate();
  TruthsByRaster(scenes);  // rejects duplicate names
  BackendGate gate(detector, segmenter);
  PipelineRun run;
  for (const SceneRaster& scene : scenes) {
    scene.grid.Validate();
    if (scene.image.width != scene.grid.width ||
        scene.image.height != scene.grid.height) {
      throw ValidationError("image size does not match grid of '" +
                            scene.name + "'");
    }
    std::vector<Tile> tiles =
        CutTiles(scene.image, scene.grid, config.tiling, scene.truths);
    std::vector<std::vector<CrownInstance>> preds(tiles.size());
    std::vector<PipelineStats> stats(tiles.size());
    ParallelFor(tiles.size(), [&](size_t i) {
      const Tile& t = tiles[i];
      const TileView view{scene.name, t.id, t.window, t.pixels, t.validity};
      preds[i] = RunWith(
          view, [&](const TileView& v) { return gate.Detect(v); },
          [&](const TileView& v, std::span<const Box> p) {
            return gate.Segment(v, p);
          },
          config.pipeline, &stats[i]);
    });

    RasterCase rc;
    rc.name = scene.name;
    rc.gsd = scene.grid.gsd;
    rc.layout.raster_extent = scene.grid.Extent();
    rc.ground_truths = scene.truths;
    for (size_t i = 0; i < tiles.size(); ++i) {
      run.stats += stats[i];
      rc.layout.windows[tiles[i].id] = tiles[i].window;
      rc.tile_predictions[tiles[i].id] = preds[i];
      TileCase tc;
      tc.id = scene.name + "/" + tiles[i].id;
      tc.gsd = scene.grid.gsd;
      tc.predictions = std::move(preds[i]);
      tc.ground_truths = std::move(tiles[i].annotations);
      run.tile_cases.push_back(std::move(tc));
    }
    run.raster_cases.push_back(std::move(rc));
  }
  return run;
}

EndToEndReport EndToEndEval(std::span<const SceneRaster> scenes,
                            Detector& detector, BoxPromptSegmenter& segmenter,
                            const EndToEndConfig& config) {
  const PipelineRun run = RunOnScenes(scenes, detector, segmenter, config);
  EndToEndReport report;
  report.stats = run.stats;
  report.tile = CocoSummary(run.tile_cases, config.thresholds, config.tile_eval);
  report.raster = EvaluateRasters(run.raster_cases, config.aggregation,
                                  config.thresholds, config.raster_eval);
  return report;
}

}  // namespace crowneval
