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
#include "testing/fixtures.h"

#include <cmath>
#include <numbers>

namespace crowneval::testing {

Polygon RandomStar(Rng& rng, double cx, double cy, double r_min, double r_max,
                   int vertices) {
  Ring ring;
  const double step = 2.0 * std::numbers::pi / vertices;
  const double phase = rng.Uniform(0.0, step);
  for (int i = 0; i < vertices; ++i) {
    const double angle = phase + step * (i + rng.Uniform(0.1, 0.9));
    const double r = rng.Uniform(r_min, r_max);
    ring.push_back({cx + r * std::cos(angle), cy + r * std::sin(angle)});
  }
  return Polygon::Create(std::move(ring));
}

Polygon Rectangle(double x0, double y0, double x1, double y1) {
  return Polygon::Create({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

CrownInstance BoxCrown(int64_t x, int64_t y, int64_t w, int64_t h, double score,
                       int64_t id) {
  CrownInstance c;
  c.id = id;
  c.score = score;
  c.mask = BinaryMask(PixelRect{x, y, w, h},
                      std::vector<uint8_t>(static_cast<size_t>(w * h), 1));
  return c;
}

CrownInstance PolygonCrown(const Polygon& polygon, double score, int64_t id) {
  CrownInstance c;
  c.id = id;
  c.score = score;
  c.mask = Rasterize(polygon);
  return c;
}

std::vector<CrownInstance> RandomCrowns(Rng& rng, int count, int64_t canvas,
                                        double r_min, double r_max) {
  std::vector<CrownInstance> out;
  while (static_cast<int>(out.size()) < count) {
    const double cx = rng.Uniform(r_max, canvas - r_max);
    const double cy = rng.Uniform(r_max, canvas - r_max);
    const int n = static_cast<int>(rng.UniformInt(5, 12));
    CrownInstance c = PolygonCrown(RandomStar(rng, cx, cy, r_min, r_max, n),
                                   1.0, static_cast<int64_t>(out.size()));
    if (c.mask->Empty()) continue;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CrownInstance> PerturbedCopies(Rng& rng,
                                           const std::vector<CrownInstance>& truths,
                                           double keep, int max_shift,
                                           int spurious, int64_t canvas) {
  std::vector<CrownInstance> out;
  for (const CrownInstance& t : truths) {
    if (!rng.Bernoulli(keep)) continue;
    CrownInstance p = Translated(t, rng.UniformInt(-max_shift, max_shift),
                                 rng.UniformInt(-max_shift, max_shift));
    p.source.kind = SourceKind::kPrediction;
    p.score = DiscreteScore(rng, 10);
    p.area_m2.reset();
    out.push_back(std::move(p));
  }
  for (CrownInstance& s : RandomCrowns(rng, spurious, canvas, 1, 6)) {
    s.source.kind = SourceKind::kPrediction;
    s.score = DiscreteScore(rng, 10) * 0.5;
    out.push_back(std::move(s));
  }
  return out;
}

double DiscreteScore(Rng& rng, int levels) {
  return static_cast<double>(rng.UniformInt(1, levels)) / levels;
}

std::vector<std::vector<double>> RandomDenseTable(Rng& rng, size_t rows,
                                                  size_t cols,
                                                  double zero_fraction) {
  std::vector<std::vector<double>> t(rows, std::vector<double>(cols, 0.0));
  for (auto& row : t) {
    for (double& v : row) {
      if (rng.Bernoulli(zero_fraction)) continue;
      v = static_cast<double>(rng.UniformInt(1, 20)) / 20.0;
    }
  }
  return t;
}

AnnotatorPair RandomAnnotatorPair(Rng& rng, int cells, double pitch) {
  AnnotatorPair out;
  const double r_max = 0.4 * pitch;
  auto crown = [&](double cx, double cy, int64_t id, const std::string& who) {
    CrownInstance c;
    c.id = id;
    c.source = {SourceKind::kAnnotator, who};
    c.polygon = RandomStar(rng, cx, cy, 0.3 * r_max, r_max,
                           static_cast<int>(rng.UniformInt(6, 14)));
    return c;
  };
  int64_t id = 0;
  for (int r = 0; r < cells; ++r) {
    for (int c = 0; c < cells; ++c) {
      const double cx = (c + 0.5) * pitch, cy = (r + 0.5) * pitch;
      const double u = rng.Uniform();
      if (u < 0.6) {
        CrownInstance a = crown(cx, cy, id, "a");
        CrownInstance b = a;
        b.source.annotator = "b";
        const double wiggle = 0.5 * pitch - r_max;
        b.polygon = a.polygon->Translated(rng.Uniform(-wiggle, wiggle),
                                          rng.Uniform(-wiggle, wiggle));
        if (rng.Bernoulli(0.3)) b = crown(cx, cy, id, "b");
        out.first.push_back(std::move(a));
        out.second.push_back(std::move(b));
      } else if (u < 0.75) {
        out.first.push_back(crown(cx, cy, id, "a"));
      } else if (u < 0.85) {
        out.second.push_back(crown(cx, cy, id, "b"));
      }
      ++id;
    }
  }
  for (auto* set : {&out.first, &out.second}) {
    for (CrownInstance& c : *set) EnsureMask(c);
  }
  return out;
}

std::vector<int64_t> WindowOrigins(int64_t extent, int64_t size,
                                   int64_t stride) {
  std::vector<int64_t> out;
  if (size >= extent) return {0};
  for (int64_t o = 0; o + size <= extent; o += stride) out.push_back(o);
  if (out.back() + size < extent) out.push_back(extent - size);
  return out;
}

MultiTileFixture RandomMultiTile(Rng& rng, int64_t raster, int64_t tile,
                                 int64_t stride, int crowns, int max_jitter) {
  MultiTileFixture f;
  f.layout.raster_extent = PixelRect{0, 0, raster, raster};
  f.truths = RandomCrowns(rng, crowns, raster, 2, 9);
  int index = 0;
  for (int64_t y : WindowOrigins(raster, tile, stride)) {
    for (int64_t x : WindowOrigins(raster, tile, stride)) {
      const PixelRect w{x, y, tile, tile};
      const std::string id = "t" + std::to_string(index++);
      f.layout.windows[id] = w;
      std::vector<CrownInstance>& preds = f.predictions[id];
      for (const CrownInstance& t : f.truths) {
        const BinaryMask part = t.mask->Cropped(w).Trimmed();
        if (part.Empty() || rng.Bernoulli(0.1)) continue;
        const int64_t dx = rng.UniformInt(-max_jitter, max_jitter);
        const int64_t dy = rng.UniformInt(-max_jitter, max_jitter);
        const BinaryMask local =
            part.Translated(dx - w.x, dy - w.y).Cropped(PixelRect{0, 0, tile, tile});
        if (local.Empty()) continue;
        CrownInstance p;
        p.source.kind = SourceKind::kPrediction;
        p.mask = local.Trimmed();
        p.score = DiscreteScore(rng, 10);
        preds.push_back(std::move(p));
      }
      if (rng.Bernoulli(0.3)) {
        for (CrownInstance& s : RandomCrowns(rng, 1, tile, 1, 4)) {
          s.source.kind = SourceKind::kPrediction;
          s.score = DiscreteScore(rng, 10) * 0.5;
          preds.push_back(std::move(s));
        }
      }
    }
  }
  return f;
}

}  // namespace crowneval::testing
