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
#ifndef CROWNEVAL_PIPELINE_H_
#define CROWNEVAL_PIPELINE_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowneval/crown.h"
#include "crowneval/geometry.h"
#include "crowneval/raster_metrics.h"
#include "crowneval/tile_metrics.h"
#include "crowneval/tiler.h"

namespace crowneval {

// What a model sees of one tile. Boxes and masks it returns are tile-local.
struct TileView {
  std::string_view raster;   // raster name
  std::string_view tile_id;
  PixelRect window;          // raster frame
  const Image& pixels;
  const BinaryMask& validity;
};

struct Detection {
  Box box;
  double score = 0.0;
};

struct SegmentedMask {
  BinaryMask mask;  // tile-local frame
  double score = 0.0;
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::vector<Detection> Detect(const TileView& tile) = 0;
  // True when calls must not overlap; the harness then serializes them.
  virtual bool single_flight() const { return false; }
};

// Returns exactly one mask per prompt, in prompt order.
class BoxPromptSegmenter {
 public:
  virtual ~BoxPromptSegmenter() = default;
  virtual std::vector<SegmentedMask> Segment(const TileView& tile,
                                             std::span<const Box> prompts) = 0;
  virtual bool single_flight() const { return false; }
};

enum class ScoreCombiner { kProduct, kGeometricMean, kDetectionOnly };

std::string_view ScoreCombinerName(ScoreCombiner c);
std::optional<ScoreCombiner> ParseScoreCombiner(std::string_view name);
double CombineScores(ScoreCombiner c, double detection, double mask);

struct PipelineConfig {
  size_t max_instances = 300;
  ScoreCombiner combiner = ScoreCombiner::kProduct;
  uint64_t seed = 0;

  void Validate() const;
};

struct PipelineStats {
  int64_t tiles = 0;
  int64_t detections = 0;
  int64_t empty_boxes_dropped = 0;  // empty after clamping to the tile
  int64_t capped = 0;               // detections beyond max_instances
  int64_t empty_masks_dropped = 0;
  int64_t instances = 0;

  PipelineStats& operator+=(const PipelineStats& o);
};

// detect -> keep the max_instances best boxes (stable by score) -> segment ->
// combine scores. Boxes are clamped to the tile; empty masks are dropped and
// counted. Throws ValidationError when the segmenter breaks the one-mask-per-
// prompt contract or a score leaves [0, 1].
std::vector<CrownInstance> RunPipeline(const TileView& tile, Detector& detector,
                                       BoxPromptSegmenter& segmenter,
                                       const PipelineConfig& config,
                                       PipelineStats* stats = nullptr);

// Calls to single-flight backends are serialized through these locks.
class BackendGate {
 public:
  BackendGate(Detector& detector, BoxPromptSegmenter& segmenter);

  std::vector<Detection> Detect(const TileView& tile);
  std::vector<SegmentedMask> Segment(const TileView& tile,
                                     std::span<const Box> prompts);

 private:
  Detector& detector_;
  BoxPromptSegmenter& segmenter_;
  std::mutex detector_mu_;
  std::mutex segmenter_mu_;
};

struct DetectorNoise {
  double shift_sigma_px = 0.0;
  double scale_sigma = 0.0;     // log-normal box scale
  double drop_rate = 0.0;       // per crown, consistent across tiles
  double spurious_rate = 0.0;   // expected spurious boxes per visible crown
};

// Emits boxes of the ground-truth crowns visible in each tile. A crown is
// dropped everywhere or nowhere. Jitter is drawn per (crown, tile); the score
// is the box IoU between the jittered and the true box, so larger
// perturbations score lower. Spurious boxes score below 0.3.
class OracleDetector : public Detector {
 public:
  OracleDetector(std::map<std::string, std::vector<CrownInstance>> truths,
                 DetectorNoise noise, uint64_t seed);

  std::vector<Detection> Detect(const TileView& tile) override;

 private:
  std::map<std::string, std::vector<CrownInstance>> truths_;
  std::map<std::string, std::vector<BinaryMask>> masks_;
  DetectorNoise noise_;
  uint64_t seed_;
};

struct SegmenterNoise {
  int erode_radius = 0;
  int dilate_radius = 0;
  double boundary_flip_rate = 0.0;  // per boundary pixel
  bool clip_to_prompt = true;
};

// For each prompt, takes the visible ground-truth mask whose box has the
// highest IoU with the prompt (lowest index on ties), applies the corruption
// (square structuring element), and clips it to the prompt box. mask_score is
// the IoU of the returned mask with the uncorrupted visible mask. A prompt
// touching no crown box gets the crown with the nearest box center, unclipped,
// with score 0.
class OracleSegmenter : public BoxPromptSegmenter {
 public:
  OracleSegmenter(std::map<std::string, std::vector<CrownInstance>> truths,
                  SegmenterNoise noise, uint64_t seed);

  std::vector<SegmentedMask> Segment(const TileView& tile,
                                     std::span<const Box> prompts) override;

 private:
  std::map<std::string, std::vector<BinaryMask>> masks_;
  SegmenterNoise noise_;
  uint64_t seed_;
};

// Morphology with a (2r+1) x (2r+1) square; pixels outside the frame are
// unset. Dilation grows the frame by r on each side.
BinaryMask Erode(const BinaryMask& mask, int radius);
BinaryMask Dilate(const BinaryMask& mask, int radius);

// One orthomosaic with its reference crowns (raster frame).
struct SceneRaster {
  std::string name;
  RasterGrid grid;
  Image image;
  std::vector<CrownInstance> truths;
};

struct SceneOptions {
  int64_t size = 2000;
  int crowns = 60;
  double gsd = 0.05;
  double min_radius_px = 12.0;
  double max_radius_px = 60.0;
  double min_gap_px = 4.0;
  // When > 0, crowns stay at least min_gap_px away from every multiple of
  // this pitch on both axes (zero-overlap tile borders).
  int64_t avoid_pitch = 0;
};

// Plants non-overlapping star-shaped crowns over a textured background.
// Throws ValidationError when the requested crowns do not fit.
SceneRaster MakeScene(std::string name, const SceneOptions& options,
                      uint64_t seed);

struct EndToEndConfig {
  TilingSpec tiling;
  AggregationConfig aggregation;
  PipelineConfig pipeline;
  ThresholdSet thresholds = ThresholdSet::Coco();
  TileEvalOptions tile_eval;
  RasterEvalOptions raster_eval;
};

struct EndToEndReport {
  TileMetrics tile;
  RasterScore raster;
  PipelineStats stats;
};

// Outputs of running the pipeline over every tile of every raster.
struct PipelineRun {
  std::vector<TileCase> tile_cases;         // per tile, clipped ground truth
  std::vector<RasterCase> raster_cases;     // per raster, full ground truth
  PipelineStats stats;
};

PipelineRun RunOnScenes(std::span<const SceneRaster> scenes, Detector& detector,
                        BoxPromptSegmenter& segmenter,
                        const EndToEndConfig& config);

// Tiles -> pipeline -> tile metrics, and NMS aggregation -> raster metrics.
EndToEndReport EndToEndEval(std::span<const SceneRaster> scenes,
                            Detector& detector, BoxPromptSegmenter& segmenter,
                            const EndToEndConfig& config);

// Ground truth per raster name, the form the oracles take.
std::map<std::string, std::vector<CrownInstance>> TruthsByRaster(
    std::span<const SceneRaster> scenes);

}  // namespace crowneval

#endif  // CROWNEVAL_PIPELINE_H_
