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
#include "crowneval/config.h"

#include <algorithm>
#include <cctype>

#include "crowneval/errors.h"

namespace crowneval {

namespace {

bool IsIndex(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

template <typename Enum, typename ParseFn>
Enum ParseEnum(const Json& j, std::string_view where, ParseFn parse) {
  if (!j.is_string()) throw ValidationError(std::string(where) + " must be a string");
  const auto v = parse(j.get<std::string>());
  if (!v) {
    throw ValidationError(std::string(where) + ": unknown value '" +
                          j.get<std::string>() + "'");
  }
  return *v;
}

template <typename Enum, typename ParseFn>
Enum EnumField(const Json& j, std::string_view where, const char* key,
               Enum fallback, ParseFn parse) {
  if (!j.contains(key)) return fallback;
  return ParseEnum<Enum>(j[key], std::string(where) + "." + key, parse);
}

}  // namespace

Json ApplyOverrides(Json config, std::span<const std::string> overrides) {
  for (const std::string& o : overrides) {
    const size_t eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("override '" + o + "' must look like key=value");
    }
    const std::string path = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    Json value;
    try {
      value = Json::parse(text);
    } catch (const Json::parse_error&) {
      value = text;
    }
    Json* node = &config;
    size_t start = 0;
    while (true) {
      const size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      if (key.empty()) throw ValidationError("empty segment in '" + path + "'");
      const bool last = dot == std::string::npos;
      if (node->is_array() && IsIndex(key)) {
        const size_t i = std::stoul(key);
        if (i >= node->size()) {
          throw ValidationError("index " + key + " out of range in '" + path + "'");
        }
        node = &(*node)[i];
      } else {
        if (node->is_null()) *node = Json::object();
        if (!node->is_object()) {
          throw ValidationError("'" + path + "' descends into a non-object");
        }
        node = &(*node)[key];
      }
      if (last) break;
      start = dot + 1;
    }
    *node = std::move(value);
  }
  return config;
}

void CheckKeys(const Json& j, std::string_view where,
               std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    throw ValidationError(std::string(where) + " must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown key " + std::string(where) + "." + key);
    }
  }
}

TilingSpec ParseTiling(const Json& j) {
  CheckKeys(j, "tiling", {"tile_size", "overlap", "min_annotation_area_ratio"});
  TilingSpec s;
  s.tile_size = Field(j, "tiling", "tile_size", s.tile_size);
  s.overlap = Field(j, "tiling", "overlap", s.overlap);
  s.min_annotation_area_ratio = Field(j, "tiling", "min_annotation_area_ratio",
                                      s.min_annotation_area_ratio);
  s.Validate();
  return s;
}

AggregationConfig ParseAggregation(const Json& j) {
  CheckKeys(j, "aggregation", {"nms_iou", "confidence_threshold", "nms_geometry",
                               "filter_order", "edge_policy"});
  AggregationConfig c;
  c.nms_iou = Field(j, "aggregation", "nms_iou", c.nms_iou);
  c.confidence_threshold =
      Field(j, "aggregation", "confidence_threshold", c.confidence_threshold);
  c.nms_geometry = EnumField(j, "aggregation", "nms_geometry", c.nms_geometry,
                             ParseNmsGeometry);
  c.filter_order = EnumField(j, "aggregation", "filter_order", c.filter_order,
                             ParseFilterOrder);
  c.edge_policy =
      EnumField(j, "aggregation", "edge_policy", c.edge_policy, ParseEdgePolicy);
  c.Validate();
  return c;
}

ThresholdSet ParseThresholds(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "coco") return ThresholdSet::Coco();
  try {
    return ThresholdSet(j.get<std::vector<double>>());
  } catch (const Json::exception&) {
    throw ValidationError("thresholds must be \"coco\" or an array of numbers");
  }
}

ThresholdGrid ParseThresholdGrid(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "default") {
    return ThresholdGrid::Default();
  }
  CheckKeys(j, "grid", {"nms_iou", "confidence"});
  ThresholdGrid g = ThresholdGrid::Default();
  g.nms_iou = Field(j, "grid", "nms_iou", g.nms_iou);
  g.confidence = Field(j, "grid", "confidence", g.confidence);
  g.Validate();
  return g;
}

PipelineConfig ParsePipelineConfig(const Json& j) {
  CheckKeys(j, "pipeline", {"max_instances", "combiner", "seed"});
  PipelineConfig c;
  const auto cap = Field<int64_t>(j, "pipeline", "max_instances",
                                  static_cast<int64_t>(c.max_instances));
  if (cap < 1) throw ValidationError("pipeline.max_instances must be >= 1");
  c.max_instances = static_cast<size_t>(cap);
  c.combiner = EnumField(j, "pipeline", "combiner", c.combiner, ParseScoreCombiner);
  c.seed = Field(j, "pipeline", "seed", c.seed);
  return c;
}

DetectorNoise ParseDetectorNoise(const Json& j) {
  CheckKeys(j, "detector", {"kind", "shift_sigma_px", "scale_sigma", "drop_rate",
                            "spurious_rate", "seed"});
  DetectorNoise n;
  n.shift_sigma_px = Field(j, "detector", "shift_sigma_px", n.shift_sigma_px);
  n.scale_sigma = Field(j, "detector", "scale_sigma", n.scale_sigma);
  n.drop_rate = Field(j, "detector", "drop_rate", n.drop_rate);
  n.spurious_rate = Field(j, "detector", "spurious_rate", n.spurious_rate);
  return n;
}

SegmenterNoise ParseSegmenterNoise(const Json& j) {
  CheckKeys(j, "segmenter", {"kind", "erode_radius", "dilate_radius",
                             "boundary_flip_rate", "clip_to_prompt", "seed"});
  SegmenterNoise n;
  n.erode_radius = Field(j, "segmenter", "erode_radius", n.erode_radius);
  n.dilate_radius = Field(j, "segmenter", "dilate_radius", n.dilate_radius);
  n.boundary_flip_rate =
      Field(j, "segmenter", "boundary_flip_rate", n.boundary_flip_rate);
  n.clip_to_prompt = Field(j, "segmenter", "clip_to_prompt", n.clip_to_prompt);
  return n;
}

SceneOptions ParseSceneOptions(const Json& j) {
  CheckKeys(j, "scenes", {"count", "seed", "size", "crowns", "gsd", "min_radius_px",
                          "max_radius_px", "min_gap_px", "avoid_pitch"});
  SceneOptions o;
  o.size = Field(j, "scenes", "size", o.size);
  o.crowns = Field(j, "scenes", "crowns", o.crowns);
  o.gsd = Field(j, "scenes", "gsd", o.gsd);
  o.min_radius_px = Field(j, "scenes", "min_radius_px", o.min_radius_px);
  o.max_radius_px = Field(j, "scenes", "max_radius_px", o.max_radius_px);
  o.min_gap_px = Field(j, "scenes", "min_gap_px", o.min_gap_px);
  o.avoid_pitch = Field(j, "scenes", "avoid_pitch", o.avoid_pitch);
  return o;
}

IouKind ParseIouKindJson(const Json& j) {
  return ParseEnum<IouKind>(j, "iou_kind", ParseIouKind);
}

Objective ParseObjectiveJson(const Json& j) {
  return ParseEnum<Objective>(j, "objective", ParseObjective);
}

Json ToJson(const TilingSpec& spec) {
  return {{"tile_size", spec.tile_size},
          {"overlap", spec.overlap},
          {"min_annotation_area_ratio", spec.min_annotation_area_ratio}};
}

Json ToJson(const AggregationConfig& c) {
  return {{"nms_iou", c.nms_iou},
          {"confidence_threshold", c.confidence_threshold},
          {"nms_geometry", NmsGeometryName(c.nms_geometry)},
          {"filter_order", FilterOrderName(c.filter_order)},
          {"edge_policy", EdgePolicyName(c.edge_policy)}};
}

Json ToJson(const PipelineConfig& c) {
  return {{"max_instances", c.max_instances},
          {"combiner", ScoreCombinerName(c.combiner)},
          {"seed", c.seed}};
}

Json ToJson(const ThresholdGrid& g) {
  return {{"nms_iou", g.nms_iou}, {"confidence", g.confidence}};
}

}  // namespace crowneval
