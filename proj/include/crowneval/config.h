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
#ifndef CROWNEVAL_CONFIG_H_
#define CROWNEVAL_CONFIG_H_

#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

#include "crowneval/errors.h"
#include "crowneval/io_util.h"
#include "crowneval/pipeline.h"
#include "crowneval/raster_metrics.h"
#include "crowneval/thresholds.h"
#include "crowneval/tiler.h"

namespace crowneval {

// Applies "dotted.path=value" overrides. The value is parsed as JSON when
// possible and taken as a string otherwise; numeric path segments index
// arrays. Missing objects along the path are created. ValidationError on
// malformed overrides.
Json ApplyOverrides(Json config, std::span<const std::string> overrides);

// Throws ValidationError naming `where` when `j` is not an object or holds a
// key outside `allowed`. Unknown keys are errors so typos never pass silently.
void CheckKeys(const Json& j, std::string_view where,
               std::initializer_list<std::string_view> allowed);

// Section parsers; absent keys keep the library defaults.
TilingSpec ParseTiling(const Json& j);
AggregationConfig ParseAggregation(const Json& j);
ThresholdSet ParseThresholds(const Json& j);  // "coco" or an array
ThresholdGrid ParseThresholdGrid(const Json& j);  // "default" or an object
PipelineConfig ParsePipelineConfig(const Json& j);
DetectorNoise ParseDetectorNoise(const Json& j);
SegmenterNoise ParseSegmenterNoise(const Json& j);
SceneOptions ParseSceneOptions(const Json& j);
IouKind ParseIouKindJson(const Json& j);
Objective ParseObjectiveJson(const Json& j);

Json ToJson(const TilingSpec& spec);  // without the zone
Json ToJson(const AggregationConfig& config);
Json ToJson(const PipelineConfig& config);
Json ToJson(const ThresholdGrid& grid);

// Typed field access that turns JSON type errors into ValidationError.
template <typename T>
T Field(const Json& j, std::string_view where, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ValidationError(std::string(where) + "." + key + " has the wrong type");
  }
}

template <typename T>
T RequiredField(const Json& j, std::string_view where, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(std::string(where) + "." + key + " is required");
  }
  return Field<T>(j, where, key, T{});
}

}  // namespace crowneval

#endif  // CROWNEVAL_CONFIG_H_
