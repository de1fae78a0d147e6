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
#include "crowneval/geojson_io.h"

#include "crowneval/errors.h"

namespace crowneval {

namespace {

Ring ParseRing(const Json& coords, const GeoTransform& t) {
  if (!coords.is_array()) throw ValidationError("GeoJSON ring is not an array");
  Ring ring;
  for (const Json& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() ||
        !pos[1].is_number()) {
      throw ValidationError("GeoJSON position must be [x, y]");
    }
    ring.push_back(t.WorldToPixel({pos[0].get<double>(), pos[1].get<double>()}));
  }
  return ring;
}

Polygon ParsePolygon(const Json& rings, const GeoTransform& t) {
  if (!rings.is_array() || rings.empty()) {
    throw ValidationError("GeoJSON polygon needs at least one ring");
  }
  Ring exterior = ParseRing(rings[0], t);
  std::vector<Ring> holes;
  for (size_t i = 1; i < rings.size(); ++i) holes.push_back(ParseRing(rings[i], t));
  return Polygon::Create(std::move(exterior), std::move(holes));
}

Json RingToJson(const Ring& ring, const GeoTransform& t) {
  Json out = Json::array();
  for (const Point& p : ring) {
    const Point w = t.PixelToWorld(p);
    out.push_back({w.x, w.y});
  }
  if (!ring.empty()) out.push_back(out.front());
  return out;
}

}  // namespace

std::vector<GeoFeature> ParseGeoJsonFeatures(const Json& doc,
                                             const GeoTransform& transform) {
  if (!transform.Invertible()) {
    throw ValidationError("geotransform is not invertible");
  }
  if (!doc.is_object() || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw ValidationError("GeoJSON must be a FeatureCollection");
  }
  std::vector<GeoFeature> out;
  const Json& features = doc["features"];
  for (size_t i = 0; i < features.size(); ++i) {
    const Json& f = features[i];
    const Json& geom = f.contains("geometry") ? f["geometry"] : Json();
    if (!geom.is_object() || !geom.contains("type")) {
      throw ValidationError("feature " + std::to_string(i) + " has no geometry");
    }
    const Json props = f.contains("properties") && f["properties"].is_object()
                           ? f["properties"]
                           : Json::object();
    const std::string type = geom["type"].get<std::string>();
    try {
      if (type == "Polygon") {
        out.push_back({ParsePolygon(geom.at("coordinates"), transform), props, i});
      } else if (type == "MultiPolygon") {
        for (const Json& part : geom.at("coordinates")) {
          out.push_back({ParsePolygon(part, transform), props, i});
        }
      } else {
        throw ValidationError("geometry type " + type + " is not polygonal");
      }
    } catch (const ValidationError& e) {
      throw ValidationError("feature " + std::to_string(i) + ": " + e.what());
    } catch (const Json::exception& e) {
      throw ValidationError("feature " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CrownInstance> ParseGeoJsonCrowns(const Json& doc,
                                              const RasterGrid& grid) {
  std::vector<GeoFeature> features = ParseGeoJsonFeatures(doc, grid.transform);
  std::vector<CrownInstance> out;
  for (size_t k = 0; k < features.size(); ++k) {
    GeoFeature& f = features[k];
    if ((k > 0 && features[k - 1].feature_index == f.feature_index) ||
        (k + 1 < features.size() &&
         features[k + 1].feature_index == f.feature_index)) {
      throw ValidationError("feature " + std::to_string(f.feature_index) +
                            ": a crown must be a single polygon");
    }
    CrownInstance c;
    c.id = static_cast<int64_t>(f.feature_index);
    const Json& p = f.properties;
    try {
      if (p.contains("id") && p["id"].is_number_integer()) {
        c.id = p["id"].get<int64_t>();
      }
      if (p.contains("score") && !p["score"].is_null()) {
        c.score = p["score"].get<double>();
        c.source.kind = SourceKind::kPrediction;
      }
      if (p.contains("annotator") && p["annotator"].is_string()) {
        c.source.kind = SourceKind::kAnnotator;
        c.source.annotator = p["annotator"].get<std::string>();
      }
    } catch (const Json::exception& e) {
      throw ValidationError("feature " + std::to_string(f.feature_index) +
                            ": bad property: " + e.what());
    }
    c.polygon = std::move(f.polygon);
    ValidateInstance(c);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CrownInstance> LoadGeoJson(const std::filesystem::path& path,
                                       const RasterGrid& grid) {
  try {
    return ParseGeoJsonCrowns(ReadJsonFile(path), grid);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::map<std::string, std::vector<Polygon>> LoadGeoJsonZones(
    const std::filesystem::path& path, const GeoTransform& transform,
    const std::string& property) {
  std::map<std::string, std::vector<Polygon>> out;
  try {
    for (GeoFeature& f : ParseGeoJsonFeatures(ReadJsonFile(path), transform)) {
      if (!f.properties.contains(property)) continue;
      const Json& v = f.properties[property];
      const std::string key = v.is_string() ? v.get<std::string>() : v.dump();
      out[key].push_back(std::move(f.polygon));
    }
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return out;
}

Json CrownsToGeoJson(std::span<const CrownInstance> crowns,
                     const RasterGrid& grid) {
  Json features = Json::array();
  for (const CrownInstance& c : crowns) {
    if (!c.polygon) {
      throw ValidationError("crown " + std::to_string(c.id) +
                            " has no polygon; GeoJSON export needs polygons");
    }
    Json rings = Json::array();
    rings.push_back(RingToJson(c.polygon->exterior(), grid.transform));
    for (const Ring& h : c.polygon->holes()) {
      rings.push_back(RingToJson(h, grid.transform));
    }
    Json props = {{"id", c.id}};
    if (c.source.kind != SourceKind::kGroundTruth) props["score"] = c.score;
    if (c.source.kind == SourceKind::kAnnotator) {
      props["annotator"] = c.source.annotator;
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}},
                        {"properties", props}});
  }
  Json doc = {{"type", "FeatureCollection"}, {"features", features}};
  if (!grid.crs.empty()) {
    doc["crs"] = {{"type", "name"}, {"properties", {{"name", grid.crs}}}};
  }
  return doc;
}

void SaveGeoJson(const std::filesystem::path& path,
                 std::span<const CrownInstance> crowns, const RasterGrid& grid) {
  WriteTextFile(path, CanonicalJson(CrownsToGeoJson(crowns, grid)));
}

}  // namespace crowneval
