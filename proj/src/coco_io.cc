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
#include "crowneval/coco_io.h"

#include <map>

#include "crowneval/errors.h"

namespace crowneval {

namespace {

CocoImage ParseImage(const Json& j) {
  CocoImage img;
  img.id = j.at("id").get<int64_t>();
  img.file_name = j.value("file_name", std::string());
  img.width = j.at("width").get<int64_t>();
  img.height = j.at("height").get<int64_t>();
  img.raster = j.value("raster", std::string());
  if (j.contains("window")) {
    const auto w = j["window"].get<std::vector<int64_t>>();
    if (w.size() != 4) throw ValidationError("image window must be [x, y, w, h]");
    img.window = PixelRect{w[0], w[1], w[2], w[3]};
  }
  if (img.width <= 0 || img.height <= 0) {
    throw ValidationError("image " + std::to_string(img.id) +
                          " has a non-positive size");
  }
  return img;
}

CrownInstance ParseAnnotation(const Json& a) {
  CrownInstance c;
  c.id = a.value("id", int64_t{0});
  if (a.contains("score")) {
    c.score = a["score"].get<double>();
    c.source.kind = SourceKind::kPrediction;
  }
  const Json& seg = a.at("segmentation");
  if (seg.is_object()) {
    c.mask = DecodeRle(ParseRleJson(seg)).Trimmed();
  } else if (seg.is_array()) {
    std::vector<Polygon> parts;
    for (const Json& flat : seg) {
      const auto xy = flat.get<std::vector<double>>();
      if (xy.size() % 2 != 0 || xy.size() < 6) {
        throw ValidationError("polygon needs an even count of >= 6 numbers");
      }
      Ring ring;
      for (size_t i = 0; i < xy.size(); i += 2) ring.push_back({xy[i], xy[i + 1]});
      parts.push_back(Polygon::Create(std::move(ring)));
    }
    if (parts.empty()) throw ValidationError("empty polygon segmentation");
    if (parts.size() == 1) {
      c.polygon = std::move(parts[0]);
    } else {
      BinaryMask m(PixelRect{0, 0, 0, 0});
      for (const Polygon& p : parts) m = MaskOr(m, Rasterize(p));
      c.mask = m.Trimmed();
    }
  } else {
    throw ValidationError("unsupported segmentation encoding");
  }
  ValidateInstance(c);
  return c;
}

template <typename Fn>
auto Annotate(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(what + ": " + e.what());
  } catch (const Json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

void AttachAnnotations(const Json& annotations, std::vector<CocoTile>& tiles) {
  std::map<int64_t, size_t> index;
  for (size_t i = 0; i < tiles.size(); ++i) {
    if (!index.emplace(tiles[i].image.id, i).second) {
      throw ValidationError("duplicate image id " +
                            std::to_string(tiles[i].image.id));
    }
  }
  if (!annotations.is_array()) {
    throw ValidationError("annotations must be an array");
  }
  for (size_t k = 0; k < annotations.size(); ++k) {
    const Json& a = annotations[k];
    const int64_t image_id = Annotate("annotation " + std::to_string(k), [&] {
      return a.at("image_id").get<int64_t>();
    });
    const auto it = index.find(image_id);
    if (it == index.end()) {
      throw ValidationError("annotation " + std::to_string(k) +
                            " references missing image id " +
                            std::to_string(image_id));
    }
    CocoTile& tile = tiles[it->second];
    tile.instances.push_back(Annotate("annotation " + std::to_string(k), [&] {
      return ParseAnnotation(a);
    }));
  }
}

std::vector<double> Flatten(const Ring& ring) {
  std::vector<double> out;
  for (const Point& p : ring) {
    out.push_back(p.x);
    out.push_back(p.y);
  }
  return out;
}

}  // namespace

RleMask ParseRleJson(const Json& j) {
  const auto size = j.at("size").get<std::vector<int64_t>>();
  if (size.size() != 2) throw ValidationError("RLE size must be [h, w]");
  RleMask rle{size[0], size[1], {}};
  const Json& counts = j.at("counts");
  if (counts.is_string()) {
    rle.counts = RleCountsFromString(counts.get<std::string>());
  } else {
    rle.counts = counts.get<std::vector<uint64_t>>();
  }
  DecodeRle(rle);  // validates the sum
  return rle;
}

Json RleToJson(const RleMask& rle) {
  return {{"size", {rle.height, rle.width}},
          {"counts", RleCountsToString(rle.counts)}};
}

std::vector<CocoTile> ParseCoco(const Json& doc) {
  if (!doc.is_object() || !doc.contains("images")) {
    throw ValidationError("COCO document needs an \"images\" array");
  }
  std::vector<CocoTile> tiles;
  for (size_t i = 0; i < doc["images"].size(); ++i) {
    tiles.push_back({Annotate("image " + std::to_string(i),
                              [&] { return ParseImage(doc["images"][i]); }),
                     {}});
  }
  AttachAnnotations(doc.value("annotations", Json::array()), tiles);
  return tiles;
}

std::vector<CocoTile> LoadCoco(const std::filesystem::path& path) {
  const Json doc = ReadJsonFile(path);
  return Annotate(path.string(), [&] { return ParseCoco(doc); });
}

std::vector<CocoTile> ParseCocoResults(const Json& doc,
                                       std::span<const CocoImage> images) {
  std::vector<CocoTile> tiles;
  for (const CocoImage& img : images) tiles.push_back({img, {}});
  const Json& annotations =
      doc.is_object() ? doc.value("annotations", Json::array()) : doc;
  AttachAnnotations(annotations, tiles);
  for (CocoTile& t : tiles) {
    for (CrownInstance& c : t.instances) c.source.kind = SourceKind::kPrediction;
  }
  return tiles;
}

std::vector<CocoTile> LoadCocoResults(const std::filesystem::path& path,
                                      std::span<const CocoImage> images) {
  const Json doc = ReadJsonFile(path);
  return Annotate(path.string(), [&] { return ParseCocoResults(doc, images); });
}

Json CocoToJson(std::span<const CocoTile> tiles) {
  Json images = Json::array();
  Json annotations = Json::array();
  int64_t next_id = 1;
  for (const CocoTile& t : tiles) {
    const CocoImage& img = t.image;
    Json ij = {{"id", img.id},
               {"file_name", img.file_name},
               {"width", img.width},
               {"height", img.height}};
    if (!img.raster.empty()) ij["raster"] = img.raster;
    if (img.window) {
      ij["window"] = {img.window->x, img.window->y, img.window->width,
                      img.window->height};
    }
    images.push_back(ij);
    const PixelRect frame{0, 0, img.width, img.height};
    for (const CrownInstance& c : t.instances) {
      Json a = {{"id", next_id++}, {"image_id", img.id}, {"category_id", 1},
                {"iscrowd", 0}};
      const Box box = InstanceBox(c);
      a["bbox"] = {box.x0, box.y0, box.Width(), box.Height()};
      a["area"] = CrownAreaPx(c);
      if (c.polygon && c.polygon->holes().empty()) {
        a["segmentation"] = Json::array({Flatten(c.polygon->exterior())});
      } else {
        const BinaryMask m = InstanceMask(c);
        const auto bounds = m.TightBounds();
        if (bounds && Intersect(*bounds, frame) != *bounds) {
          throw ValidationError("instance " + std::to_string(c.id) +
                                " extends outside image " +
                                std::to_string(img.id));
        }
        a["segmentation"] = RleToJson(EncodeRle(m, frame));
      }
      if (c.source.kind != SourceKind::kGroundTruth) a["score"] = c.score;
      annotations.push_back(a);
    }
  }
  return {{"images", images},
          {"annotations", annotations},
          {"categories", Json::array({{{"id", 1}, {"name", "tree"}}})}};
}

void SaveCoco(const std::filesystem::path& path, std::span<const CocoTile> tiles) {
  WriteTextFile(path, CanonicalJson(CocoToJson(tiles)));
}

}  // namespace crowneval
