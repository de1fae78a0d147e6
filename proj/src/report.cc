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
#include "crowneval/report.h"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "crowneval/errors.h"

#ifndef CROWNEVAL_VERSION
#define CROWNEVAL_VERSION "0.0.0"
#endif

namespace crowneval {

namespace {

constexpr std::array<SizeClass, 5> kClasses = {
    SizeClass::kTiny, SizeClass::kSmall, SizeClass::kMedium, SizeClass::kLarge,
    SizeClass::kGiant};

Json Opt(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

Json OptVector(const std::vector<std::optional<double>>& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(Opt(x));
  return out;
}

Json ClassScoreJson(const RasterClassScore& c) {
  Json per = Json::array();
  for (const auto& f : c.per_threshold) per.push_back(f ? ToJson(*f) : Json());
  return {{"mrf1", Opt(c.mrf1)}, {"rf1", per}};
}

std::string Pad(std::string s, size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

std::string_view ToolVersion() { return CROWNEVAL_VERSION; }

Json RunManifest::ToJson() const {
  Json j = {{"command", command},
            {"config", config},
            {"inputs", inputs},
            {"seed", seed},
            {"tool_version", tool_version}};
  if (started_at) j["started_at"] = *started_at;
  return j;
}

RunManifest RunManifest::FromJson(const Json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    m.seed = j.value("seed", uint64_t{0});
    m.tool_version = j.value("tool_version", std::string());
    if (j.contains("started_at")) m.started_at = j["started_at"].get<std::string>();
    return m;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed run manifest: ") + e.what());
  }
}

Json ToJson(const TileMetrics& m) {
  Json per_class = Json::object();
  for (SizeClass c : kClasses) {
    const auto& cm = m.per_class[static_cast<size_t>(c)];
    per_class[std::string(SizeClassName(c))] = {{"map", Opt(cm.map)},
                                                {"mar", Opt(cm.mar)}};
  }
  return {{"thresholds", m.thresholds}, {"ap", OptVector(m.ap)},
          {"ar", OptVector(m.ar)},      {"map", Opt(m.map)},
          {"ap50", Opt(m.ap50)},        {"ap75", Opt(m.ap75)},
          {"mar", Opt(m.mar)},          {"ar50", Opt(m.ar50)},
          {"ar75", Opt(m.ar75)},        {"max_detections", m.max_detections},
          {"per_class", per_class}};
}

Json ToJson(const RasterF1& f) {
  return {{"precision", f.precision}, {"recall", f.recall}, {"f1", f.f1},
          {"tp", f.tp},               {"fp", f.fp},         {"fn", f.fn}};
}

Json ToJson(const RasterScore& s) {
  Json per_class = Json::object();
  for (SizeClass c : kClasses) {
    per_class[std::string(SizeClassName(c))] =
        ClassScoreJson(s.per_class[static_cast<size_t>(c)]);
  }
  Json all = ClassScoreJson(s.all);
  return {{"thresholds", s.thresholds},
          {"mrf1", all["mrf1"]},
          {"rf1", all["rf1"]},
          {"rf1_50", s.rf1_50 ? ToJson(*s.rf1_50) : Json()},
          {"rf1_75", s.rf1_75 ? ToJson(*s.rf1_75) : Json()},
          {"per_class", per_class}};
}

Json ToJson(const PipelineStats& s) {
  return {{"tiles", s.tiles},
          {"detections", s.detections},
          {"empty_boxes_dropped", s.empty_boxes_dropped},
          {"capped", s.capped},
          {"empty_masks_dropped", s.empty_masks_dropped},
          {"instances", s.instances}};
}

Json ToJson(const SizeDistribution& d) {
  Json counts = Json::object(), percent = Json::object();
  for (SizeClass c : kClasses) {
    const std::string name(SizeClassName(c));
    counts[name] = d.counts[static_cast<size_t>(c)];
    percent[name] = d.percent[static_cast<size_t>(c)];
  }
  return {{"counts", counts},
          {"percent", percent},
          {"total", d.total},
          {"mean_area_m2", d.mean_area_m2},
          {"median_area_m2", d.median_area_m2}};
}

Json ToJson(const std::map<std::string, SplitStats>& census) {
  Json out = Json::object();
  for (const auto& [name, s] : census) {
    out[name] = {{"crowns", s.crowns},
                 {"hectares", s.hectares},
                 {"sizes", ToJson(s.sizes)}};
  }
  return out;
}

Json ToJson(std::span<const AgreementEntry> entries) {
  Json out = Json::array();
  for (const AgreementEntry& e : entries) {
    out.push_back({{"prediction", e.prediction},
                   {"reference", e.reference},
                   {"score", ToJson(e.score)}});
  }
  return out;
}

Json ToJson(const GridCell& c) {
  return {{"nms_iou", c.nms_iou}, {"confidence", c.confidence},
          {"mrf1", c.mrf1},       {"rf1_50", c.rf1_50},
          {"rf1_75", c.rf1_75},   {"objective", c.objective}};
}

std::string FormatNumber(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string FormatPercent(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * *v);
  return buf;
}

std::string AuditCsv(std::span<const GridCell> audit, FilterOrder mode) {
  std::string out = "nms_iou,confidence,mrf1,rf1_50,rf1_75,filter_mode\n";
  const std::string m(FilterOrderName(mode));
  for (const GridCell& c : audit) {
    out += FormatNumber(c.nms_iou) + "," + FormatNumber(c.confidence) + "," +
           FormatNumber(c.mrf1) + "," + FormatNumber(c.rf1_50) + "," +
           FormatNumber(c.rf1_75) + "," + m + "\n";
  }
  return out;
}

std::string TileMetricsText(const TileMetrics& m) {
  std::ostringstream s;
  s << "mAP " << FormatPercent(m.map) << "  AP50 " << FormatPercent(m.ap50)
    << "  AP75 " << FormatPercent(m.ap75) << "  mAR " << FormatPercent(m.mar)
    << "\n";
  s << "class    mAP    mAR\n";
  for (SizeClass c : kClasses) {
    const auto& cm = m.per_class[static_cast<size_t>(c)];
    std::string name(SizeClassName(c));
    name.resize(6, ' ');
    s << name << Pad(FormatPercent(cm.map), 6) << Pad(FormatPercent(cm.mar), 7)
      << "\n";
  }
  return s.str();
}

std::string RasterScoreText(const RasterScore& r) {
  std::ostringstream s;
  s << "mRF1 " << FormatPercent(r.all.mrf1) << "  RF1_50 "
    << FormatPercent(r.rf1_50 ? std::optional(r.rf1_50->f1) : std::nullopt)
    << "  RF1_75 "
    << FormatPercent(r.rf1_75 ? std::optional(r.rf1_75->f1) : std::nullopt)
    << "\n";
  s << "class   mRF1\n";
  for (SizeClass c : kClasses) {
    std::string name(SizeClassName(c));
    name.resize(6, ' ');
    s << name << Pad(FormatPercent(r.per_class[static_cast<size_t>(c)].mrf1), 6)
      << "\n";
  }
  return s.str();
}

std::string AgreementText(std::span<const AgreementEntry> entries) {
  std::ostringstream s;
  s << "preds  gts      tiny  small medium  large  giant    all\n";
  for (const AgreementEntry& e : entries) {
    std::string p = e.prediction, g = e.reference;
    p.resize(std::max<size_t>(p.size(), 6), ' ');
    g.resize(std::max<size_t>(g.size(), 6), ' ');
    s << p << " " << g;
    for (SizeClass c : kClasses) {
      s << Pad(FormatPercent(e.score.per_class[static_cast<size_t>(c)].mrf1), 7);
    }
    s << Pad(FormatPercent(e.score.all.mrf1), 7) << "\n";
  }
  return s.str();
}

std::string CensusText(const std::map<std::string, SplitStats>& census) {
  std::ostringstream s;
  s << "split        crowns  area_ha\n";
  for (const auto& [name, st] : census) {
    std::string n = name;
    n.resize(std::max<size_t>(n.size(), 12), ' ');
    char ha[32];
    std::snprintf(ha, sizeof(ha), "%.2f", st.hectares);
    s << n << Pad(std::to_string(st.crowns), 7) << Pad(ha, 9) << "\n";
  }
  return s.str();
}

}  // namespace crowneval
