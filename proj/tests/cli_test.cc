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
#include "cli.h"

#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>

#include "crowneval/batch_backend.h"
#include "crowneval/checksum.h"
#include "crowneval/geojson_io.h"
#include "crowneval/io_util.h"
#include "crowneval/pipeline.h"
#include "crowneval/tiff_io.h"
#include "gtest/gtest.h"
#include "testing/fixtures.h"

namespace crowneval::cli {
namespace {

namespace fs = std::filesystem;
using ::crowneval::testing::Rectangle;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "crowneval");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("crowneval_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  std::string WriteConfig(const std::string& name, const Json& config) const {
    WriteTextFile(dir_ / name, CanonicalJson(config));
    return Path(name);
  }

  Json Report(const std::string& out) const {
    return ReadJsonFile(dir_ / out / "report.json");
  }

  // Synthetic rasters with predictions exported by pipeline-run.
  void MakeRasters(const std::string& out, int count, const Json& detector,
                   uint64_t seed) {
    const Json config = {{"seed", seed},
                         {"scenes", {{"count", count}, {"size", 500}, {"crowns", 18},
                                     {"gsd", 0.1}}},
                         {"tiling", {{"tile_size", 200}, {"overlap", 0.5}}},
                         {"detector", detector},
                         {"export", true}};
    const Result r = Cli({"pipeline-run", "-c", WriteConfig(out + ".json", config), "-o",
                          Path(out)});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  Json RasterEntries(const std::string& out, int count) const {
    Json list = Json::array();
    for (int i = 0; i < count; ++i) {
      const std::string name = "scene" + std::to_string(i);
      list.push_back({{"name", name},
                      {"raster", Path(out + "/rasters/" + name + ".tif")},
                      {"ground_truth", Path(out + "/rasters/" + name + ".geojson")},
                      {"predictions", Path(out + "/predictions.coco.json")}});
    }
    return list;
  }

  fs::path dir_;
};

TEST_F(CliTest, EvalRasterOnPerfectOracleScoresOne) {
  MakeRasters("perfect", 2, Json::object(), 1);
  const Result r = Cli({"eval-raster", "-c",
                        WriteConfig("eval.json", {{"rasters", RasterEntries("perfect", 2)}}),
                        "-o", Path("eval")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = Report("eval");
  EXPECT_EQ(report["score"]["mrf1"], 1.0);
  EXPECT_EQ(report["command"], "eval-raster");
  EXPECT_EQ(report["manifest"]["inputs"].size(), 5u);
  EXPECT_NE(r.out.find("mRF1 100.0"), std::string::npos);
  EXPECT_EQ(ReadTextFile(dir_ / "eval" / "summary.txt"), r.out);
}

TEST_F(CliTest, MissingInputIsExitTwoNamingThePath) {
  const std::string missing = Path("absent/crowns.geojson");
  const Json config = {{"rasters", Json::array({{{"name", "r"},
                                                 {"grid", {{"width", 10},
                                                           {"height", 10},
                                                           {"gsd", 0.1}}},
                                                 {"ground_truth", missing},
                                                 {"predictions", missing}}})}};
  const Result r =
      Cli({"eval-raster", "-c", WriteConfig("c.json", config), "-o", Path("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
  const Result no_config = Cli({"eval-raster", "-c", Path("nope.json"), "-o", Path("o")});
  EXPECT_EQ(no_config.code, 2);
  EXPECT_NE(no_config.err.find("nope.json"), std::string::npos);
}

TEST_F(CliTest, ValidationErrorsAreExitOne) {
  EXPECT_EQ(Cli({"eval-raster", "-c", WriteConfig("a.json", {{"rastres", 1}}), "-o",
                 Path("o")}).code,
            1);
  WriteTextFile(dir_ / "bad.json", "{not json");
  EXPECT_EQ(Cli({"eval-raster", "-c", Path("bad.json"), "-o", Path("o")}).code, 1);
  EXPECT_EQ(Cli({"no-such-command"}).code, 1);
  EXPECT_EQ(Cli({"eval-raster", "-o", Path("o")}).code, 1);  // --config missing
  EXPECT_EQ(Cli({"--help"}).code, 0);
}

TEST_F(CliTest, OptimizeThenEvalReproducesTheAuditedPick) {
  // Noisy detector so the threshold choice matters.
  const Json noisy = {{"shift_sigma_px", 3.0}, {"spurious_rate", 0.5},
                      {"drop_rate", 0.1}};
  MakeRasters("valid", 2, noisy, 21);
  MakeRasters("test", 2, noisy, 22);
  const Json grid = {{"nms_iou", {0.3, 0.5, 0.7}}, {"confidence", {0.05, 0.3, 0.6}}};
  const Result opt = Cli({"optimize-thresholds", "-c",
                          WriteConfig("opt.json", {{"rasters", RasterEntries("valid", 2)},
                                                   {"grid", grid}}),
                          "-o", Path("opt")});
  ASSERT_EQ(opt.code, 0) << opt.err;
  const Json best = ReadJsonFile(dir_ / "opt" / "best_aggregation.json");
  const std::string csv = ReadTextFile(dir_ / "opt" / "audit.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 9);

  // Validation set again with the emitted config: same score as the audit row.
  const Result again = Cli({"eval-raster", "-c",
                            WriteConfig("ev.json",
                                        {{"rasters", RasterEntries("valid", 2)},
                                         {"aggregation_file", Path("opt/best_aggregation.json")}}),
                            "-o", Path("ev_valid")});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(Report("ev_valid")["score"]["mrf1"], best["best"]["mrf1"]);
  EXPECT_EQ(Report("ev_valid")["aggregation"], best["aggregation"]);

  // And the test set is scored with the validation pick.
  const Result test = Cli({"eval-raster", "-c",
                           WriteConfig("et.json",
                                       {{"rasters", RasterEntries("test", 2)},
                                        {"aggregation_file", Path("opt/best_aggregation.json")}}),
                           "-o", Path("ev_test")});
  ASSERT_EQ(test.code, 0) << test.err;
  EXPECT_EQ(Report("ev_test")["aggregation"], best["aggregation"]);
  const double mrf1 = Report("ev_test")["score"]["mrf1"].get<double>();
  EXPECT_GT(mrf1, 0.0);
  EXPECT_LT(mrf1, 1.0);
}

TEST_F(CliTest, OverridesWinAndAreRecorded) {
  MakeRasters("r", 1, Json::object(), 3);
  const std::string cfg = WriteConfig(
      "c.json", {{"rasters", RasterEntries("r", 1)}, {"aggregation", {{"nms_iou", 0.5}}}});
  const Result r = Cli({"eval-raster", "-c", cfg, "--set", "aggregation.nms_iou=0.4",
                        "--set", "thresholds=[0.5,0.75]", "-o", Path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = Report("o");
  EXPECT_EQ(report["aggregation"]["nms_iou"], 0.4);
  EXPECT_EQ(report["manifest"]["config"]["aggregation"]["nms_iou"], 0.4);
  EXPECT_EQ(report["score"]["thresholds"].size(), 2u);
}

TEST_F(CliTest, RerunFromReportIsByteIdenticalAndChecksInputs) {
  MakeRasters("r", 1, {{"shift_sigma_px", 2.0}}, 4);
  const std::string cfg = WriteConfig("c.json", {{"rasters", RasterEntries("r", 1)}});
  ASSERT_EQ(Cli({"eval-raster", "-c", cfg, "-o", Path("a")}).code, 0);
  ASSERT_EQ(Cli({"eval-raster", "-c", cfg, "-o", Path("b")}).code, 0);
  ASSERT_EQ(Cli({"eval-raster", "-c", Path("a/report.json"), "-o", Path("c")}).code, 0);
  const std::string a = ReadTextFile(dir_ / "a" / "report.json");
  EXPECT_EQ(a, ReadTextFile(dir_ / "b" / "report.json"));
  EXPECT_EQ(a, ReadTextFile(dir_ / "c" / "report.json"));
  EXPECT_EQ(a.find("started_at"), std::string::npos);

  // Timestamps only on request.
  ASSERT_EQ(Cli({"eval-raster", "-c", cfg, "--record-time", "-o", Path("t")}).code, 0);
  EXPECT_TRUE(Report("t")["manifest"].contains("started_at"));

  // A changed input no longer matches the recorded manifest.
  const fs::path gt = dir_ / "r" / "rasters" / "scene0.geojson";
  Json doc = ReadJsonFile(gt);
  doc["features"].erase(doc["features"].begin());
  WriteTextFile(gt, CanonicalJson(doc));
  const Result changed = Cli({"eval-raster", "-c", Path("a/report.json"), "-o", Path("d")});
  EXPECT_EQ(changed.code, 1);
  EXPECT_NE(changed.err.find("differs from the recorded run"), std::string::npos);
  // The manifest of another command is refused.
  EXPECT_EQ(Cli({"agreement", "-c", Path("a/report.json"), "-o", Path("e")}).code, 1);
}

TEST_F(CliTest, TileWritesDisjointSplitsAndManifest) {
  MakeRasters("src", 1, Json::object(), 5);
  const RasterGrid grid = GridFromTiff(ReadTiffInfo(dir_ / "src/rasters/scene0.tif"));
  // Splits: left half "train" in two parts, right half "test".
  std::vector<CrownInstance> zones(3);
  zones[0].polygon = Rectangle(0, 0, 250, 250);
  zones[1].polygon = Rectangle(0, 250, 250, 500);
  zones[2].polygon = Rectangle(250, 0, 500, 500);
  Json doc = CrownsToGeoJson(zones, grid);
  const char* names[] = {"train", "train", "test"};
  for (int i = 0; i < 3; ++i) doc["features"][i]["properties"] = {{"split", names[i]}};
  WriteTextFile(dir_ / "zones.geojson", CanonicalJson(doc));
  const Json config = {
      {"tiling", {{"tile_size", 128}, {"overlap", 0.5}}},
      {"rasters", Json::array({{{"name", "scene0"},
                                {"raster", Path("src/rasters/scene0.tif")},
                                {"annotations", Path("src/rasters/scene0.geojson")},
                                {"zones", Path("zones.geojson")}}})}};
  const std::string cfg = WriteConfig("tile.json", config);
  const Result r = Cli({"tile", "-c", cfg, "-o", Path("tiles")});
  ASSERT_EQ(r.code, 0) << r.err;

  const Json manifest = ReadJsonFile(dir_ / "tiles" / "tile_manifest.json");
  ASSERT_GT(manifest["tiles"].size(), 10u);
  BinaryMask train_px(PixelRect{0, 0, 500, 500});
  BinaryMask test_px(PixelRect{0, 0, 500, 500});
  for (const Json& t : manifest["tiles"]) {
    const fs::path file = dir_ / "tiles" / t["file"].get<std::string>();
    EXPECT_EQ(Sha256File(file), t["sha256"]);
    const GeoRaster tile = ReadGeoTiff(file);
    ASSERT_TRUE(tile.alpha.has_value());
    const auto w = t["window"].get<std::vector<int64_t>>();
    BinaryMask& acc = t["split"] == "train" ? train_px : test_px;
    for (int64_t y = 0; y < w[3]; ++y) {
      for (int64_t x = 0; x < w[2]; ++x) {
        if (tile.alpha->At(x, y)) acc.Set(w[0] + x, w[1] + y);
      }
    }
  }
  EXPECT_EQ(IntersectionCount(train_px, test_px), 0);
  EXPECT_EQ(train_px.Count() + test_px.Count(), 500 * 500);

  const Json report = Report("tiles");
  const int64_t crowns = report["census"]["train"]["crowns"].get<int64_t>() +
                         report["census"]["test"]["crowns"].get<int64_t>() +
                         report["census"].value("unassigned", Json{{"crowns", 0}})["crowns"]
                             .get<int64_t>();
  EXPECT_EQ(crowns, 18);
  EXPECT_TRUE(fs::exists(dir_ / "tiles" / "train.coco.json"));
  EXPECT_TRUE(fs::exists(dir_ / "tiles" / "test.coco.json"));

  // Rerun into a second directory: identical outputs.
  ASSERT_EQ(Cli({"tile", "-c", cfg, "-o", Path("tiles2")}).code, 0);
  for (const char* f : {"report.json", "tile_manifest.json", "train.coco.json"}) {
    EXPECT_EQ(ReadTextFile(dir_ / "tiles" / f), ReadTextFile(dir_ / "tiles2" / f)) << f;
  }
}

TEST_F(CliTest, EvalTilesOnGroundTruthAsPredictions) {
  MakeRasters("src", 1, Json::object(), 6);
  const Json config = {
      {"tiling", {{"tile_size", 200}, {"overlap", 0.5}}},
      {"rasters", Json::array({{{"name", "scene0"},
                                {"raster", Path("src/rasters/scene0.tif")},
                                {"annotations", Path("src/rasters/scene0.geojson")}}})}};
  ASSERT_EQ(Cli({"tile", "-c", WriteConfig("t.json", config), "-o", Path("tiles")}).code, 0);
  // Predictions: the ground truth with scores, in results-list form.
  const Json gt = ReadJsonFile(dir_ / "tiles" / "all.coco.json");
  Json results = Json::array();
  for (Json a : gt["annotations"]) {
    a["score"] = 0.9;
    results.push_back(a);
  }
  WriteTextFile(dir_ / "results.json", CanonicalJson(results));
  const Json eval = {{"ground_truth", Path("tiles/all.coco.json")},
                     {"predictions", Path("results.json")},
                     {"gsd", 0.1}};
  const Result r = Cli({"eval-tiles", "-c", WriteConfig("e.json", eval), "-o", Path("e")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Report("e")["metrics"]["map"], 1.0);
  EXPECT_EQ(Report("e")["metrics"]["mar"], 1.0);
}

TEST_F(CliTest, AgreementMatrixFromAnnotatorFiles) {
  const RasterGrid grid{200, 200, 0.5, GeoTransform::NorthUp(0, 200 * 0.5, 0.5), ""};
  std::vector<CrownInstance> a(2), b(2);
  a[0].polygon = Rectangle(10, 10, 30, 30);
  a[1].polygon = Rectangle(50, 50, 80, 80);
  b[0].polygon = Rectangle(10, 10, 30, 30);
  b[1].polygon = Rectangle(52, 50, 82, 80);
  SaveGeoJson(dir_ / "A.geojson", a, grid);
  SaveGeoJson(dir_ / "B.geojson", b, grid);
  const Json config = {{"grid", {{"width", 200}, {"height", 200}, {"gsd", 0.5},
                                 {"transform", grid.transform.coeffs()}}},
                       {"annotators", {{"A", Path("A.geojson")}, {"B", Path("B.geojson")}}}};
  const Result r = Cli({"agreement", "-c", WriteConfig("c.json", config), "-o", Path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json m = Report("o")["matrix"];
  ASSERT_EQ(m.size(), 2u);
  // IoU of the shifted pair is 0.875: matched at 8 of 10 thresholds.
  EXPECT_NEAR(m[0]["score"]["mrf1"].get<double>(), 0.9, 1e-12);
  EXPECT_NEAR(m[1]["score"]["mrf1"].get<double>(), 0.9, 1e-12);
  EXPECT_NE(r.out.find("90.0"), std::string::npos);
}

TEST_F(CliTest, PipelineThroughBatchBackendMatchesOracle) {
  const Json base = {{"seed", 8},
                     {"scenes", {{"count", 1}, {"size", 400}, {"crowns", 12}}},
                     {"tiling", {{"tile_size", 200}, {"overlap", 0.5}}},
                     {"detector", {{"kind", "oracle"}, {"shift_sigma_px", 2.0}, {"seed", 5}}},
                     {"segmenter", {{"kind", "oracle"}, {"seed", 6}}}};
  ASSERT_EQ(Cli({"pipeline-run", "-c", WriteConfig("o.json", base), "-o", Path("oracle")}).code, 0);

  // The same models served through the file protocol by a responder thread.
  SceneOptions options;
  options.size = 400;
  options.crowns = 12;
  // Scene seeds follow the command's derivation from the run seed.
  const uint64_t scene_seed = DeriveSeed(DeriveSeed(8, {3}), {0});
  const SceneRaster scene = MakeScene("scene0", options, scene_seed);
  DetectorNoise dn;
  dn.shift_sigma_px = 2.0;
  OracleDetector det(TruthsByRaster(std::span(&scene, 1)), dn, 5);
  OracleSegmenter seg(TruthsByRaster(std::span(&scene, 1)), SegmenterNoise{}, 6);
  const fs::path jobs = dir_ / "jobs";
  fs::create_directories(jobs);
  BatchResponder responder(jobs, &det, &seg);
  std::atomic<bool> stop{false};
  std::thread serving([&] { responder.ServeUntil(stop); });

  Json batch = base;
  batch["detector"] = {{"kind", "batch"}, {"dir", jobs.string()}, {"single_flight", true}};
  batch["segmenter"] = {{"kind", "batch"}, {"dir", jobs.string()}};
  const Result r = Cli({"pipeline-run", "-c", WriteConfig("b.json", batch), "-o", Path("batch")});
  stop = true;
  serving.join();
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* key : {"tile_metrics", "raster_score", "stats"}) {
    EXPECT_EQ(Report("batch")[key], Report("oracle")[key]) << key;
  }
  EXPECT_GT(Report("batch")["stats"]["instances"].get<int64_t>(), 0);
}

}  // namespace
}  // namespace crowneval::cli
