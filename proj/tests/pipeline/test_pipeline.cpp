#include <gtest/gtest.h>

#include <algorithm>

#include "pipeline_fixture.hpp"

namespace msfuse::pipeline {
namespace {

using test::slurp;

TEST(Config, JsonRoundTrip) {
  PipelineConfig c;
  c.left = {"/d/l.pgm", "/d/l.json", "/d/lw.pgm", {}};
  c.right = {"/d/r.pgm", "/d/r.json", "/d/rw.pgm", "/d/rd.pgm"};
  c.rig = "/d/rig.json";
  c.output_dir = "/d/out";
  c.demosaic = msfa::DemosaicMethod::nearest;
  c.flow.search_radius = 6;
  c.crop = CropMode::none;
  c.fixed_crop = std::pair{100, 50};
  c.flow_source = FlowSource::ground_truth;
  c.fuse_into = FusionTarget::left;
  c.rois = {{"a", {1.0, 2.0, 3.0}, {0.1, 0.2}}};
  c.seed = 42;
  const auto j = config_to_json(c, "/d");
  EXPECT_EQ(j["left"]["mosaic"], "l.pgm");
  const auto back = config_from_json(j, "/d");
  EXPECT_EQ(config_to_json(back, "/d"), j);
  EXPECT_EQ(back.right.dark, fs::path("/d/rd.pgm"));
  EXPECT_TRUE(back.left.dark.empty());
}

TEST(Config, RejectsBadValues) {
  auto bad = [](json j) { EXPECT_THROW(config_from_json(j, "/"), ConfigError) << j.dump(); };
  bad({{"demosaic", "cubic"}});
  bad({{"crop", "some"}});
  bad({{"principal_point", "middle"}});
  bad({{"flow_source", "oracle"}});
  bad({{"fuse_into", "both"}});
  bad({{"fixed_crop", {10}}});
  bad({{"rois", {{{"x", 1}, {"y", 1}, {"radius", 0}}}}});
  bad({{"flow", {{"search_radius", 0}}}});
  bad({{"rig", 3}});
}

TEST(Synth, WritesConsistentFiles) {
  test::TempDir dir("synth");
  const auto files = cmd_synth(test::small_synth(), dir.path());
  for (const auto& [k, v] : files.items()) EXPECT_TRUE(fs::exists(dir / v.get<std::string>())) << k;
  const auto l = io::read_envi(dir / "left_gt.hdr");
  const auto r = io::read_envi(dir / "right_gt.hdr");
  EXPECT_EQ(l.width(), 256);
  EXPECT_EQ(l.height(), 128);
  EXPECT_EQ(l.bands(), 16);
  EXPECT_EQ(r.bands(), 25);
  const auto raw = io::read_pgm(dir / "left_raw.pgm");
  EXPECT_EQ(raw.values.width(), 256);
  EXPECT_EQ(io::read_pattern(dir / "right_pattern.json").pattern.band_count(), 25);
  const auto cfg = read_config(dir / "run.json");
  EXPECT_EQ(cfg.left.mosaic, dir / "left_raw.pgm");
  EXPECT_FALSE(files.contains("calibration"));
}

TEST(Synth, SameSeedIsByteIdentical) {
  test::TempDir a("synth_a"), b("synth_b");
  const auto fa = cmd_synth(test::small_synth(2), a.path());
  const auto fb = cmd_synth(test::small_synth(2), b.path());
  ASSERT_EQ(fa, fb);
  for (const auto& [k, v] : fa.items()) {
    const auto name = v.get<std::string>();
    if (name.ends_with(".json") && k == "run_config") continue;  // holds absolute paths
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << k;
  }
  EXPECT_EQ(slurp(a / "left_gt.img"), slurp(b / "left_gt.img"));
  EXPECT_EQ(slurp(a / "calib/right_01.pgm"), slurp(b / "calib/right_01.pgm"));
  auto other = test::small_synth();
  other.seed = 2;
  test::TempDir c("synth_c");
  cmd_synth(other, c.path());
  EXPECT_NE(slurp(a / "left_raw.pgm"), slurp(c / "left_raw.pgm"));
}

TEST(Synth, RejectsUnknownPreset) {
  EXPECT_THROW(synth_config_from_json({{"preset", "lab"}}), ConfigError);
  EXPECT_THROW(synth_config_from_json({{"supersample", 0}}), ConfigError);
  const auto c = synth_config_from_json({{"scale", 0.5}, {"seed", 9}});
  EXPECT_EQ(synth_config_from_json(synth_config_to_json(c)).seed, 9u);
}

class RunTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new test::TempDir("run");
    cmd_synth(test::small_synth(), dir_->path());
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static PipelineConfig config(const std::string& out) {
    auto c = read_config(*dir_ / "run.json");
    c.output_dir = *dir_ / out;
    return c;
  }
  static test::TempDir* dir_;
};
test::TempDir* RunTest::dir_ = nullptr;

TEST_F(RunTest, ReportSchema) {
  const auto res = cmd_run(config("out"));
  const auto r = io::read_json(*dir_ / "out" / "report.json");
  EXPECT_EQ(r, res.report);
  for (const char* key : {"epe_if_gt", "rms_reproj", "baseline", "band_count", "valid_fraction", "spectra", "outputs",
                          "wavelengths", "timings_file"})
    EXPECT_TRUE(r.contains(key)) << key;
  EXPECT_EQ(r["band_count"], 41);
  EXPECT_TRUE(std::is_sorted(r["wavelengths"].begin(), r["wavelengths"].end()));
  EXPECT_TRUE(r["epe_if_gt"].is_number());
  EXPECT_NEAR(r["baseline"].get<double>(), 0.06, 1e-9);
  bool any_rmse = false;
  for (const auto& sp : r["spectra"]) any_rmse |= sp.contains("rmse");
  EXPECT_TRUE(any_rmse);
  EXPECT_TRUE(verify_outputs(*dir_ / "out" / "report.json").empty());
  const auto timings = io::read_json(*dir_ / "out" / "timings.json");
  for (const char* stage : {"white_correct", "demosaic", "rectify", "flow", "warp_fuse", "crop", "render_rgb"})
    EXPECT_TRUE(timings.contains(stage)) << stage;
}

TEST_F(RunTest, OutputsMatchResult) {
  const auto res = cmd_run(config("out_match"));
  const auto cube = io::read_envi(*dir_ / "out_match" / "fused.hdr");
  EXPECT_EQ(cube, res.fused.cube);
  EXPECT_EQ(io::read_mask_pgm(*dir_ / "out_match" / "fused_valid.pgm"), res.fused.valid);
  EXPECT_DOUBLE_EQ(res.fused.valid_fraction(), 1.0);
  const auto depth = io::read_envi(*dir_ / "out_match" / "depth.hdr");
  EXPECT_EQ(depth.bands(), 1);
  EXPECT_EQ(depth.width(), res.flow_lr.width());
}

TEST_F(RunTest, MissingWhiteNamesStage) {
  auto c = config("out_nowhite");
  c.left.white.clear();
  try {
    cmd_run(c);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage, "white_correct");
    EXPECT_NE(std::string(e.what()).find("white"), std::string::npos);
  }
  c.left.white = *dir_ / "nope.pgm";
  try {
    cmd_run(c);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage, "white_correct");
  }
}

TEST_F(RunTest, StageErrors) {
  auto c = config("out_err");
  c.rig.clear();
  try {
    cmd_run(c);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage, "calibrate");
  }
  c = config("out_err");
  c.right.mosaic = *dir_ / "missing.pgm";
  try {
    cmd_run(c);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage, "load");
  }
  c = config("out_err");
  c.gt_flow_rl.clear();
  c.flow_source = FlowSource::ground_truth;
  try {
    cmd_run(c);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage, "flow");
  }
}

TEST_F(RunTest, CropAndDirectionOptions) {
  auto c = config("out_nocrop");
  c.crop = CropMode::none;
  const auto full = cmd_run(c);
  EXPECT_EQ(full.fused.width(), full.fused_full.width());
  EXPECT_LT(full.fused.valid_fraction(), 1.0);

  c = config("out_left");
  c.fuse_into = FusionTarget::left;
  const auto left = cmd_run(c);
  EXPECT_EQ(left.fused.cube.bands(), 41);
  EXPECT_EQ(left.report["fuse_into"], "left");
  for (int b = 0; b < 16; ++b) EXPECT_EQ(left.fused.cube.band_sources()[static_cast<std::size_t>(b)], msfa::BandSource::left);

  c = config("out_fixed");
  c.fixed_crop = std::pair{200, 100};
  EXPECT_THROW(cmd_run(c), StageError);  // ground truth lives on the uncropped grid
  c.gt_flow.clear();
  const auto fixed = cmd_run(c);
  EXPECT_TRUE(fixed.report["epe_if_gt"].is_null());
  EXPECT_LE(fixed.fused_full.width(), 200 + 40);
  EXPECT_EQ(fixed.fused.cube.bands(), 41);
}

TEST_F(RunTest, GroundTruthFlowSource) {
  auto c = config("out_gt");
  c.flow_source = FlowSource::ground_truth;
  const auto res = cmd_run(c);
  EXPECT_EQ(res.report["flow_source"], "ground_truth");
  EXPECT_NEAR(res.report["epe_if_gt"].get<double>(), 0.0, 1e-12);
  for (const auto& sp : res.report["spectra"])
    if (sp.contains("rmse")) EXPECT_LE(sp["rmse"].get<double>(), 0.02) << sp["name"];
}

TEST_F(RunTest, VerifyOutputsFlagsBrokenFiles) {
  cmd_run(config("out_broken"));
  const auto out = *dir_ / "out_broken";
  fs::remove(out / "rgb.png");
  { std::ofstream(out / "flow_lr.flo") << "garbage"; }
  const auto problems = verify_outputs(out / "report.json");
  ASSERT_EQ(problems.size(), 2u);
  EXPECT_NE(problems[0].find("flow_lr"), std::string::npos);
  EXPECT_NE(problems[1].find("rgb"), std::string::npos);
}

}  // namespace
}  // namespace msfuse::pipeline
