#include <gtest/gtest.h>

#include "msfuse/pipeline/run.hpp"
#include "support/test_support.hpp"

namespace msfuse::pipeline {
namespace {

TEST(EndToEnd, CalibratesFromImagesThenFuses) {
  test::TempDir dir("e2e_calib");
  SynthConfig sc;
  sc.scale = 0.125;
  sc.calibration_views = 6;
  cmd_synth(sc, dir.path());
  auto cfg = read_config(dir / "run.json");
  cfg.rig.clear();
  cfg.calibration = dir / "calib" / "calibration.json";
  const auto res = cmd_run(cfg);
  const auto& r = res.report;
  EXPECT_EQ(r["band_count"], 41);
  EXPECT_NEAR(r["baseline"].get<double>(), 0.06, 0.06 * 0.02);
  EXPECT_NEAR(r["convergence_deg"].get<double>(), 10.0, 0.5);
  EXPECT_GT(r["rms_reproj"].get<double>(), 0.0);
  EXPECT_LE(r["rms_reproj"].get<double>(), 1.5);
  EXPECT_LE(r["epe_if_gt"].get<double>(), 1.0);
  int checked = 0;
  for (const auto& sp : r["spectra"])
    if (sp.contains("rmse")) {
      EXPECT_LE(sp["rmse"].get<double>(), 0.05) << sp["name"];
      ++checked;
    }
  EXPECT_GE(checked, 2);
  EXPECT_TRUE(std::filesystem::exists(cfg.output_dir / "calibrated_rig.json"));
  EXPECT_TRUE(verify_outputs(cfg.output_dir / "report.json").empty());
}

}  // namespace
}  // namespace msfuse::pipeline
