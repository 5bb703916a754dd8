#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "msfuse/pipeline/run.hpp"

namespace fs = std::filesystem;
using namespace msfuse;

namespace {

GrayImage load_gray(const fs::path& p) {
  if (p.extension() == ".hdr" || p.extension() == ".img") return msfa::to_gray(io::read_envi(p));
  return io::read_gray_pgm(p);
}

int report_failures(const fs::path& report_path) {
  std::cout << pipeline::report_text(io::read_json(report_path));
  const auto problems = pipeline::verify_outputs(report_path);
  for (const auto& m : problems) std::cerr << m << "\n";
  return static_cast<int>(problems.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-view multispectral mosaic fusion"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "render a synthetic stereo capture with ground truth");
  std::string synth_config, synth_out = "synth";
  std::optional<std::uint64_t> synth_seed;
  std::optional<double> synth_scale, synth_noise;
  std::optional<int> synth_views;
  synth->add_option("-c,--config", synth_config, "synth config JSON")->check(CLI::ExistingFile);
  synth->add_option("-o,--out", synth_out, "output directory");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--scale", synth_scale, "sensor scale relative to 2048x1024");
  synth->add_option("--noise", synth_noise, "mosaic noise sigma (reflectance)");
  synth->add_option("--calibration-views", synth_views);

  // demosaic
  auto* dem = app.add_subcommand("demosaic", "white-correct and demosaic one mosaic frame");
  std::string dem_mosaic, dem_pattern, dem_white, dem_dark, dem_out, dem_method = "weighted_bilinear";
  dem->add_option("--mosaic", dem_mosaic)->required()->check(CLI::ExistingFile);
  dem->add_option("--pattern", dem_pattern)->required()->check(CLI::ExistingFile);
  dem->add_option("--white", dem_white);
  dem->add_option("--dark", dem_dark);
  dem->add_option("--method", dem_method)->check(CLI::IsMember({"nearest", "weighted_bilinear"}));
  dem->add_option("-o,--out", dem_out, "cube path (.hdr)")->required();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "stereo calibration from checkerboard images");
  std::string cal_inputs, cal_out = "rig.json";
  cal->add_option("-i,--inputs", cal_inputs, "calibration set JSON")->required()->check(CLI::ExistingFile);
  cal->add_option("-o,--out", cal_out);

  // flow
  auto* fl = app.add_subcommand("flow", "dense correspondence between two views");
  std::string fl_ref, fl_tgt, fl_out, fl_init, fl_png;
  double fl_maxv = 1.0;
  flow::FlowParams fl_params;
  fl->add_option("--ref", fl_ref, "reference view (gray PGM or cube .hdr)")->required()->check(CLI::ExistingFile);
  fl->add_option("--target", fl_tgt, "target view")->required()->check(CLI::ExistingFile);
  fl->add_option("-o,--out", fl_out)->required();
  fl->add_option("--init", fl_init, "initial flow file")->check(CLI::ExistingFile);
  fl->add_option("--png", fl_png, "disparity visualization (-u)");
  fl->add_option("--search-radius", fl_params.search_radius);
  fl->add_option("--max-vertical", fl_maxv);

  // fuse
  auto* fu = app.add_subcommand("fuse", "warp the left cube into the right view and merge");
  std::string fu_left, fu_right, fu_flow, fu_out, fu_corr, fu_rgb;
  bool fu_nocrop = false;
  fu->add_option("--left", fu_left)->required()->check(CLI::ExistingFile);
  fu->add_option("--right", fu_right)->required()->check(CLI::ExistingFile);
  fu->add_option("--flow", fu_flow, "right -> left flow on the right grid")->required()->check(CLI::ExistingFile);
  fu->add_option("--correction", fu_corr)->check(CLI::ExistingFile);
  fu->add_option("--rgb", fu_rgb, "RGB preview PNG");
  fu->add_flag("--no-crop", fu_nocrop);
  fu->add_option("-o,--out", fu_out)->required();

  // run
  auto* run = app.add_subcommand("run", "end-to-end pipeline from a config file");
  std::string run_config, run_out, run_rig;
  run->add_option("-c,--config", run_config)->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", run_out, "override output_dir");
  run->add_option("--rig", run_rig, "override rig file");
  std::optional<int> run_radius;
  std::string run_flow_source, run_into;
  run->add_option("--search-radius", run_radius);
  run->add_option("--flow-source", run_flow_source, "estimated or ground_truth")
      ->check(CLI::IsMember({"estimated", "ground_truth"}));
  run->add_option("--fuse-into", run_into, "view that receives the warped bands")->check(CLI::IsMember({"right", "left"}));

  // report
  auto* rep = app.add_subcommand("report", "summarize a run report and check its outputs");
  std::string rep_path;
  rep->add_option("report", rep_path, "report.json")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  pipeline::StageRunner st;
  try {
    if (synth->parsed()) {
      pipeline::SynthConfig cfg;
      if (!synth_config.empty()) cfg = pipeline::synth_config_from_json(io::read_json(synth_config));
      if (synth_seed) cfg.seed = *synth_seed;
      if (synth_scale) cfg.scale = *synth_scale;
      if (synth_noise) cfg.noise_sigma = *synth_noise;
      if (synth_views) cfg.calibration_views = *synth_views;
      const auto files = st.run("synth", [&] { return pipeline::cmd_synth(cfg, synth_out); });
      for (const auto& [k, v] : files.items()) std::cout << k << ": " << (fs::path(synth_out) / v.get<std::string>()).string() << "\n";
    } else if (dem->parsed()) {
      const auto sidecar = st.run("load", [&] { return io::read_pattern(dem_pattern); });
      auto frame = st.run("load", [&] { return pipeline::load_mosaic(dem_mosaic, sidecar); });
      if (!dem_white.empty()) {
        frame = st.run("white_correct", [&] {
          return msfa::white_correct(frame, pipeline::load_white({dem_mosaic, dem_pattern, dem_white, dem_dark}, sidecar)).frame;
        });
      }
      const auto cube = st.run("demosaic", [&] { return msfa::mosaic_to_cube(frame, pipeline::demosaic_method_from_string(dem_method)); });
      st.run("write", [&] { io::write_envi(dem_out, cube, "demosaiced cube"); });
    } else if (cal->parsed()) {
      const auto cr = st.run("calibrate", [&] { return pipeline::run_calibration(pipeline::read_calibration_inputs(cal_inputs)); });
      st.run("write", [&] { calib::write_rig(cal_out, cr.stereo.rig, cr.stats()); });
      std::printf("baseline %.6f m, convergence %.4f deg, rms %.4f px\n", cr.stereo.rig.baseline(),
                  cr.stereo.rig.convergence_deg(), cr.stereo.rms_px);
    } else if (fl->parsed()) {
      const auto a = st.run("load", [&] { return load_gray(fl_ref); });
      const auto b = st.run("load", [&] { return load_gray(fl_tgt); });
      std::optional<flow::FlowField> init;
      if (!fl_init.empty()) init = st.run("load", [&] { return io::read_flow(fl_init); });
      const auto f = st.run("flow", [&] { return flow::compute_flow(a, b, init, fl_params); });
      st.run("write", [&] {
        io::write_flow(fl_out, f);
        if (!fl_png.empty()) io::write_png(fl_png, flow::colorize_disparity(flow::flow_to_disparity(f, fl_maxv)));
      });
      std::printf("valid fraction %.4f\n", f.valid_fraction());
    } else if (fu->parsed()) {
      auto left = st.run("load", [&] { return io::read_envi(fu_left); });
      auto right = st.run("load", [&] { return io::read_envi(fu_right); });
      const auto f = st.run("load", [&] { return io::read_flow(fu_flow); });
      if (!fu_corr.empty()) {
        st.run("spectral_correction", [&] {
          const auto c = fusion::read_corrections(fu_corr);
          if (c.left) left = fusion::apply_spectral_correction(left, *c.left);
          if (c.right) right = fusion::apply_spectral_correction(right, *c.right);
        });
      }
      left.band_sources().assign(left.wavelengths().size(), msfa::BandSource::left);
      right.band_sources().assign(right.wavelengths().size(), msfa::BandSource::right);
      auto fused = st.run("warp_fuse", [&] {
        const auto w = fusion::warp_cube(left, f);
        return fusion::fuse(w.cube, w.valid, right, {});
      });
      if (!fu_nocrop) fused = st.run("crop", [&] { return fusion::crop_valid(fused); });
      st.run("write", [&] {
        io::write_envi(fu_out, fused.cube, "fused cube");
        io::write_mask_pgm(fs::path(fu_out).replace_extension(".valid.pgm"), fused.valid);
        if (!fu_rgb.empty()) io::write_png(fu_rgb, fusion::render_rgb(fused.cube, fused.valid));
      });
      std::printf("%d bands, %dx%d, crop offset (%d, %d)\n", fused.cube.bands(), fused.width(), fused.height(), fused.crop_x,
                  fused.crop_y);
    } else if (run->parsed()) {
      auto cfg = st.run("config", [&] { return pipeline::read_config(run_config); });
      if (!run_out.empty()) cfg.output_dir = run_out;
      if (!run_rig.empty()) cfg.rig = run_rig;
      if (run_radius) cfg.flow.search_radius = *run_radius;
      if (!run_flow_source.empty())
        cfg.flow_source = run_flow_source == "estimated" ? pipeline::FlowSource::estimated : pipeline::FlowSource::ground_truth;
      if (!run_into.empty()) cfg.fuse_into = run_into == "right" ? pipeline::FusionTarget::right : pipeline::FusionTarget::left;
      const auto res = pipeline::cmd_run(cfg);
      std::cout << pipeline::report_text(res.report);
    } else if (rep->parsed()) {
      const int missing = st.run("report", [&] { return report_failures(rep_path); });
      if (missing) return 3;
    }
  } catch (const pipeline::StageError& e) {
    std::cerr << "error [" << e.stage << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
