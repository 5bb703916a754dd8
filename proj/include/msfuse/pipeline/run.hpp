#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "msfuse/calib/calibrate.hpp"
#include "msfuse/calib/checkerboard.hpp"
#include "msfuse/calib/rectify.hpp"
#include "msfuse/calib/rig_json.hpp"
#include "msfuse/flow/colormap.hpp"
#include "msfuse/flow/disparity.hpp"
#include "msfuse/flow/matcher.hpp"
#include "msfuse/fusion/correction.hpp"
#include "msfuse/fusion/crop.hpp"
#include "msfuse/fusion/fuse.hpp"
#include "msfuse/fusion/rgb.hpp"
#include "msfuse/fusion/spectrum.hpp"
#include "msfuse/fusion/warp.hpp"
#include "msfuse/io/envi.hpp"
#include "msfuse/io/flow_file.hpp"
#include "msfuse/io/pattern_json.hpp"
#include "msfuse/io/pgm.hpp"
#include "msfuse/io/png.hpp"
#include "msfuse/msfa/demosaic.hpp"
#include "msfuse/msfa/normalize.hpp"
#include "msfuse/msfa/white.hpp"
#include "msfuse/pipeline/config.hpp"
#include "msfuse/remap.hpp"
#include "msfuse/synth/presets.hpp"
#include "msfuse/synth/scene_json.hpp"

namespace msfuse::pipeline {

/// Runs named stages, converts their failures into StageError and records wall time per stage.
class StageRunner {
 public:
  template <typename F>
  auto run(const std::string& name, F&& f) -> decltype(f()) {
    const auto t0 = std::chrono::steady_clock::now();
    auto record = [&] {
      timings_[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record();
      } else {
        auto r = f();
        record();
        return r;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }
  json timings() const { return json(timings_); }

 private:
  std::map<std::string, double> timings_;
};

// ---------------------------------------------------------------------------------------------
// Loading

inline msfa::MosaicFrame load_mosaic(const fs::path& pgm, const io::PatternSidecar& sidecar) {
  auto raw = io::read_pgm(pgm);
  msfa::MosaicFrame f{std::move(raw.values), sidecar.pattern, sidecar.origin_offset, false};
  f.validate();
  return f;
}

inline msfa::WhiteReference load_white(const CameraInputs& in, const io::PatternSidecar& sidecar) {
  if (in.white.empty()) throw ConfigError("missing white reference");
  if (!fs::exists(in.white)) throw IoError("white reference not found: " + in.white.string());
  msfa::WhiteReference ref{load_mosaic(in.white, sidecar), std::nullopt};
  if (!in.dark.empty()) ref.dark = load_mosaic(in.dark, sidecar);
  return ref;
}

// ---------------------------------------------------------------------------------------------
// Calibration

inline CalibrationInputs read_calibration_inputs(const fs::path& path) {
  const json j = io::read_json(path);
  const fs::path base = fs::absolute(path).parent_path();
  try {
    CalibrationInputs c;
    c.board = calib::board_from_json(j.at("board"));
    auto paths = [&](const char* key) {
      std::vector<fs::path> out;
      for (const auto& p : j.at(key)) {
        fs::path q = p.get<std::string>();
        out.push_back(q.is_absolute() ? q : base / q);
      }
      return out;
    };
    c.left_images = paths("left_images");
    c.right_images = paths("right_images");
    c.left_init = calib::camera_from_json(j.at("left_init"));
    c.right_init = calib::camera_from_json(j.at("right_init"));
    if (c.left_images.size() != c.right_images.size()) throw PairingError("left and right image lists differ in length");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("calibration inputs: ") + e.what());
  }
}

struct CalibrationRun {
  calib::SingleCalibration left;
  calib::SingleCalibration right;
  calib::StereoCalibration stereo;
  calib::RigStats stats() const { return {stereo.rms_px, stereo.rig.baseline(), stereo.rig.convergence_deg()}; }
};

/// Detects the board in every image pair (view id = list position) and runs both calibrations.
/// Boards whose corner labeling is ambiguous (both inner dimensions of equal parity) are refused.
inline CalibrationRun run_calibration(const CalibrationInputs& in) {
  if (in.board.inner_rows % 2 == in.board.inner_cols % 2)
    throw ConfigError("checkerboard " + std::to_string(in.board.inner_rows) + "x" + std::to_string(in.board.inner_cols) +
                      " is symmetric under a half turn; use one odd and one even inner dimension");
  std::vector<calib::FeatureSet> ls, rs;
  auto detect = [&](const fs::path& p) {
    auto d = calib::detect_checkerboard_ex(io::read_gray_pgm(p), in.board);
    if (d.ambiguous_orientation)
      throw DetectionError("ambiguous board orientation in " + p.string(), d.features.matches.size(),
                           static_cast<std::size_t>(in.board.corner_count()));
    return d.features;
  };
  for (std::size_t i = 0; i < in.left_images.size(); ++i) {
    auto l = detect(in.left_images[i]);
    auto r = detect(in.right_images[i]);
    l.view_id = r.view_id = static_cast<int>(i);
    ls.push_back(std::move(l));
    rs.push_back(std::move(r));
  }
  CalibrationRun out;
  out.left = calib::calibrate_single(ls, in.left_init);
  out.right = calib::calibrate_single(rs, in.right_init);
  out.stereo = calib::calibrate_stereo(out.left, out.right);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Synthetic datasets

struct SynthConfig {
  std::string preset = "vis_nir";
  double scale = 0.25;
  std::uint64_t seed = 1;
  double noise_sigma = 0.005;
  int supersample = 2;
  int calibration_views = 10;
  calib::CheckerboardSpec board{5, 8, 0.002};
  std::optional<synth::Scene> scene;  ///< replaces the preset scene
};

inline SynthConfig synth_config_from_json(const json& j) {
  try {
    SynthConfig c;
    c.preset = j.value("preset", c.preset);
    if (c.preset != "vis_nir") throw ConfigError("unknown preset '" + c.preset + "'");
    c.scale = j.value("scale", c.scale);
    c.seed = j.value("seed", c.seed);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.supersample = j.value("supersample", c.supersample);
    c.calibration_views = j.value("calibration_views", c.calibration_views);
    if (j.contains("board")) c.board = calib::board_from_json(j.at("board"));
    if (j.contains("scene")) c.scene = synth::scene_from_json(j.at("scene"));
    if (!(c.noise_sigma >= 0.0) || c.supersample < 1 || c.calibration_views < 0) throw ConfigError("invalid synth parameters");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
}

inline json synth_config_to_json(const SynthConfig& c) {
  json j{{"preset", c.preset},         {"scale", c.scale},
         {"seed", c.seed},             {"noise_sigma", c.noise_sigma},
         {"supersample", c.supersample}, {"calibration_views", c.calibration_views},
         {"board", calib::board_to_json(c.board)}};
  if (c.scene) j["scene"] = synth::scene_to_json(*c.scene);
  return j;
}

inline synth::StereoSetup make_setup(const SynthConfig& c) {
  synth::StereoSetup s = synth::vis_nir_setup(c.scale, c.seed);
  s.noise_sigma = c.noise_sigma;
  if (c.scene) {
    s.scene = *c.scene;
    s.landmarks.clear();
  }
  return s;
}

/// Pose of a rectified virtual camera: the original world -> camera pose followed by the
/// rectifying rotation.
inline calib::RigidTransform rectified_pose(const calib::Mat3& rotate, const calib::RigidTransform& world_to_cam) {
  return {rotate * world_to_cam.R, rotate * world_to_cam.t};
}

/// Wavelengths of the fused cube: both patterns' bands, ascending.
inline std::vector<double> fused_wavelengths(const synth::StereoSetup& s) {
  std::vector<double> wl = s.left.pattern.band_wavelengths;
  wl.insert(wl.end(), s.right.pattern.band_wavelengths.begin(), s.right.pattern.band_wavelengths.end());
  std::stable_sort(wl.begin(), wl.end());
  return wl;
}

/// ROIs on one rectified grid for every landmark, with the material spectrum as reference.
inline std::vector<NamedRoi> landmark_rois(const synth::StereoSetup& s, const calib::Rectification& rect,
                                           FusionTarget grid = FusionTarget::right) {
  const bool right = grid == FusionTarget::right;
  const auto pose = right ? rectified_pose(rect.rotate_right, s.poses.right) : rectified_pose(rect.rotate_left, s.poses.left);
  const auto& cam = right ? rect.rectified.right : rect.rectified.left;
  const auto wl = fused_wavelengths(s);
  std::vector<NamedRoi> out;
  for (const auto& lm : s.landmarks) {
    const auto px = calib::try_project(cam, pose, lm.world);
    if (!px) continue;
    const double z = pose.apply(lm.world).z();
    NamedRoi r{lm.name, {px->x(), px->y(), lm.radius_m * cam.fx / z}, {}};
    for (double nm : wl) r.expected.push_back(s.scene.materials[static_cast<std::size_t>(lm.material)].reflectance(nm));
    out.push_back(std::move(r));
  }
  return out;
}

/// Writes a complete synthetic capture into `dir` and returns the list of files written.
/// `run.json` in the same directory is a pipeline config for it.
inline json cmd_synth(const SynthConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  const synth::StereoSetup s = make_setup(cfg);
  json files = json::object();
  auto emit = [&](const std::string& key, const std::string& name) {
    files[key] = name;
    return dir / name;
  };

  synth::RenderOptions ro;
  ro.noise_sigma = cfg.noise_sigma;
  ro.supersample = cfg.supersample;
  int stream = 0;
  for (const auto* cam : {&s.left, &s.right}) {
    const std::string side = cam == &s.left ? "left" : "right";
    const auto& pose = cam == &s.left ? s.poses.left : s.poses.right;
    ro.seed = synth::splitmix64(cfg.seed + static_cast<std::uint64_t>(++stream));
    const auto view = synth::render_view(s.scene, cam->camera, pose, cam->pattern, cam->offset, ro);
    io::write_pgm(emit(side + "_mosaic", side + "_raw.pgm"), synth::to_raw_counts(view.mosaic, *cam).values);
    const auto white = synth::white_reference(*cam);
    io::write_pgm(emit(side + "_white", side + "_white.pgm"), white.white.values);
    io::write_pgm(emit(side + "_dark", side + "_dark.pgm"), white.dark->values);
    io::write_pattern(emit(side + "_pattern", side + "_pattern.json"), {cam->pattern, cam->offset});
    io::write_envi(emit(side + "_gt_cube", side + "_gt.hdr"), view.cube, side + " ground truth");
  }

  const calib::StereoRig rig = s.rig();
  calib::write_rig(emit("rig", "rig.json"), rig, {0.0, rig.baseline(), rig.convergence_deg()});
  io::write_json(emit("scene", "scene.json"), synth::scene_to_json(s.scene));

  const auto rect = calib::rectify(rig, {calib::PrincipalPointMode::recentered, 0, 0});
  const auto pl = rectified_pose(rect.rotate_left, s.poses.left);
  const auto pr = rectified_pose(rect.rotate_right, s.poses.right);
  io::write_flow(emit("gt_flow", "gt_flow_rect.flo"), synth::gt_flow(s.scene, rect.rectified.left, pl, rect.rectified.right, pr));
  io::write_flow(emit("gt_flow_rl", "gt_flow_rl_rect.flo"),
                 synth::gt_flow(s.scene, rect.rectified.right, pr, rect.rectified.left, pl));
  io::write_json(emit("landmarks", "landmarks.json"),
                 json{{"rois", rois_to_json(landmark_rois(s, rect))},
                      {"rois_left", rois_to_json(landmark_rois(s, rect, FusionTarget::left))}});

  PipelineConfig run;
  run.left = {dir / files["left_mosaic"].get<std::string>(), dir / files["left_pattern"].get<std::string>(),
              dir / files["left_white"].get<std::string>(), dir / files["left_dark"].get<std::string>()};
  run.right = {dir / files["right_mosaic"].get<std::string>(), dir / files["right_pattern"].get<std::string>(),
               dir / files["right_white"].get<std::string>(), dir / files["right_dark"].get<std::string>()};
  run.rig = dir / "rig.json";
  run.gt_flow = dir / "gt_flow_rect.flo";
  run.gt_flow_rl = dir / "gt_flow_rl_rect.flo";
  run.landmarks = dir / "landmarks.json";
  run.output_dir = dir / "out";
  run.seed = cfg.seed;

  if (cfg.calibration_views > 0) {
    fs::create_directories(dir / "calib");
    synth::BoardViewOptions bo;
    bo.views = cfg.calibration_views;
    bo.seed = cfg.seed ^ 0x5eedULL;
    const auto views = synth::board_views(cfg.board, rig, s.poses, bo);
    json left_list = json::array(), right_list = json::array();
    const msfa::MsfaPattern mono = msfa::MsfaPattern::uniform(1, 1, 550.0, 550.0);
    synth::RenderOptions co = ro;
    co.with_cube = false;
    co.with_depth = false;
    co.supersample = std::max(4, co.supersample);
    for (std::size_t i = 0; i < views.size(); ++i) {
      const auto scene = synth::checkerboard_scene(cfg.board, views[i]);
      char name[32];
      for (const auto* cam : {&s.left, &s.right}) {
        const bool is_left = cam == &s.left;
        co.seed = synth::splitmix64(cfg.seed * 1000 + i * 2 + (is_left ? 0 : 1));
        const auto v = synth::render_view(scene, cam->camera, is_left ? s.poses.left : s.poses.right, mono, {}, co);
        std::snprintf(name, sizeof name, "calib/%s_%02zu.pgm", is_left ? "left" : "right", i);
        io::write_gray_pgm(dir / name, v.mosaic.values);
        (is_left ? left_list : right_list).push_back(name + 6);
      }
    }
    auto guess = [](calib::PinholeCamera c) {
      c.fx *= 1.02;
      c.fy *= 1.02;
      c.k1 = c.k2 = c.k3 = 0.0;
      return c;
    };
    io::write_json(emit("calibration", "calib/calibration.json"),
                   json{{"board", calib::board_to_json(cfg.board)},
                        {"left_images", left_list},
                        {"right_images", right_list},
                        {"left_init", calib::camera_to_json(guess(s.left.camera))},
                        {"right_init", calib::camera_to_json(guess(s.right.camera))}});
  }
  io::write_json(emit("run_config", "run.json"), config_to_json(run, dir));
  io::write_json(emit("synth_config", "synth.json"), synth_config_to_json(cfg));
  return files;
}

// ---------------------------------------------------------------------------------------------
// End-to-end run

struct RunResult {
  json report;
  fusion::FusedCube fused;      ///< cropped
  fusion::FusedCube fused_full; ///< before cropping; ROIs refer to this grid
  flow::FlowField flow_lr;      ///< rectified left -> right
  flow::FlowField flow_rl;      ///< rectified right -> left
  calib::Rectification rect;
};

/// Valid where the bilinear footprint of the source lies entirely on valid pixels.
inline Mask warp_mask(const Mask& src_valid, const flow::FlowField& f, const Mask& base) {
  Mask out = base;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      if (!out(x, y)) continue;
      const double sx = x + f.u(x, y), sy = y + f.v(x, y);
      const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      bool ok = true;
      for (int j = 0; j <= 1 && ok; ++j)
        for (int i = 0; i <= 1 && ok; ++i) ok = src_valid.clamped(x0 + i, y0 + j) != 0;
      out(x, y) = ok;
    }
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string report_text(const json& r) {
  std::string s;
  s += "bands:          " + std::to_string(r.at("band_count").get<int>()) + "\n";
  s += "baseline [m]:   " + fmt(r.at("baseline").get<double>()) + "\n";
  s += "convergence:    " + fmt(r.at("convergence_deg").get<double>()) + " deg\n";
  s += "reproj rms:     " + fmt(r.at("rms_reproj").get<double>()) + " px\n";
  s += "valid fraction: " + fmt(r.at("valid_fraction").get<double>()) + "\n";
  if (!r.at("epe_if_gt").is_null()) s += "flow EPE:       " + fmt(r.at("epe_if_gt").get<double>()) + " px\n";
  for (const auto& sp : r.at("spectra")) {
    s += "roi " + sp.at("name").get<std::string>() + ": " + std::to_string(sp.at("pixels").get<int>()) + " px";
    if (sp.contains("rmse")) s += ", rmse " + fmt(sp.at("rmse").get<double>());
    s += "\n";
  }
  return s;
}

/// Opens every output a report announces (including spectrum CSVs) with the matching reader.
/// Returns one message per file that is missing or does not parse.
inline std::vector<std::string> verify_outputs(const fs::path& report_path) {
  const json r = io::read_json(report_path);
  const fs::path dir = report_path.parent_path();
  std::vector<std::pair<std::string, std::string>> listed;
  for (const auto& [key, name] : r.at("outputs").items()) listed.emplace_back(key, name.get<std::string>());
  for (const auto& sp : r.at("spectra"))
    if (sp.contains("csv")) listed.emplace_back("spectrum " + sp.at("name").get<std::string>(), sp.at("csv").get<std::string>());
  if (r.contains("timings_file")) listed.emplace_back("timings", r.at("timings_file").get<std::string>());
  std::vector<std::string> problems;
  for (const auto& [key, name] : listed) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
      problems.push_back("missing output " + key + ": " + name);
      continue;
    }
    try {
      const auto ext = p.extension();
      if (ext == ".hdr") {
        io::read_envi(p);
      } else if (ext == ".pgm") {
        io::read_pgm(p);
      } else if (ext == ".flo") {
        io::read_flow(p);
      } else if (ext == ".png") {
        io::read_png(p);
      } else if (ext == ".json") {
        io::read_json(p);
      } else if (ext == ".csv") {
        std::ifstream in(p);
        std::string header;
        std::getline(in, header);
        if (header != "wavelength_nm,mean,std") throw IoError("unexpected csv header");
      }
    } catch (const std::exception& e) {
      problems.push_back("unreadable output " + key + ": " + name + " (" + e.what() + ")");
    }
  }
  return problems;
}

inline RunResult cmd_run(const PipelineConfig& cfg) {
  StageRunner st;
  RunResult res;
  const fs::path out = cfg.output_dir;
  st.run("setup", [&] { fs::create_directories(out); });

  struct Side {
    io::PatternSidecar sidecar;
    msfa::MosaicFrame raw;
    msfa::MosaicFrame refl;
    msfa::SpectralCube cube;
    std::size_t white_invalid = 0;
  } L, R;

  st.run("load", [&] {
    for (auto* s : {&L, &R}) {
      const CameraInputs& in = s == &L ? cfg.left : cfg.right;
      if (in.mosaic.empty() || in.pattern.empty()) throw ConfigError("mosaic and pattern paths are required");
      s->sidecar = io::read_pattern(in.pattern);
      s->raw = load_mosaic(in.mosaic, s->sidecar);
    }
  });

  st.run("white_correct", [&] {
    for (auto* s : {&L, &R}) {
      const auto wc = msfa::white_correct(s->raw, load_white(s == &L ? cfg.left : cfg.right, s->sidecar));
      s->refl = wc.frame;
      s->white_invalid = wc.invalid_count;
    }
  });

  calib::StereoRig rig;
  calib::RigStats rig_stats;
  st.run("calibrate", [&] {
    if (!cfg.rig.empty()) {
      const json j = io::read_json(cfg.rig);
      rig = calib::rig_from_json(j);
      rig_stats = calib::rig_stats_from_json(j);
    } else if (!cfg.calibration.empty()) {
      const auto cr = run_calibration(read_calibration_inputs(cfg.calibration));
      rig = cr.stereo.rig;
      rig_stats = cr.stats();
      calib::write_rig(out / "calibrated_rig.json", rig, rig_stats);
    } else {
      throw ConfigError("neither a rig file nor a calibration set was given");
    }
  });

  if (cfg.fixed_crop) {
    st.run("crop_fixed", [&] {
      for (auto* s : {&L, &R}) {
        auto& cam = s == &L ? rig.left : rig.right;
        const auto r = fusion::centered_rect(s->refl.width(), s->refl.height(), cfg.fixed_crop->first, cfg.fixed_crop->second);
        s->refl = fusion::crop_mosaic(s->refl, r);
        cam.cx -= r.x;
        cam.cy -= r.y;
        cam.width = r.width;
        cam.height = r.height;
      }
    });
  }

  st.run("demosaic", [&] {
    for (auto* s : {&L, &R}) {
      s->cube = msfa::mosaic_to_cube(s->refl, cfg.demosaic);
      s->cube.band_sources().assign(static_cast<std::size_t>(s->cube.bands()),
                                    s == &L ? msfa::BandSource::left : msfa::BandSource::right);
    }
  });

  if (!cfg.correction.empty()) {
    st.run("spectral_correction", [&] {
      const auto corr = fusion::read_corrections(cfg.correction);
      if (corr.left) L.cube = fusion::apply_spectral_correction(L.cube, *corr.left);
      if (corr.right) R.cube = fusion::apply_spectral_correction(R.cube, *corr.right);
    });
  }

  msfa::SpectralCube rl, rr;
  Mask ml, mr;
  st.run("rectify", [&] {
    if (L.cube.width() != rig.left.width || L.cube.height() != rig.left.height || R.cube.width() != rig.right.width ||
        R.cube.height() != rig.right.height)
      throw DimensionError("image sizes do not match the rig");
    if (cfg.rectify) {
      res.rect = calib::rectify(rig, {cfg.principal_point, 0, 0});
      auto a = remap_cube(L.cube, res.rect.map_left);
      auto b = remap_cube(R.cube, res.rect.map_right);
      rl = std::move(a.cube), ml = std::move(a.valid);
      rr = std::move(b.cube), mr = std::move(b.valid);
    } else {
      require_same_size(L.cube, R.cube, "unrectified views must have equal sizes");
      res.rect.rectified = rig;
      rl = L.cube, rr = R.cube;
      ml = Mask(rl.width(), rl.height(), 1), mr = Mask(rr.width(), rr.height(), 1);
    }
  });

  GrayImage gl, gr;
  st.run("gray", [&] {
    gl = msfa::to_gray(rl);
    gr = msfa::to_gray(rr);
  });

  st.run("flow", [&] {
    if (cfg.flow_source == FlowSource::ground_truth) {
      if (cfg.gt_flow.empty() || cfg.gt_flow_rl.empty()) throw ConfigError("ground-truth flow requested but gt_flow/gt_flow_rl not set");
      res.flow_lr = io::read_flow(cfg.gt_flow);
      res.flow_rl = io::read_flow(cfg.gt_flow_rl);
      require_same_size(res.flow_lr.u, gl, "gt_flow size differs from the rectified left view");
      require_same_size(res.flow_rl.u, gr, "gt_flow_rl size differs from the rectified right view");
    } else {
      auto fr = flow::compute_flow_bidirectional(gl, gr, std::nullopt, cfg.flow);
      res.flow_lr = std::move(fr.forward);
      res.flow_rl = std::move(fr.backward);
    }
    for (std::size_t i = 0; i < ml.size(); ++i) res.flow_lr.valid.pixels()[i] &= ml.pixels()[i];
    for (std::size_t i = 0; i < mr.size(); ++i) res.flow_rl.valid.pixels()[i] &= mr.pixels()[i];
  });

  flow::DepthMap depth;
  flow::DisparityMap disparity;
  st.run("depth", [&] {
    disparity = flow::flow_to_disparity(res.flow_lr, cfg.max_vertical_px);
    const auto& rc = res.rect.rectified;
    depth = flow::disparity_to_depth(disparity, 0.5 * (rc.left.fx + rc.left.fy), rc.baseline(),
                                     cfg.rectify ? res.rect.disparity_offset() : 0.0);
  });

  fusion::FusedCube& fused_full = res.fused_full;
  st.run("warp_fuse", [&] {
    if (cfg.fuse_into == FusionTarget::right) {
      const auto warped = fusion::warp_cube(rl, res.flow_rl);
      fused_full = fusion::fuse(warped.cube, warp_mask(ml, res.flow_rl, warped.valid), rr, mr);
    } else {
      const auto warped = fusion::warp_cube(rr, res.flow_lr);
      fused_full = fusion::fuse(rl, ml, warped.cube, warp_mask(mr, res.flow_lr, warped.valid));
    }
  });

  st.run("crop", [&] {
    res.fused = cfg.crop == CropMode::valid ? fusion::crop_valid(fused_full) : fused_full;
  });

  json files = json::object();
  st.run("write", [&] {
    io::write_envi(out / "fused.hdr", res.fused.cube, "fused cube");
    io::write_mask_pgm(out / "fused_valid.pgm", res.fused.valid);
    io::write_flow(out / "flow_lr.flo", res.flow_lr);
    io::write_flow(out / "flow_rl.flo", res.flow_rl);
    msfa::SpectralCube zc(depth.width(), depth.height(), {0.0});
    std::copy(depth.z.pixels().begin(), depth.z.pixels().end(), zc.band(0).begin());
    io::write_envi(out / "depth.hdr", zc, "depth in meters, rectified left grid");
    io::write_mask_pgm(out / "depth_valid.pgm", depth.valid);
    io::write_png(out / "disparity.png", flow::colorize_disparity(disparity));
    files = {{"fused_cube", "fused.hdr"},   {"fused_valid", "fused_valid.pgm"}, {"flow_lr", "flow_lr.flo"},
             {"flow_rl", "flow_rl.flo"},    {"depth", "depth.hdr"},             {"depth_valid", "depth_valid.pgm"},
             {"disparity_png", "disparity.png"}};
  });

  st.run("render_rgb", [&] {
    io::write_png(out / "rgb.png", fusion::render_rgb(res.fused.cube, res.fused.valid));
    files["rgb_png"] = "rgb.png";
  });

  json spectra = json::array();
  st.run("spectra", [&] {
    std::vector<NamedRoi> rois = cfg.rois;
    if (!cfg.landmarks.empty()) {
      const auto lj = io::read_json(cfg.landmarks);
      const char* key = cfg.fuse_into == FusionTarget::right ? "rois" : "rois_left";
      if (!lj.contains(key)) throw ConfigError(std::string("landmarks file has no '") + key + "' list");
      const auto lm = rois_from_json(lj.at(key));
      rois.insert(rois.end(), lm.begin(), lm.end());
    }
    for (const auto& r : rois) {
      json e{{"name", r.name}};
      try {
        const auto sp = fusion::extract_spectrum(fused_full, r.roi);
        const std::string csv = "spectrum_" + r.name + ".csv";
        fusion::write_spectrum_csv(out / csv, sp);
        e["csv"] = csv;
        e["pixels"] = sp.pixels;
        if (!r.expected.empty()) {
          if (r.expected.size() != sp.samples.size()) throw ConfigError("roi '" + r.name + "' expects a different band count");
          double acc = 0.0;
          for (std::size_t b = 0; b < sp.samples.size(); ++b) acc += std::pow(sp.samples[b].mean - r.expected[b], 2);
          e["rmse"] = std::sqrt(acc / static_cast<double>(sp.samples.size()));
        }
      } catch (const EmptyResultError&) {
        e["pixels"] = 0;
      }
      spectra.push_back(e);
    }
  });

  json epe = nullptr;
  if (!cfg.gt_flow.empty()) {
    st.run("evaluate", [&] {
      const auto gt = io::read_flow(cfg.gt_flow);
      epe = flow::endpoint_error(res.flow_lr, gt).mean;
    });
  }

  json report{{"band_count", res.fused.cube.bands()},
              {"wavelengths", res.fused.cube.wavelengths()},
              {"duplicate_wavelengths", res.fused.duplicate_wavelengths},
              {"width", res.fused.width()},
              {"height", res.fused.height()},
              {"crop", {{"x", res.fused.crop_x}, {"y", res.fused.crop_y}}},
              {"baseline", rig.baseline()},
              {"convergence_deg", rig.convergence_deg()},
              {"rms_reproj", rig_stats.rms_px},
              {"valid_fraction", fused_full.valid_fraction()},
              {"flow_valid_fraction", res.flow_lr.valid_fraction()},
              {"white_invalid_pixels", L.white_invalid + R.white_invalid},
              {"epe_if_gt", epe},
              {"flow_source", cfg.flow_source == FlowSource::estimated ? "estimated" : "ground_truth"},
              {"fuse_into", cfg.fuse_into == FusionTarget::right ? "right" : "left"},
              {"spectra", spectra},
              {"outputs", files},
              {"timings_file", "timings.json"}};
  res.report = report;
  io::write_json(out / "report.json", report);
  {
    std::ofstream txt(out / "report.txt");
    txt << report_text(report);
  }
  io::write_json(out / "timings.json", st.timings());
  return res;
}

}  // namespace msfuse::pipeline
