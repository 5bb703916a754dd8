#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msfuse/calib/rectify.hpp"
#include "msfuse/flow/matcher.hpp"
#include "msfuse/fusion/spectrum.hpp"
#include "msfuse/io/pattern_json.hpp"
#include "msfuse/msfa/demosaic.hpp"

namespace msfuse::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Failure inside a named pipeline stage.
struct StageError : Error {
  StageError(std::string stage_name, const std::string& cause)
      : Error("stage '" + stage_name + "' failed: " + cause), stage(std::move(stage_name)) {}
  std::string stage;
};

struct CameraInputs {
  fs::path mosaic;   ///< 16-bit PGM of raw counts
  fs::path pattern;  ///< JSON sidecar
  fs::path white;    ///< PGM, required
  fs::path dark;     ///< PGM, optional
};

struct NamedRoi {
  std::string name;
  fusion::CircleRoi roi;           ///< in the uncropped fused grid
  std::vector<double> expected;    ///< optional reference spectrum at the fused wavelengths
};

enum class CropMode { valid, none };
enum class FlowSource { estimated, ground_truth };
enum class FusionTarget { right, left };

struct PipelineConfig {
  CameraInputs left, right;
  fs::path rig;          ///< calibrated rig JSON; if empty, `calibration` is run first
  fs::path calibration;  ///< calibration set JSON (see CalibrationInputs)
  fs::path correction;   ///< optional per-camera spectral correction JSON
  fs::path output_dir = "out";
  fs::path gt_flow;      ///< optional ground-truth flow on the rectified left grid
  fs::path gt_flow_rl;   ///< optional ground-truth right -> left flow on the rectified right grid
  FlowSource flow_source = FlowSource::estimated;
  FusionTarget fuse_into = FusionTarget::right;
  fs::path landmarks;    ///< optional ROI list with reference spectra
  msfa::DemosaicMethod demosaic = msfa::DemosaicMethod::weighted_bilinear;
  bool rectify = true;
  calib::PrincipalPointMode principal_point = calib::PrincipalPointMode::recentered;
  flow::FlowParams flow;
  double max_vertical_px = 1.0;
  CropMode crop = CropMode::valid;
  std::optional<std::pair<int, int>> fixed_crop;  ///< centered (width, height) applied to both mosaics
  std::vector<NamedRoi> rois;
  std::uint64_t seed = 1;
};

inline const char* to_string(msfa::DemosaicMethod m) {
  return m == msfa::DemosaicMethod::nearest ? "nearest" : "weighted_bilinear";
}

inline msfa::DemosaicMethod demosaic_method_from_string(const std::string& s) {
  if (s == "nearest") return msfa::DemosaicMethod::nearest;
  if (s == "weighted_bilinear" || s == "bilinear") return msfa::DemosaicMethod::weighted_bilinear;
  throw ConfigError("unknown demosaic method '" + s + "'");
}

inline json flow_params_to_json(const flow::FlowParams& p) {
  return {{"search_radius", p.search_radius},   {"census_radius", p.census_radius}, {"aggregation_radius", p.aggregation_radius},
          {"median_passes", p.median_passes},   {"median_radius", p.median_radius}, {"median_sigma", p.median_sigma},
          {"lr_threshold", p.lr_threshold},     {"min_dim", p.min_dim},             {"init_passes", p.init_passes}};
}

inline flow::FlowParams flow_params_from_json(const json& j) {
  flow::FlowParams p;
  p.search_radius = j.value("search_radius", p.search_radius);
  p.census_radius = j.value("census_radius", p.census_radius);
  p.aggregation_radius = j.value("aggregation_radius", p.aggregation_radius);
  p.median_passes = j.value("median_passes", p.median_passes);
  p.median_radius = j.value("median_radius", p.median_radius);
  p.median_sigma = j.value("median_sigma", p.median_sigma);
  p.lr_threshold = j.value("lr_threshold", p.lr_threshold);
  p.min_dim = j.value("min_dim", p.min_dim);
  p.init_passes = j.value("init_passes", p.init_passes);
  p.validate();
  return p;
}

inline json rois_to_json(const std::vector<NamedRoi>& rois) {
  json a = json::array();
  for (const auto& r : rois) {
    json e{{"name", r.name}, {"x", r.roi.cx}, {"y", r.roi.cy}, {"radius", r.roi.radius}};
    if (!r.expected.empty()) e["expected"] = r.expected;
    a.push_back(e);
  }
  return a;
}

inline std::vector<NamedRoi> rois_from_json(const json& a) {
  std::vector<NamedRoi> out;
  for (const auto& e : a) {
    NamedRoi r{e.value("name", "roi" + std::to_string(out.size())),
               {e.at("x").get<double>(), e.at("y").get<double>(), e.at("radius").get<double>()},
               e.value("expected", std::vector<double>{})};
    if (!(r.roi.radius > 0.0)) throw ConfigError("roi radius must be positive");
    out.push_back(std::move(r));
  }
  return out;
}

/// Paths are written relative to `base` when they lie below it.
inline json config_to_json(const PipelineConfig& c, const fs::path& base = {}) {
  auto rel = [&](const fs::path& p) -> json {
    if (p.empty()) return nullptr;
    return base.empty() ? p.generic_string() : p.lexically_relative(base).generic_string();
  };
  auto cam = [&](const CameraInputs& ci) {
    return json{{"mosaic", rel(ci.mosaic)}, {"pattern", rel(ci.pattern)}, {"white", rel(ci.white)}, {"dark", rel(ci.dark)}};
  };
  json j{{"left", cam(c.left)},
         {"right", cam(c.right)},
         {"rig", rel(c.rig)},
         {"calibration", rel(c.calibration)},
         {"correction", rel(c.correction)},
         {"output_dir", rel(c.output_dir)},
         {"gt_flow", rel(c.gt_flow)},
         {"gt_flow_rl", rel(c.gt_flow_rl)},
         {"flow_source", c.flow_source == FlowSource::estimated ? "estimated" : "ground_truth"},
         {"fuse_into", c.fuse_into == FusionTarget::right ? "right" : "left"},
         {"landmarks", rel(c.landmarks)},
         {"demosaic", to_string(c.demosaic)},
         {"rectify", c.rectify},
         {"principal_point", c.principal_point == calib::PrincipalPointMode::shared ? "shared" : "recentered"},
         {"flow", flow_params_to_json(c.flow)},
         {"max_vertical_px", c.max_vertical_px},
         {"crop", c.crop == CropMode::valid ? "valid" : "none"},
         {"fixed_crop", c.fixed_crop ? json{c.fixed_crop->first, c.fixed_crop->second} : json(nullptr)},
         {"rois", rois_to_json(c.rois)},
         {"seed", c.seed}};
  return j;
}

/// Relative paths resolve against `base` (normally the config file's directory).
inline PipelineConfig config_from_json(const json& j, const fs::path& base) {
  try {
    auto path = [&](const json& obj, const char* key) -> fs::path {
      if (!obj.contains(key) || obj.at(key).is_null()) return {};
      fs::path p = obj.at(key).get<std::string>();
      return p.is_absolute() ? p : base / p;
    };
    PipelineConfig c;
    auto cam = [&](const char* key) {
      CameraInputs ci;
      if (!j.contains(key)) return ci;
      const auto& o = j.at(key);
      ci.mosaic = path(o, "mosaic");
      ci.pattern = path(o, "pattern");
      ci.white = path(o, "white");
      ci.dark = path(o, "dark");
      return ci;
    };
    c.left = cam("left");
    c.right = cam("right");
    c.rig = path(j, "rig");
    c.calibration = path(j, "calibration");
    c.correction = path(j, "correction");
    if (auto o = path(j, "output_dir"); !o.empty()) c.output_dir = o;
    c.gt_flow = path(j, "gt_flow");
    c.gt_flow_rl = path(j, "gt_flow_rl");
    const std::string src = j.value("flow_source", std::string("estimated"));
    if (src != "estimated" && src != "ground_truth") throw ConfigError("flow_source must be 'estimated' or 'ground_truth'");
    c.flow_source = src == "estimated" ? FlowSource::estimated : FlowSource::ground_truth;
    const std::string into = j.value("fuse_into", std::string("right"));
    if (into != "right" && into != "left") throw ConfigError("fuse_into must be 'right' or 'left'");
    c.fuse_into = into == "right" ? FusionTarget::right : FusionTarget::left;
    c.landmarks = path(j, "landmarks");
    c.demosaic = demosaic_method_from_string(j.value("demosaic", std::string("weighted_bilinear")));
    c.rectify = j.value("rectify", true);
    const std::string pp = j.value("principal_point", std::string("recentered"));
    if (pp != "shared" && pp != "recentered") throw ConfigError("principal_point must be 'shared' or 'recentered'");
    c.principal_point = pp == "shared" ? calib::PrincipalPointMode::shared : calib::PrincipalPointMode::recentered;
    if (j.contains("flow")) c.flow = flow_params_from_json(j.at("flow"));
    c.max_vertical_px = j.value("max_vertical_px", 1.0);
    const std::string crop = j.value("crop", std::string("valid"));
    if (crop != "valid" && crop != "none") throw ConfigError("crop must be 'valid' or 'none'");
    c.crop = crop == "valid" ? CropMode::valid : CropMode::none;
    if (j.contains("fixed_crop") && !j.at("fixed_crop").is_null()) {
      const auto v = j.at("fixed_crop").get<std::vector<int>>();
      if (v.size() != 2 || v[0] <= 0 || v[1] <= 0) throw ConfigError("fixed_crop must be [width, height]");
      c.fixed_crop = std::pair{v[0], v[1]};
    }
    if (j.contains("rois")) c.rois = rois_from_json(j.at("rois"));
    c.seed = j.value("seed", std::uint64_t{1});
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
}

inline PipelineConfig read_config(const fs::path& path) {
  return config_from_json(io::read_json(path), fs::absolute(path).parent_path());
}

/// Files of a checkerboard calibration: paired gray images plus board and initial intrinsics.
struct CalibrationInputs {
  calib::CheckerboardSpec board;
  std::vector<fs::path> left_images;
  std::vector<fs::path> right_images;
  calib::PinholeCamera left_init;
  calib::PinholeCamera right_init;
};

}  // namespace msfuse::pipeline
