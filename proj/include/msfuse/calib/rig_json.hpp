#pragma once

#include <filesystem>

#include <json.hpp>

#include "msfuse/calib/features.hpp"
#include "msfuse/calib/rig.hpp"
#include "msfuse/io/pattern_json.hpp"

namespace msfuse::calib {

using json = nlohmann::json;

struct RigStats {
  double rms_px = 0.0;
  double baseline_m = 0.0;
  double convergence_deg = 0.0;
};

inline json camera_to_json(const PinholeCamera& c) {
  return json{{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"k1", c.k1}, {"k2", c.k2},
              {"k3", c.k3}, {"width", c.width}, {"height", c.height}, {"pixel_pitch", c.pixel_pitch_um}};
}

inline PinholeCamera camera_from_json(const json& j) {
  PinholeCamera c;
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.fx = j.at("fx").get<double>();
  c.fy = j.at("fy").get<double>();
  c.cx = j.value("cx", c.width / 2.0);
  c.cy = j.value("cy", c.height / 2.0);
  c.k1 = j.value("k1", 0.0);
  c.k2 = j.value("k2", 0.0);
  c.k3 = j.value("k3", 0.0);
  c.pixel_pitch_um = j.value("pixel_pitch", 5.5);
  if (!(c.fx > 0.0 && c.fy > 0.0)) throw ConfigError("camera focal lengths must be positive");
  return c;
}

inline json transform_to_json(const RigidTransform& T) {
  json R = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R.push_back(T.R(r, c));
  return json{{"R", R}, {"t", {T.t.x(), T.t.y(), T.t.z()}}};
}

inline RigidTransform transform_from_json(const json& j) {
  RigidTransform T;
  const auto R = j.at("R").get<std::vector<double>>();
  const auto t = j.at("t").get<std::vector<double>>();
  if (R.size() != 9 || t.size() != 3) throw ConfigError("transform needs 9 rotation and 3 translation entries");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) T.R(r, c) = R[static_cast<std::size_t>(3 * r + c)];
  T.t = Vec3(t[0], t[1], t[2]);
  if (!T.is_rotation(1e-6)) throw ConfigError("transform rotation is not orthonormal");
  return T;
}

inline json rig_to_json(const StereoRig& rig, const RigStats& stats) {
  return json{{"left", camera_to_json(rig.left)},
              {"right", camera_to_json(rig.right)},
              {"right_to_left", transform_to_json(rig.right_to_left)},
              {"stats", {{"rms_px", stats.rms_px}, {"baseline_m", stats.baseline_m}, {"convergence_deg", stats.convergence_deg}}}};
}

inline StereoRig rig_from_json(const json& j) {
  try {
    return StereoRig{camera_from_json(j.at("left")), camera_from_json(j.at("right")), transform_from_json(j.at("right_to_left"))};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("rig json: ") + e.what());
  }
}

inline RigStats rig_stats_from_json(const json& j) {
  RigStats s;
  if (!j.contains("stats")) return s;
  const auto& st = j.at("stats");
  s.rms_px = st.value("rms_px", 0.0);
  s.baseline_m = st.value("baseline_m", 0.0);
  s.convergence_deg = st.value("convergence_deg", 0.0);
  return s;
}

inline void write_rig(const std::filesystem::path& p, const StereoRig& rig, const RigStats& stats) {
  io::write_json(p, rig_to_json(rig, stats));
}
inline StereoRig read_rig(const std::filesystem::path& p) { return rig_from_json(io::read_json(p)); }

inline json board_to_json(const CheckerboardSpec& b) {
  return json{{"inner_rows", b.inner_rows}, {"inner_cols", b.inner_cols}, {"square_size", b.square_size}};
}

inline CheckerboardSpec board_from_json(const json& j) {
  CheckerboardSpec b{j.at("inner_rows").get<int>(), j.at("inner_cols").get<int>(), j.at("square_size").get<double>()};
  b.validate();
  return b;
}

}  // namespace msfuse::calib
