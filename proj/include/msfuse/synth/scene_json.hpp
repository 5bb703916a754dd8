#pragma once

#include <json.hpp>

#include "msfuse/calib/rig_json.hpp"
#include "msfuse/synth/scene.hpp"

namespace msfuse::synth {

using json = nlohmann::json;

inline json material_to_json(const Material& m) {
  json lobes = json::array();
  for (const auto& g : m.lobes) lobes.push_back({{"amplitude", g.amplitude}, {"center_nm", g.center_nm}, {"width_nm", g.width_nm}});
  return {{"name", m.name}, {"constant", m.constant}, {"lobes", lobes}};
}

inline Material material_from_json(const json& j) {
  Material m{j.value("name", std::string{}), j.value("constant", 0.5), {}};
  for (const auto& g : j.value("lobes", json::array()))
    m.lobes.push_back({g.at("amplitude").get<double>(), g.at("center_nm").get<double>(), g.at("width_nm").get<double>()});
  m.validate();
  return m;
}

inline const char* to_string(TextureKind k) {
  switch (k) {
    case TextureKind::uniform: return "uniform";
    case TextureKind::tiles: return "tiles";
    case TextureKind::checkerboard: return "checkerboard";
  }
  return "uniform";
}

inline TextureKind texture_kind_from_string(const std::string& s) {
  if (s == "uniform") return TextureKind::uniform;
  if (s == "tiles") return TextureKind::tiles;
  if (s == "checkerboard") return TextureKind::checkerboard;
  throw ConfigError("unknown texture kind '" + s + "'");
}

inline json patch_to_json(const Patch& p) {
  json sw = json::array();
  for (const auto& s : p.texture.swatches) sw.push_back({{"extent", {s.x_min, s.y_min, s.x_max, s.y_max}}, {"material", s.material}});
  json tex{{"kind", to_string(p.texture.kind)},
           {"material", p.texture.material},
           {"material_alt", p.texture.material_alt},
           {"palette", p.texture.palette},
           {"tile_size", p.texture.tile_size},
           {"seed", p.texture.seed},
           {"board", calib::board_to_json(p.texture.board)},
           {"swatches", sw}};
  return {{"name", p.name},
          {"pose", calib::transform_to_json(p.pose)},
          {"extent", {p.x_min, p.y_min, p.x_max, p.y_max}},
          {"texture", tex}};
}

inline Patch patch_from_json(const json& j) {
  Patch p;
  p.name = j.value("name", std::string{});
  p.pose = calib::transform_from_json(j.at("pose"));
  const auto e = j.at("extent").get<std::vector<double>>();
  if (e.size() != 4 || !(e[2] > e[0]) || !(e[3] > e[1])) throw ConfigError("patch extent must be [x_min, y_min, x_max, y_max]");
  p.x_min = e[0], p.y_min = e[1], p.x_max = e[2], p.y_max = e[3];
  const json t = j.value("texture", json::object());
  p.texture.kind = texture_kind_from_string(t.value("kind", std::string("uniform")));
  p.texture.material = t.value("material", 0);
  p.texture.material_alt = t.value("material_alt", 1);
  p.texture.palette = t.value("palette", std::vector<int>{});
  p.texture.tile_size = t.value("tile_size", 0.001);
  p.texture.seed = t.value("seed", std::uint64_t{1});
  if (t.contains("board")) p.texture.board = calib::board_from_json(t.at("board"));
  for (const auto& s : t.value("swatches", json::array())) {
    const auto se = s.at("extent").get<std::vector<double>>();
    if (se.size() != 4) throw ConfigError("swatch extent must have 4 entries");
    p.texture.swatches.push_back({se[0], se[1], se[2], se[3], s.at("material").get<int>()});
  }
  if (!(p.texture.tile_size > 0.0)) throw ConfigError("tile_size must be positive");
  return p;
}

inline json scene_to_json(const Scene& s) {
  json mats = json::array(), patches = json::array();
  for (const auto& m : s.materials) mats.push_back(material_to_json(m));
  for (const auto& p : s.patches) patches.push_back(patch_to_json(p));
  return {{"materials", mats}, {"patches", patches}, {"background_material", s.background_material}};
}

inline Scene scene_from_json(const json& j) {
  try {
    Scene s;
    for (const auto& m : j.at("materials")) s.materials.push_back(material_from_json(m));
    for (const auto& p : j.at("patches")) s.patches.push_back(patch_from_json(p));
    s.background_material = j.value("background_material", -1);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene json: ") + e.what());
  }
}

}  // namespace msfuse::synth
