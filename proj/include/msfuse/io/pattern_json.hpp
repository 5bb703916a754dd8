#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "msfuse/errors.hpp"
#include "msfuse/msfa/pattern.hpp"

namespace msfuse::io {

using json = nlohmann::json;

/// Sidecar describing a mosaic layout: {rows, cols, cell_band, wavelengths, origin_offset}.
struct PatternSidecar {
  msfa::MsfaPattern pattern;
  msfa::PatternOffset origin_offset;
};

inline json to_json(const PatternSidecar& s) {
  json cells = json::array();
  for (int r = 0; r < s.pattern.rows; ++r) {
    json row = json::array();
    for (int c = 0; c < s.pattern.cols; ++c) row.push_back(s.pattern.band_at_cell(r, c));
    cells.push_back(row);
  }
  return json{{"rows", s.pattern.rows},
              {"cols", s.pattern.cols},
              {"cell_band", cells},
              {"wavelengths", s.pattern.band_wavelengths},
              {"origin_offset", {s.origin_offset.row, s.origin_offset.col}}};
}

inline PatternSidecar pattern_from_json(const json& j) {
  try {
    PatternSidecar s;
    s.pattern.rows = j.at("rows").get<int>();
    s.pattern.cols = j.at("cols").get<int>();
    s.pattern.cell_band.clear();
    for (const auto& row : j.at("cell_band")) {
      if (row.is_array())
        for (const auto& v : row) s.pattern.cell_band.push_back(v.get<int>());
      else
        s.pattern.cell_band.push_back(row.get<int>());
    }
    s.pattern.band_wavelengths = j.at("wavelengths").get<std::vector<double>>();
    if (j.contains("origin_offset")) {
      const auto& o = j.at("origin_offset");
      s.origin_offset = {o.at(0).get<int>(), o.at(1).get<int>()};
    }
    s.pattern.validate();
    if (s.origin_offset.row < 0 || s.origin_offset.row >= s.pattern.rows || s.origin_offset.col < 0 ||
        s.origin_offset.col >= s.pattern.cols)
      throw ConfigError("origin_offset outside the pattern");
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pattern sidecar: ") + e.what());
  }
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

inline PatternSidecar read_pattern(const std::filesystem::path& path) { return pattern_from_json(read_json(path)); }
inline void write_pattern(const std::filesystem::path& path, const PatternSidecar& s) { write_json(path, to_json(s)); }

}  // namespace msfuse::io
