#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msfuse/io/pattern_json.hpp"
#include "msfuse/msfa/cube.hpp"

namespace msfuse::fusion {

/// Per-band affine map v' = clamp(gain * v + offset, 0, 1).
struct SpectralCorrection {
  std::vector<double> gain;
  std::vector<double> offset;

  static SpectralCorrection identity(int bands) {
    return {std::vector<double>(static_cast<std::size_t>(bands), 1.0), std::vector<double>(static_cast<std::size_t>(bands), 0.0)};
  }
  int bands() const { return static_cast<int>(gain.size()); }

  void validate() const {
    if (gain.size() != offset.size()) throw ConfigError("correction gain/offset lengths differ");
    for (double g : gain)
      if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("correction gains must be positive");
    for (double o : offset)
      if (!std::isfinite(o)) throw ConfigError("correction offsets must be finite");
  }
};

inline msfa::SpectralCube apply_spectral_correction(const msfa::SpectralCube& cube, const SpectralCorrection& corr) {
  corr.validate();
  if (corr.bands() != cube.bands()) throw ConfigError("correction band count does not match cube");
  msfa::SpectralCube out = cube;
  for (int b = 0; b < cube.bands(); ++b) {
    const double g = corr.gain[static_cast<std::size_t>(b)], o = corr.offset[static_cast<std::size_t>(b)];
    for (float& v : out.band(b)) v = static_cast<float>(std::clamp(g * v + o, 0.0, 1.0));
  }
  return out;
}

inline nlohmann::json correction_to_json(const SpectralCorrection& c) { return {{"gain", c.gain}, {"offset", c.offset}}; }

inline SpectralCorrection correction_from_json(const nlohmann::json& j) {
  SpectralCorrection c;
  try {
    c.gain = j.at("gain").get<std::vector<double>>();
    c.offset = j.contains("offset") ? j.at("offset").get<std::vector<double>>() : std::vector<double>(c.gain.size(), 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("spectral correction: ") + e.what());
  }
  c.validate();
  return c;
}

/// Correction file holding one entry per camera: {"left": {...}, "right": {...}}. Missing entries
/// mean identity.
struct CorrectionPair {
  std::optional<SpectralCorrection> left;
  std::optional<SpectralCorrection> right;
};

inline CorrectionPair read_corrections(const std::filesystem::path& path) {
  const auto j = io::read_json(path);
  CorrectionPair p;
  if (j.contains("left")) p.left = correction_from_json(j["left"]);
  if (j.contains("right")) p.right = correction_from_json(j["right"]);
  return p;
}

inline void write_corrections(const std::filesystem::path& path, const CorrectionPair& p) {
  nlohmann::json j = nlohmann::json::object();
  if (p.left) j["left"] = correction_to_json(*p.left);
  if (p.right) j["right"] = correction_to_json(*p.right);
  io::write_json(path, j);
}

}  // namespace msfuse::fusion
