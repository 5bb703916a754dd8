#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "msfuse/fusion/fuse.hpp"

namespace msfuse::fusion {

struct CircleRoi {
  double cx = 0, cy = 0, radius = 1;
};

struct SpectrumSample {
  double wavelength_nm = 0;
  double mean = 0;
  double stddev = 0;  ///< population standard deviation
};

struct Spectrum {
  std::vector<SpectrumSample> samples;
  std::size_t pixels = 0;
  std::vector<double> means() const {
    std::vector<double> m;
    for (const auto& s : samples) m.push_back(s.mean);
    return m;
  }
};

/// Per-band statistics over valid pixels whose centers lie inside the circle.
inline Spectrum extract_spectrum(const msfa::SpectralCube& cube, const Mask& valid, const CircleRoi& roi) {
  if (!valid.empty()) require_same_size(cube, valid, "extract_spectrum: mask size differs");
  std::vector<std::pair<int, int>> px;
  for (int y = std::max(0, static_cast<int>(std::floor(roi.cy - roi.radius)));
       y <= std::min(cube.height() - 1, static_cast<int>(std::ceil(roi.cy + roi.radius))); ++y)
    for (int x = std::max(0, static_cast<int>(std::floor(roi.cx - roi.radius)));
         x <= std::min(cube.width() - 1, static_cast<int>(std::ceil(roi.cx + roi.radius))); ++x) {
      const double dx = x - roi.cx, dy = y - roi.cy;
      if (dx * dx + dy * dy > roi.radius * roi.radius) continue;
      if (!valid.empty() && !valid(x, y)) continue;
      px.emplace_back(x, y);
    }
  if (px.empty()) throw EmptyResultError("extract_spectrum: roi has no valid pixels");
  Spectrum s;
  s.pixels = px.size();
  for (int b = 0; b < cube.bands(); ++b) {
    double sum = 0.0;
    for (auto [x, y] : px) sum += cube.at(b, x, y);
    const double mean = sum / static_cast<double>(px.size());
    double var = 0.0;
    for (auto [x, y] : px) var += (cube.at(b, x, y) - mean) * (cube.at(b, x, y) - mean);
    s.samples.push_back({cube.wavelengths()[static_cast<std::size_t>(b)], mean, std::sqrt(var / static_cast<double>(px.size()))});
  }
  return s;
}

inline Spectrum extract_spectrum(const FusedCube& f, const CircleRoi& roi) { return extract_spectrum(f.cube, f.valid, roi); }

inline void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "wavelength_nm,mean,std\n";
  out.precision(9);
  for (const auto& v : s.samples) out << v.wavelength_nm << ',' << v.mean << ',' << v.stddev << '\n';
}

}  // namespace msfuse::fusion
