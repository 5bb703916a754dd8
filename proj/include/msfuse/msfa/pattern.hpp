#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "msfuse/errors.hpp"
#include "msfuse/image.hpp"

namespace msfuse::msfa {

/// Row/column phase of the filter pattern at pixel (0,0).
struct PatternOffset {
  int row = 0;
  int col = 0;
  friend bool operator==(const PatternOffset&, const PatternOffset&) = default;
};

/// n x m mosaic filter layout. cell_band is row-major, one band index per cell.
struct MsfaPattern {
  int rows = 1;
  int cols = 1;
  std::vector<int> cell_band{0};
  std::vector<double> band_wavelengths{550.0};

  int band_count() const noexcept { return rows * cols; }

  int band_at_cell(int r, int c) const noexcept { return cell_band[static_cast<std::size_t>(r * cols + c)]; }

  int band_at(int x, int y, PatternOffset offset = {}) const noexcept {
    const int r = (y + offset.row) % rows;
    const int c = (x + offset.col) % cols;
    return band_at_cell(r, c);
  }

  /// Cell (row, col) in the pattern that carries band b.
  PatternOffset cell_of(int band) const {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (band_at_cell(r, c) == band) return {r, c};
    throw ConfigError("band " + std::to_string(band) + " not present in pattern");
  }

  void validate() const {
    if (rows < 1 || cols < 1) throw ConfigError("pattern dimensions must be positive");
    const auto n = static_cast<std::size_t>(rows * cols);
    if (cell_band.size() != n) throw ConfigError("cell_band size does not match rows*cols");
    if (band_wavelengths.size() != n) throw ConfigError("wavelength count does not match rows*cols");
    std::vector<int> seen(n, 0);
    for (int b : cell_band) {
      if (b < 0 || static_cast<std::size_t>(b) >= n) throw ConfigError("band index out of range in cell_band");
      if (seen[static_cast<std::size_t>(b)]++) throw ConfigError("band index repeated in cell_band");
    }
    for (double w : band_wavelengths)
      if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("wavelengths must be positive");
  }

  /// Row-major band layout with equally spaced centers over [first_nm, last_nm].
  static MsfaPattern uniform(int rows, int cols, double first_nm, double last_nm) {
    MsfaPattern p;
    p.rows = rows;
    p.cols = cols;
    const int n = rows * cols;
    p.cell_band.resize(static_cast<std::size_t>(n));
    p.band_wavelengths.resize(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) {
      p.cell_band[static_cast<std::size_t>(b)] = b;
      p.band_wavelengths[static_cast<std::size_t>(b)] =
          n == 1 ? first_nm : first_nm + (last_nm - first_nm) * b / static_cast<double>(n - 1);
    }
    p.validate();
    return p;
  }

  friend bool operator==(const MsfaPattern&, const MsfaPattern&) = default;
};

/// Raw single-plane capture of a mosaic sensor.
struct MosaicFrame {
  Image<float> values;
  MsfaPattern pattern;
  PatternOffset origin_offset;
  bool reflectance = false;

  int width() const noexcept { return values.width(); }
  int height() const noexcept { return values.height(); }
  int band_at(int x, int y) const noexcept { return pattern.band_at(x, y, origin_offset); }

  void validate() const {
    pattern.validate();
    if (origin_offset.row < 0 || origin_offset.row >= pattern.rows || origin_offset.col < 0 ||
        origin_offset.col >= pattern.cols)
      throw ConfigError("origin_offset outside the pattern");
    if (width() < pattern.cols || height() < pattern.rows)
      throw ConfigError("frame smaller than its filter pattern");
    for (float v : values.pixels())
      if (!std::isfinite(v) || v < 0.0f) throw ConfigError("mosaic values must be finite and non-negative");
  }
};

}  // namespace msfuse::msfa
