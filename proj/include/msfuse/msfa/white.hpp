#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "msfuse/msfa/pattern.hpp"

namespace msfuse::msfa {

struct WhiteReference {
  MosaicFrame white;
  std::optional<MosaicFrame> dark;

  /// Flat field built from one level per band (the per-band form of a white reference).
  static WhiteReference from_band_levels(const MsfaPattern& pattern, int width, int height, PatternOffset offset,
                                         const std::vector<double>& white_levels, double dark_level = 0.0) {
    if (white_levels.size() != static_cast<std::size_t>(pattern.band_count()))
      throw ConfigError("white level count does not match pattern");
    MosaicFrame white{Image<float>(width, height), pattern, offset, false};
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        white.values(x, y) = static_cast<float>(white_levels[static_cast<std::size_t>(white.band_at(x, y))]);
    WhiteReference ref{std::move(white), std::nullopt};
    if (dark_level != 0.0) ref.dark = MosaicFrame{Image<float>(width, height, static_cast<float>(dark_level)), pattern, offset, false};
    return ref;
  }
};

struct WhiteCorrected {
  MosaicFrame frame;
  Mask invalid;  ///< 1 where white - dark <= 0
  std::size_t invalid_count = 0;
};

/// Reflectance = clamp((frame - dark) / (white - dark), 0, 1), one gain per mosaic pixel.
inline WhiteCorrected white_correct(const MosaicFrame& frame, const WhiteReference& ref) {
  require_same_size(frame.values, ref.white.values, "white reference size differs from frame");
  if (!(frame.pattern == ref.white.pattern) || !(frame.origin_offset == ref.white.origin_offset))
    throw ConfigError("white reference pattern differs from frame");
  if (ref.dark) {
    require_same_size(frame.values, ref.dark->values, "dark reference size differs from frame");
    if (!(frame.pattern == ref.dark->pattern)) throw ConfigError("dark reference pattern differs from frame");
  }

  WhiteCorrected out{MosaicFrame{Image<float>(frame.width(), frame.height()), frame.pattern, frame.origin_offset, true},
                     Mask(frame.width(), frame.height(), 0), 0};
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      const double dark = ref.dark ? ref.dark->values(x, y) : 0.0;
      const double span = static_cast<double>(ref.white.values(x, y)) - dark;
      if (!(span > 0.0)) {
        out.invalid(x, y) = 1;
        ++out.invalid_count;
        continue;
      }
      const double r = (static_cast<double>(frame.values(x, y)) - dark) / span;
      out.frame.values(x, y) = static_cast<float>(std::clamp(r, 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace msfuse::msfa
