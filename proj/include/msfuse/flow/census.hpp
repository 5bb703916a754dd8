#pragma once

#include <bit>
#include <cstdint>

#include "msfuse/image.hpp"

namespace msfuse::flow {

using CensusImage = Image<std::uint64_t>;

/// Census descriptor over a (2r+1)^2 window, one bit per neighbor set when the neighbor is darker
/// than the center. Replicate border; r <= 3 so the descriptor fits in 64 bits.
inline CensusImage census_transform(const GrayImage& img, int radius = 3) {
  if (radius < 1 || radius > 3) throw ConfigError("census radius must be 1..3");
  const int w = img.width(), h = img.height();
  CensusImage out(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float c = img(x, y);
      std::uint64_t bits = 0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          if (dx == 0 && dy == 0) continue;
          bits = (bits << 1) | static_cast<std::uint64_t>(img.clamped(x + dx, y + dy) < c);
        }
      out(x, y) = bits;
    }
  return out;
}

inline int hamming(std::uint64_t a, std::uint64_t b) noexcept { return std::popcount(a ^ b); }

}  // namespace msfuse::flow
