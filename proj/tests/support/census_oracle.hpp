#pragma once

#include <bitset>
#include <climits>
#include <vector>

#include "msfuse/image.hpp"

namespace msfuse::test {

/// Exhaustive integer matcher written independently of the library: 7x7 census (neighbor darker than
/// center, replicate border), Hamming costs summed over a 5x5 box with replicate border, argmin over
/// every displacement in [-R, R]^2 whose target pixel lies inside the image. Ties prefer the smaller
/// |d|^2, then smaller dy, then smaller dx.
struct BruteForceMatch {
  Image<int> du, dv;
  Mask found;
};

inline BruteForceMatch brute_force_census_match(const GrayImage& a, const GrayImage& b, int R) {
  const int w = a.width(), h = a.height();
  auto census = [&](const GrayImage& img) {
    std::vector<std::bitset<48>> c(static_cast<std::size_t>(w * h));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        int bit = 0;
        for (int j = -3; j <= 3; ++j)
          for (int i = -3; i <= 3; ++i) {
            if (i == 0 && j == 0) continue;
            c[static_cast<std::size_t>(y * w + x)][static_cast<std::size_t>(bit++)] = img.clamped(x + i, y + j) < img(x, y);
          }
      }
    return c;
  };
  const auto ca = census(a), cb = census(b);
  auto at = [&](const std::vector<std::bitset<48>>& c, int x, int y) -> const std::bitset<48>& {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return c[static_cast<std::size_t>(y * w + x)];
  };
  BruteForceMatch out{Image<int>(w, h), Image<int>(w, h), Mask(w, h, 0)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      long best = LONG_MAX;
      int bx = 0, by = 0;
      for (int dy = -R; dy <= R; ++dy)
        for (int dx = -R; dx <= R; ++dx) {
          if (x + dx < 0 || y + dy < 0 || x + dx >= w || y + dy >= h) continue;
          long cost = 0;
          for (int j = -2; j <= 2; ++j)
            for (int i = -2; i <= 2; ++i)
              cost += static_cast<long>((at(ca, x + i, y + j) ^ at(cb, x + dx + i, y + dy + j)).count());
          const long r = dx * dx + dy * dy, br = bx * bx + by * by;
          const bool take = best == LONG_MAX || cost < best ||
                            (cost == best && (r < br || (r == br && (dy < by || (dy == by && dx < bx)))));
          if (take) {
            best = cost;
            bx = dx;
            by = dy;
          }
        }
      if (best == LONG_MAX) continue;
      out.du(x, y) = bx;
      out.dv(x, y) = by;
      out.found(x, y) = 1;
    }
  return out;
}

}  // namespace msfuse::test
