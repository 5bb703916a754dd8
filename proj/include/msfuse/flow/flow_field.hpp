#pragma once

#include <cmath>
#include <cstddef>

#include "msfuse/image.hpp"

namespace msfuse::flow {

/// Dense displacement on a reference grid: the match of pixel p lies at p + (u, v) in the target view.
struct FlowField {
  Image<float> u;
  Image<float> v;
  Mask valid;

  FlowField() = default;
  FlowField(int w, int h) : u(w, h, 0.0f), v(w, h, 0.0f), valid(w, h, 1) {}

  int width() const { return u.width(); }
  int height() const { return u.height(); }

  static FlowField constant(int w, int h, float du, float dv) {
    FlowField f(w, h);
    for (float& x : f.u.pixels()) x = du;
    for (float& x : f.v.pixels()) x = dv;
    return f;
  }

  double valid_fraction() const {
    if (valid.empty()) return 0.0;
    std::size_t n = 0;
    for (auto m : valid.pixels()) n += m != 0;
    return static_cast<double>(n) / static_cast<double>(valid.size());
  }
};

/// Horizontal disparity of a rectified pair: left pixel x matches right pixel x - d.
struct DisparityMap {
  Image<float> d;
  Mask valid;
  int width() const { return d.width(); }
  int height() const { return d.height(); }
};

struct DepthMap {
  Image<float> z;  ///< meters along the optical axis
  Mask valid;
  int width() const { return z.width(); }
  int height() const { return z.height(); }
};

}  // namespace msfuse::flow
