#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "msfuse/errors.hpp"

namespace msfuse {

/// Dense row-major single-plane image. Pixel (x, y) has its center at integer coordinates.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(checked(width, height)), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  /// Replicate-edge access.
  const T& clamped(int x, int y) const noexcept {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  std::span<T> row(int y) noexcept { return std::span<T>(data_).subspan(index(0, y), width_); }
  std::span<const T> row(int y) const noexcept { return std::span<const T>(data_).subspan(index(0, y), width_); }

  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  bool same_size(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static long checked(int w, int h) {
    if (w < 0 || h < 0) throw DimensionError("negative image dimensions");
    return static_cast<long>(w) * h;
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Single-channel image with values in [0,1].
using GrayImage = Image<float>;
using Mask = Image<std::uint8_t>;

/// 8-bit interleaved RGB.
struct Rgb8Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> data;  ///< interleaved RGB rows
  std::uint8_t* px(int x, int y) { return &data[3 * (static_cast<std::size_t>(y) * width + x)]; }
  const std::uint8_t* px(int x, int y) const { return &data[3 * (static_cast<std::size_t>(y) * width + x)]; }
};

/// Bilinear sample with replicate-edge borders.
template <typename T>
double sample_bilinear(const Image<T>& img, double x, double y) noexcept {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  const double v00 = img.clamped(x0, y0);
  const double v10 = img.clamped(x0 + 1, y0);
  const double v01 = img.clamped(x0, y0 + 1);
  const double v11 = img.clamped(x0 + 1, y0 + 1);
  return (1 - ay) * ((1 - ax) * v00 + ax * v10) + ay * ((1 - ax) * v01 + ax * v11);
}

inline bool require_same_size(const auto& a, const auto& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) throw DimensionError(what);
  return true;
}

}  // namespace msfuse
