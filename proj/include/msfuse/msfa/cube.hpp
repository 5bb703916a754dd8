#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msfuse/errors.hpp"
#include "msfuse/image.hpp"

namespace msfuse::msfa {

enum class BandSource : unsigned char { left, right };

inline const char* to_string(BandSource s) { return s == BandSource::left ? "left" : "right"; }

/// width x height x bands volume, stored band-sequential.
class SpectralCube {
 public:
  SpectralCube() = default;
  SpectralCube(int width, int height, std::vector<double> wavelengths, BandSource source = BandSource::left,
               float fill = 0.0f)
      : width_(width),
        height_(height),
        wavelengths_(std::move(wavelengths)),
        sources_(wavelengths_.size(), source),
        values_(plane_size() * wavelengths_.size(), fill) {
    if (width < 0 || height < 0) throw DimensionError("negative cube dimensions");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int bands() const noexcept { return static_cast<int>(wavelengths_.size()); }
  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

  const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }
  std::vector<double>& wavelengths() noexcept { return wavelengths_; }
  const std::vector<BandSource>& band_sources() const noexcept { return sources_; }
  std::vector<BandSource>& band_sources() noexcept { return sources_; }

  bool reflectance() const noexcept { return reflectance_; }
  void set_reflectance(bool r) noexcept { reflectance_ = r; }

  float& at(int band, int x, int y) noexcept { return values_[offset(band, x, y)]; }
  float at(int band, int x, int y) const noexcept { return values_[offset(band, x, y)]; }

  std::span<float> band(int b) noexcept { return std::span<float>(values_).subspan(b * plane_size(), plane_size()); }
  std::span<const float> band(int b) const noexcept {
    return std::span<const float>(values_).subspan(b * plane_size(), plane_size());
  }

  GrayImage band_image(int b) const {
    GrayImage img(width_, height_);
    auto src = band(b);
    std::copy(src.begin(), src.end(), img.pixels().begin());
    return img;
  }

  void set_band(int b, const Image<float>& img) {
    require_same_size(*this, img, "band image size differs from cube");
    std::copy(img.pixels().begin(), img.pixels().end(), band(b).begin());
  }

  std::vector<float>& storage() noexcept { return values_; }
  const std::vector<float>& storage() const noexcept { return values_; }

  friend bool operator==(const SpectralCube&, const SpectralCube&) = default;

 private:
  std::size_t offset(int band, int x, int y) const noexcept {
    return static_cast<std::size_t>(band) * plane_size() + static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> wavelengths_;
  std::vector<BandSource> sources_;
  std::vector<float> values_;
  bool reflectance_ = false;
};

}  // namespace msfuse::msfa
