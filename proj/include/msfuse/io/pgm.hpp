#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "msfuse/errors.hpp"
#include "msfuse/image.hpp"

namespace msfuse::io {

struct PgmImage {
  Image<float> values;  ///< raw counts
  int maxval = 65535;
};

namespace detail {
inline void skip_ws_and_comments(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}
}  // namespace detail

inline PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError(path.string() + ": not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  detail::skip_ws_and_comments(in);
  in >> w;
  detail::skip_ws_and_comments(in);
  in >> h;
  detail::skip_ws_and_comments(in);
  in >> maxval;
  in.get();
  if (!in || w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError(path.string() + ": bad PGM header");
  PgmImage out{Image<float>(w, h), maxval};
  const bool wide = maxval > 255;
  for (float& v : out.values.pixels()) {
    unsigned char b[2] = {0, 0};
    in.read(reinterpret_cast<char*>(b), wide ? 2 : 1);
    v = wide ? static_cast<float>((b[0] << 8) | b[1]) : static_cast<float>(b[0]);
  }
  if (!in) throw IoError(path.string() + ": truncated PGM");
  return out;
}

/// Values are rounded and clamped to [0, maxval]; 16-bit samples are written big-endian.
inline void write_pgm(const std::filesystem::path& path, const Image<float>& img, int maxval = 65535) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width() << " " << img.height() << "\n" << maxval << "\n";
  const bool wide = maxval > 255;
  for (float v : img.pixels()) {
    const auto q = static_cast<unsigned>(std::clamp(std::lround(v), 0L, static_cast<long>(maxval)));
    if (wide) {
      const unsigned char b[2] = {static_cast<unsigned char>(q >> 8), static_cast<unsigned char>(q & 0xff)};
      out.write(reinterpret_cast<const char*>(b), 2);
    } else {
      const auto b = static_cast<unsigned char>(q);
      out.write(reinterpret_cast<const char*>(&b), 1);
    }
  }
  if (!out) throw IoError("short write on " + path.string());
}

/// Unit-range gray image to 16-bit PGM.
inline void write_gray_pgm(const std::filesystem::path& path, const GrayImage& img) {
  Image<float> scaled(img.width(), img.height());
  auto src = img.pixels();
  auto dst = scaled.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp(src[i], 0.0f, 1.0f) * 65535.0f;
  write_pgm(path, scaled, 65535);
}

inline GrayImage read_gray_pgm(const std::filesystem::path& path) {
  auto pgm = read_pgm(path);
  for (float& v : pgm.values.pixels()) v /= static_cast<float>(pgm.maxval);
  return std::move(pgm.values);
}

inline void write_mask_pgm(const std::filesystem::path& path, const Mask& mask) {
  Image<float> img(mask.width(), mask.height());
  auto src = mask.pixels();
  auto dst = img.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255.0f : 0.0f;
  write_pgm(path, img, 255);
}

inline Mask read_mask_pgm(const std::filesystem::path& path) {
  auto pgm = read_pgm(path);
  Mask m(pgm.values.width(), pgm.values.height());
  auto src = pgm.values.pixels();
  auto dst = m.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0f ? 1 : 0;
  return m;
}

}  // namespace msfuse::io
