#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <vector>

#include <png.h>

#include "msfuse/errors.hpp"
#include "msfuse/image.hpp"

namespace msfuse::io {

/// Writes 8-bit RGB. Requires linking libpng.
inline void write_png(const std::filesystem::path& path, const Rgb8Image& img) {
  if (img.width <= 0 || img.height <= 0) throw DimensionError("write_png: empty image");
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.px(0, y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Reads 8-bit RGB or RGBA (alpha dropped). Used to verify exported files.
inline Rgb8Image read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) throw IoError("cannot read png " + path.string());
  image.format = PNG_FORMAT_RGB;
  Rgb8Image out{static_cast<int>(image.width), static_cast<int>(image.height), {}};
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode png " + path.string());
  }
  return out;
}

}  // namespace msfuse::io
