#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "msfuse/errors.hpp"
#include "msfuse/flow/flow_field.hpp"
#include "msfuse/io/envi.hpp"

namespace msfuse::io {

// Layout: "MSFLOW 1\n<width> <height>\n" then float32 LE u plane, float32 LE v plane, uint8 valid plane.


inline void write_flow(const std::filesystem::path& path, const flow::FlowField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "MSFLOW 1\n" << f.width() << ' ' << f.height() << '\n';
  detail::write_le_floats(out, f.u.pixels());
  detail::write_le_floats(out, f.v.pixels());
  out.write(reinterpret_cast<const char*>(f.valid.pixels().data()), static_cast<std::streamsize>(f.valid.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline flow::FlowField read_flow(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != "MSFLOW 1") throw IoError(path.string() + ": not a flow file");
  std::string dims;
  std::getline(in, dims);
  std::istringstream ds(dims);
  int w = -1, h = -1;
  if (!(ds >> w >> h) || w <= 0 || h <= 0) throw IoError(path.string() + ": bad flow header");
  flow::FlowField f(w, h);
  detail::read_le_floats(in, f.u.pixels());
  detail::read_le_floats(in, f.v.pixels());
  in.read(reinterpret_cast<char*>(f.valid.pixels().data()), static_cast<std::streamsize>(f.valid.size()));
  if (!in) throw IoError(path.string() + ": truncated flow file");
  return f;
}

}  // namespace msfuse::io
