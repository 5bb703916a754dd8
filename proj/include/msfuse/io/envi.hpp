#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "msfuse/errors.hpp"
#include "msfuse/msfa/cube.hpp"

namespace msfuse::io {

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& braced) {
  std::string body = trim(braced);
  if (!body.empty() && body.front() == '{') body.erase(0, 1);
  if (!body.empty() && body.back() == '}') body.pop_back();
  std::vector<std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline void write_le_floats(std::ostream& os, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (float v : values) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      bits = __builtin_bswap32(bits);
      os.write(reinterpret_cast<const char*>(&bits), 4);
    }
  }
}

inline void read_le_floats(std::istream& is, std::span<float> values) {
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if constexpr (std::endian::native != std::endian::little) {
    for (float& v : values) v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
  }
}

}  // namespace detail

inline std::filesystem::path envi_header_path(const std::filesystem::path& p) {
  auto h = p;
  return h.replace_extension(".hdr");
}

inline std::filesystem::path envi_data_path(const std::filesystem::path& p) {
  auto d = p;
  return p.extension() == ".hdr" ? d.replace_extension(".img") : d;
}

/// Writes `<stem>.hdr` plus the band-sequential little-endian float32 payload at `data_path`.
inline void write_envi(const std::filesystem::path& data_path_in, const msfa::SpectralCube& cube,
                       const std::string& description = "msfuse cube") {
  const auto data_path = envi_data_path(data_path_in);
  std::ofstream hdr(envi_header_path(data_path), std::ios::binary);
  if (!hdr) throw IoError("cannot write " + envi_header_path(data_path).string());
  hdr << "ENVI\n"
      << "description = {" << description << "}\n"
      << "samples = " << cube.width() << "\n"
      << "lines = " << cube.height() << "\n"
      << "bands = " << cube.bands() << "\n"
      << "header offset = 0\n"
      << "file type = ENVI Standard\n"
      << "data type = 4\n"
      << "interleave = bsq\n"
      << "byte order = 0\n"
      << "reflectance = " << (cube.reflectance() ? 1 : 0) << "\n"
      << "wavelength units = Nanometers\n";
  if (cube.bands() > 0) {
    hdr << "wavelength = {";
    for (int b = 0; b < cube.bands(); ++b) hdr << (b ? ", " : "") << detail::format_double(cube.wavelengths()[b]);
    hdr << "}\n";
    hdr << "band source = {";
    for (int b = 0; b < cube.bands(); ++b) hdr << (b ? ", " : "") << msfa::to_string(cube.band_sources()[b]);
    hdr << "}\n";
  }
  std::ofstream data(data_path, std::ios::binary);
  if (!data) throw IoError("cannot write " + data_path.string());
  detail::write_le_floats(data, cube.storage());
  if (!data) throw IoError("short write on " + data_path.string());
}

inline std::map<std::string, std::string> read_envi_header(const std::filesystem::path& header) {
  std::ifstream in(header);
  if (!in) throw IoError("cannot open " + header.string());
  std::string line;
  std::getline(in, line);
  if (detail::trim(line) != "ENVI") throw IoError(header.string() + ": missing ENVI signature");
  std::map<std::string, std::string> fields;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos && std::getline(in, line)) value += " " + detail::trim(line);
    }
    fields[key] = value;
  }
  return fields;
}

inline msfa::SpectralCube read_envi(const std::filesystem::path& path) {
  const auto data_path = envi_data_path(path);
  const auto f = read_envi_header(envi_header_path(data_path));
  auto get_int = [&](const char* key) {
    auto it = f.find(key);
    if (it == f.end()) throw IoError(std::string("ENVI header lacks '") + key + "'");
    return std::stoi(it->second);
  };
  if (get_int("data type") != 4) throw IoError("only float32 ENVI cubes are supported");
  if (auto it = f.find("interleave"); it != f.end() && it->second != "bsq") throw IoError("only bsq interleave is supported");
  if (auto it = f.find("byte order"); it != f.end() && std::stoi(it->second) != 0) throw IoError("only little-endian cubes are supported");
  const int w = get_int("samples");
  const int h = get_int("lines");
  const int bands = get_int("bands");
  std::vector<double> wl(static_cast<std::size_t>(bands), 0.0);
  if (auto it = f.find("wavelength"); it != f.end()) {
    const auto items = detail::split_list(it->second);
    if (items.size() != wl.size()) throw IoError("wavelength list length differs from band count");
    for (std::size_t i = 0; i < items.size(); ++i) wl[i] = std::stod(items[i]);
  }
  msfa::SpectralCube cube(w, h, std::move(wl));
  if (auto it = f.find("band source"); it != f.end()) {
    const auto items = detail::split_list(it->second);
    if (items.size() != static_cast<std::size_t>(bands)) throw IoError("band source list length differs from band count");
    for (std::size_t i = 0; i < items.size(); ++i)
      cube.band_sources()[i] = items[i] == "right" ? msfa::BandSource::right : msfa::BandSource::left;
  }
  if (auto it = f.find("reflectance"); it != f.end()) cube.set_reflectance(std::stoi(it->second) != 0);
  std::ifstream data(data_path, std::ios::binary);
  if (!data) throw IoError("cannot open " + data_path.string());
  const long offset = f.count("header offset") ? std::stol(f.at("header offset")) : 0;
  data.seekg(offset);
  detail::read_le_floats(data, cube.storage());
  if (!data) throw IoError(data_path.string() + ": truncated cube payload");
  return cube;
}

}  // namespace msfuse::io
