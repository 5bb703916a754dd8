#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "msfuse/io/envi.hpp"
#include "msfuse/io/flow_file.hpp"
#include "msfuse/io/pattern_json.hpp"
#include "msfuse/io/pgm.hpp"
#include "msfuse/io/png.hpp"
#include "support/test_support.hpp"

using namespace msfuse;

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Envi, RoundTripKeepsValuesAndMetadata) {
  test::TempDir dir("envi");
  auto c = test::smooth_cube(13, 7, 5, 3);
  c.wavelengths() = {436.5, 450.25, 500, 675.125, 975};
  c.band_sources()[3] = msfa::BandSource::right;
  c.band_sources()[4] = msfa::BandSource::right;
  c.at(2, 4, 4) = -1.5e-7f;
  c.set_reflectance(true);
  io::write_envi(dir / "cube.hdr", c);
  EXPECT_TRUE(std::filesystem::exists(dir / "cube.img"));
  auto back = io::read_envi(dir / "cube.hdr");
  EXPECT_EQ(back, c);
  EXPECT_EQ(io::read_envi(dir / "cube.img"), c);
}

TEST(Envi, PayloadIsLittleEndianBandSequential) {
  test::TempDir dir("envi_le");
  msfa::SpectralCube c(2, 1, {500, 600});
  c.at(0, 0, 0) = 1.0f;
  c.at(0, 1, 0) = 2.0f;
  c.at(1, 0, 0) = 3.0f;
  c.at(1, 1, 0) = -0.5f;
  io::write_envi(dir / "c.hdr", c);
  auto bytes = slurp(dir / "c.img");
  ASSERT_EQ(bytes.size(), 16u);
  const float expect[4] = {1.0f, 2.0f, 3.0f, -0.5f};
  for (int i = 0; i < 4; ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(bytes[static_cast<std::size_t>(4 * i + k)]) << (8 * k);
    float v;
    std::memcpy(&v, &bits, 4);
    EXPECT_EQ(v, expect[i]);
  }
  const auto hdr = io::read_envi_header(dir / "c.hdr");
  EXPECT_EQ(hdr.at("samples"), "2");
  EXPECT_EQ(hdr.at("interleave"), "bsq");
}

TEST(Envi, ReadsMultiLineWavelengthList) {
  test::TempDir dir("envi_ml");
  {
    std::ofstream h(dir / "x.hdr");
    h << "ENVI\nsamples = 1\nlines = 1\nbands = 3\ndata type = 4\ninterleave = bsq\nbyte order = 0\n"
         "wavelength = {\n 400.0,\n 500.0,\n 600.0}\n";
    std::ofstream d(dir / "x.img", std::ios::binary);
    const float v[3] = {0.1f, 0.2f, 0.3f};
    d.write(reinterpret_cast<const char*>(v), sizeof v);
  }
  auto c = io::read_envi(dir / "x.hdr");
  EXPECT_EQ(c.wavelengths(), (std::vector<double>{400, 500, 600}));
  EXPECT_FLOAT_EQ(c.at(2, 0, 0), 0.3f);
}

TEST(Envi, MalformedInputsThrow) {
  test::TempDir dir("envi_bad");
  EXPECT_THROW(io::read_envi(dir / "missing.hdr"), IoError);
  io::write_envi(dir / "t.hdr", test::smooth_cube(4, 4, 2, 1));
  std::filesystem::resize_file(dir / "t.img", 10);
  EXPECT_THROW(io::read_envi(dir / "t.hdr"), IoError);
  {
    std::ofstream h(dir / "u.hdr");
    h << "ENVI\nsamples = 1\nlines = 1\nbands = 1\ndata type = 12\n";
  }
  EXPECT_THROW(io::read_envi(dir / "u.hdr"), IoError);
}

TEST(Pgm, SixteenBitRoundTrip) {
  test::TempDir dir("pgm");
  Image<float> img(9, 4);
  std::mt19937 rng(2);
  for (float& v : img.pixels()) v = static_cast<float>(rng() % 65536);
  io::write_pgm(dir / "a.pgm", img);
  auto back = io::read_pgm(dir / "a.pgm");
  EXPECT_EQ(back.maxval, 65535);
  EXPECT_EQ(back.values, img);
  // Big-endian samples after the header.
  auto bytes = slurp(dir / "a.pgm");
  const auto first = static_cast<unsigned>(img(0, 0));
  const std::size_t header = bytes.size() - 2 * img.size();
  EXPECT_EQ(bytes[header], first >> 8);
  EXPECT_EQ(bytes[header + 1], first & 0xff);
}

TEST(Pgm, CommentsAndEightBit) {
  test::TempDir dir("pgm8");
  {
    std::ofstream f(dir / "c.pgm", std::ios::binary);
    f << "P5\n# note\n2 1\n# another\n255\n";
    f.put(static_cast<char>(7));
    f.put(static_cast<char>(200));
  }
  auto p = io::read_pgm(dir / "c.pgm");
  EXPECT_EQ(p.values(0, 0), 7.0f);
  EXPECT_EQ(p.values(1, 0), 200.0f);
  EXPECT_EQ(p.maxval, 255);
}

TEST(Pgm, RejectsBadFiles) {
  test::TempDir dir("pgmbad");
  {
    std::ofstream f(dir / "a.pgm");
    f << "P2\n1 1\n255\n0\n";
  }
  EXPECT_THROW(io::read_pgm(dir / "a.pgm"), IoError);
  {
    std::ofstream f(dir / "b.pgm", std::ios::binary);
    f << "P5\n4 4\n65535\n";
  }
  EXPECT_THROW(io::read_pgm(dir / "b.pgm"), IoError);
}

TEST(Pgm, MaskRoundTrip) {
  test::TempDir dir("mask");
  Mask m(5, 3, 0);
  m(1, 1) = 1;
  m(4, 2) = 1;
  io::write_mask_pgm(dir / "m.pgm", m);
  EXPECT_EQ(io::read_mask_pgm(dir / "m.pgm"), m);
}

TEST(PatternJson, RoundTrip) {
  test::TempDir dir("pat");
  io::PatternSidecar s{msfa::MsfaPattern::uniform(2, 3, 500, 550), {1, 2}};
  s.pattern.cell_band = {5, 0, 3, 1, 4, 2};
  io::write_pattern(dir / "p.json", s);
  auto back = io::read_pattern(dir / "p.json");
  EXPECT_EQ(back.pattern, s.pattern);
  EXPECT_EQ(back.origin_offset, s.origin_offset);
  const auto j = io::read_json(dir / "p.json");
  EXPECT_EQ(j.at("cell_band").size(), 2u);
  EXPECT_EQ(j.at("cell_band")[1][0], 1);
}

TEST(PatternJson, FlatCellListAccepted) {
  auto s = io::pattern_from_json(nlohmann::json::parse(
      R"({"rows":2,"cols":2,"cell_band":[3,2,1,0],"wavelengths":[500,510,520,530]})"));
  EXPECT_EQ(s.pattern.band_at_cell(0, 0), 3);
  EXPECT_EQ(s.origin_offset, (msfa::PatternOffset{0, 0}));
}

TEST(PatternJson, InvalidSidecarsThrow) {
  EXPECT_THROW(io::pattern_from_json(nlohmann::json::parse(R"({"rows":2,"cols":2})")), ConfigError);
  EXPECT_THROW(io::pattern_from_json(nlohmann::json::parse(
                   R"({"rows":2,"cols":2,"cell_band":[0,0,1,2],"wavelengths":[500,510,520,530]})")),
               ConfigError);
  EXPECT_THROW(io::pattern_from_json(nlohmann::json::parse(
                   R"({"rows":1,"cols":2,"cell_band":[0,1],"wavelengths":[500,510],"origin_offset":[0,2]})")),
               ConfigError);
}

TEST(FlowFile, RoundTrip) {
  test::TempDir dir("flo");
  flow::FlowField f(7, 5);
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> u(-20.0f, 20.0f);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) {
      f.u(x, y) = u(rng);
      f.v(x, y) = u(rng) * 0.01f;
      f.valid(x, y) = (x + y) % 3 != 0;
    }
  io::write_flow(dir / "a.flo", f);
  auto back = io::read_flow(dir / "a.flo");
  EXPECT_EQ(back.u, f.u);
  EXPECT_EQ(back.v, f.v);
  EXPECT_EQ(back.valid, f.valid);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.flo"), std::string("MSFLOW 1\n7 5\n").size() + 35u * 9u);
}

TEST(FlowFile, RejectsForeignFiles) {
  test::TempDir dir("flobad");
  {
    std::ofstream f(dir / "x.flo");
    f << "PIEH garbage";
  }
  EXPECT_THROW(io::read_flow(dir / "x.flo"), IoError);
}

TEST(Png, RoundTrip) {
  test::TempDir dir("png");
  Rgb8Image img{6, 4, std::vector<std::uint8_t>(72)};
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<std::uint8_t>(i * 7);
  io::write_png(dir / "a.png", img);
  auto back = io::read_png(dir / "a.png");
  EXPECT_EQ(back.width, 6);
  EXPECT_EQ(back.height, 4);
  EXPECT_EQ(back.data, img.data);
  auto bytes = slurp(dir / "a.png");
  EXPECT_EQ(bytes[1], 'P');
  EXPECT_THROW(io::read_png(dir / "missing.png"), IoError);
}
