#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "priornet/netpbm.hpp"

using namespace priornet;
using netpbm::ImageFormatError;
using Kind = ImageFormatError::Kind;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

Kind decode_kind(const std::vector<std::uint8_t>& b) {
  try {
    (void)netpbm::decode_ppm(b);
  } catch (const ImageFormatError& e) {
    return e.kind();
  }
  FAIL("expected ImageFormatError");
  return Kind::kBadMagic;
}

}  // namespace

TEST_CASE("P6 definition decodes byte values over 255") {
  auto b = bytes_of("P6\n2 2\n255\n");
  for (std::uint8_t v = 0; v < 12; ++v) b.push_back(static_cast<std::uint8_t>(v * 20));
  const Image img = netpbm::decode_ppm(b);
  REQUIRE(img.height() == 2);
  REQUIRE(img.width() == 2);
  // Interleaved RGB on disk, planar in memory.
  CHECK(img.at(0, 0, 0) == 0.0f);
  CHECK(img.at(1, 0, 0) == 20.0f / 255.0f);
  CHECK(img.at(2, 0, 0) == 40.0f / 255.0f);
  CHECK(img.at(0, 0, 1) == 60.0f / 255.0f);
  CHECK(img.at(2, 1, 1) == 220.0f / 255.0f);
  CHECK(netpbm::encode_ppm(img) == b);
}

TEST_CASE("header comments and whitespace are accepted") {
  auto b = bytes_of("P6 # comment\n# another\n1\t1 255\n");
  b.insert(b.end(), {255, 0, 128});
  const Image img = netpbm::decode_ppm(b);
  CHECK(img.at(0, 0, 0) == 1.0f);
  CHECK(img.at(2, 0, 0) == 128.0f / 255.0f);
}

TEST_CASE("format errors are distinct") {
  CHECK(decode_kind(bytes_of("P3\n1 1\n255\n\x01\x02\x03")) == Kind::kBadMagic);
  CHECK(decode_kind(bytes_of("P5\n1 1\n255\n\x01")) == Kind::kBadMagic);
  CHECK(decode_kind(bytes_of("P6\n1 1\n65535\n\x01\x02\x03")) == Kind::kBadMaxval);
  CHECK(decode_kind(bytes_of("P6\n1 1\n15\n\x01\x02\x03")) == Kind::kBadMaxval);
  CHECK(decode_kind(bytes_of("P6\nx 1\n255\n\x01\x02\x03")) == Kind::kBadHeader);
  CHECK(decode_kind(bytes_of("P6\n0 1\n255\n")) == Kind::kBadHeader);
  CHECK(decode_kind(bytes_of("P6\n2 2\n255\n\x01\x02\x03")) == Kind::kTruncated);
  CHECK(decode_kind(bytes_of("P6\n2 2")) == Kind::kTruncated);
  try {
    (void)netpbm::decode_ppm(bytes_of("P6\n2 2\n255\nabc"));
  } catch (const ImageFormatError& e) {
    CHECK(std::string(e.what()).find("truncated payload") != std::string::npos);
  }
}

TEST_CASE("quantization round-trip bound over many random images") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> d(-0.1f, 1.1f);
  std::uniform_int_distribution<std::size_t> side(1, 9);
  float worst = 0.0f;
  for (int n = 0; n < 1000; ++n) {
    Image img(side(rng), side(rng));
    for (auto& v : img.data()) v = d(rng);
    const Image back = netpbm::decode_ppm(netpbm::encode_ppm(img));
    for (std::size_t p = 0; p < img.size(); ++p)
      worst = std::max(worst, std::abs(back.data()[p] - std::clamp(img.data()[p], 0.0f, 1.0f)));
  }
  CHECK(worst <= 1.0f / 510.0f + 1e-7f);
}

TEST_CASE("quantize rounds half-way values and clamps") {
  CHECK(netpbm::quantize(-3.0f) == 0);
  CHECK(netpbm::quantize(7.0f) == 255);
  CHECK(netpbm::quantize(0.5f) == 128);
  CHECK(netpbm::quantize(1.0f / 255.0f) == 1);
}

TEST_CASE("PGM depth maps round-trip") {
  DepthMap d(3, 4);
  for (std::size_t p = 0; p < d.size(); ++p) d.data()[p] = static_cast<float>(p * 17) / 255.0f;
  const auto bytes = netpbm::encode_pgm(d);
  CHECK(netpbm::decode_pgm(bytes) == d);
  CHECK_THROWS_AS((void)netpbm::decode_pgm(netpbm::encode_ppm(Image(2, 2))), ImageFormatError);
}

TEST_CASE("file helpers map missing files to I/O errors and keep the path in format errors") {
  const auto dir = std::filesystem::temp_directory_path() / "priornet_netpbm_test";
  std::filesystem::create_directories(dir);
  CHECK_THROWS_AS((void)netpbm::read_image(dir / "missing.ppm"), IoError);
  const auto bad = dir / "bad.ppm";
  netpbm::write_file(bad, bytes_of("P6\n4 4\n255\n"));
  try {
    (void)netpbm::read_image(bad);
    FAIL("expected ImageFormatError");
  } catch (const ImageFormatError& e) {
    CHECK(e.kind() == Kind::kTruncated);
    CHECK(std::string(e.what()).find("bad.ppm") != std::string::npos);
  }
  Image img(3, 2, 0.25f);
  netpbm::write_image(img, dir / "ok.ppm");
  CHECK(netpbm::read_image(dir / "ok.ppm") == netpbm::decode_ppm(netpbm::encode_ppm(img)));
  std::filesystem::remove_all(dir);
}
