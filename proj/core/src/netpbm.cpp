#include "priornet/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace priornet::netpbm {
namespace {

using Kind = ImageFormatError::Kind;

struct Header {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t payload_offset = 0;
};

Header parse_header(std::span<const std::uint8_t> bytes, char expected) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != static_cast<std::uint8_t>(expected)) {
    throw ImageFormatError(Kind::kBadMagic, std::string("bad magic: expected P") + expected);
  }
  std::size_t pos = 2;
  auto next_number = [&](const char* what) -> std::size_t {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size()) throw ImageFormatError(Kind::kTruncated, std::string("truncated header before ") + what);
    if (!std::isdigit(bytes[pos])) throw ImageFormatError(Kind::kBadHeader, std::string("bad header: expected ") + what);
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (v > (1u << 24)) throw ImageFormatError(Kind::kBadHeader, std::string("bad header: ") + what + " too large");
      ++pos;
    }
    return v;
  };
  Header h;
  h.width = next_number("width");
  h.height = next_number("height");
  const std::size_t maxval = next_number("maxval");
  if (h.width == 0 || h.height == 0) throw ImageFormatError(Kind::kBadHeader, "bad header: zero image extent");
  if (maxval != 255) {
    throw ImageFormatError(Kind::kBadMaxval, "unsupported maxval " + std::to_string(maxval) + " (only 255 is accepted)");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw ImageFormatError(Kind::kTruncated, "truncated payload: missing separator after maxval");
  }
  h.payload_offset = pos + 1;
  return h;
}

std::vector<std::uint8_t> header_bytes(char kind, std::size_t width, std::size_t height) {
  const std::string s = std::string("P") + kind + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  return {s.begin(), s.end()};
}

void require_payload(std::span<const std::uint8_t> bytes, const Header& h, std::size_t channels) {
  const std::size_t want = h.width * h.height * channels;
  if (bytes.size() - h.payload_offset < want) {
    throw ImageFormatError(Kind::kTruncated, "truncated payload: header promises " + std::to_string(want) +
                                                 " bytes, file has " + std::to_string(bytes.size() - h.payload_offset));
  }
}

}  // namespace

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  const Header h = parse_header(bytes, '6');
  require_payload(bytes, h, 3);
  Image img(h.height, h.width);
  const std::uint8_t* p = bytes.data() + h.payload_offset;
  for (std::size_t i = 0; i < h.height; ++i)
    for (std::size_t j = 0; j < h.width; ++j)
      for (std::size_t c = 0; c < 3; ++c) img.at(c, i, j) = static_cast<float>(*p++) / 255.0f;
  return img;
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
  auto out = header_bytes('6', img.width(), img.height());
  out.reserve(out.size() + img.size());
  for (std::size_t i = 0; i < img.height(); ++i)
    for (std::size_t j = 0; j < img.width(); ++j)
      for (std::size_t c = 0; c < 3; ++c) out.push_back(quantize(img.at(c, i, j)));
  return out;
}

DepthMap decode_pgm(std::span<const std::uint8_t> bytes) {
  const Header h = parse_header(bytes, '5');
  require_payload(bytes, h, 1);
  DepthMap map(h.height, h.width);
  for (std::size_t p = 0; p < map.size(); ++p) map.data()[p] = static_cast<float>(bytes[h.payload_offset + p]) / 255.0f;
  return map;
}

std::vector<std::uint8_t> encode_pgm(const DepthMap& map) {
  auto out = header_bytes('5', map.width(), map.height());
  for (float v : map.data()) out.push_back(quantize(v));
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Image read_image(const std::filesystem::path& path) {
  try {
    return decode_ppm(read_file(path));
  } catch (const ImageFormatError& e) {
    throw ImageFormatError(e.kind(), path.string() + ": " + e.what());
  }
}

void write_image(const Image& img, const std::filesystem::path& path) { write_file(path, encode_ppm(img)); }

DepthMap read_depth(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const ImageFormatError& e) {
    throw ImageFormatError(e.kind(), path.string() + ": " + e.what());
  }
}

void write_depth(const DepthMap& map, const std::filesystem::path& path) { write_file(path, encode_pgm(map)); }

}  // namespace priornet::netpbm
