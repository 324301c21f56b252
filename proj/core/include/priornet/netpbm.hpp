#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "priornet/errors.hpp"
#include "priornet/image.hpp"

// Binary PPM (P6) and PGM (P5) with maxval 255. Samples decode as v / 255
// and encode as round(clamp(f, 0, 1) * 255).
namespace priornet::netpbm {

class ImageFormatError : public FormatError {
 public:
  enum class Kind { kBadMagic, kBadHeader, kBadMaxval, kTruncated };
  ImageFormatError(Kind kind, const std::string& message) : FormatError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::uint8_t quantize(float v);

Image decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const Image& img);

// Single-channel maps (depth) travel as PGM.
DepthMap decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const DepthMap& map);

Image read_image(const std::filesystem::path& path);
void write_image(const Image& img, const std::filesystem::path& path);
DepthMap read_depth(const std::filesystem::path& path);
void write_depth(const DepthMap& map, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace priornet::netpbm
