#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "priornet/tensor.hpp"

namespace priornet {

// Planar RGB image, channel-major, samples in [0, 1].
class Image {
 public:
  static constexpr std::size_t kChannels = 3;

  Image() = default;
  Image(std::size_t height, std::size_t width, float fill = 0.0f);
  Image(std::size_t height, std::size_t width, std::vector<float> data);

  // Copies a 3 x H x W tensor, clamping every sample to [0, 1].
  static Image from_tensor(const Tensor& t);
  Tensor to_tensor() const;

  std::size_t channels() const { return kChannels; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(std::size_t c, std::size_t i, std::size_t j) { return data_[(c * height_ + i) * width_ + j]; }
  float at(std::size_t c, std::size_t i, std::size_t j) const { return data_[(c * height_ + i) * width_ + j]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_extent(const Image& other) const { return height_ == other.height_ && width_ == other.width_; }
  void clamp01();

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

// Single-channel H x W grid. The tag keeps depth, transmission and other
// planes from being mixed up.
template <typename Tag>
class Plane {
 public:
  Plane() = default;
  Plane(std::size_t height, std::size_t width, float fill = 0.0f)
      : height_(height), width_(width), data_(height * width, fill) {}

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  float& at(std::size_t i, std::size_t j) { return data_[i * width_ + j]; }
  float at(std::size_t i, std::size_t j) const { return data_[i * width_ + j]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

using DepthMap = Plane<struct DepthTag>;
using TransmissionMap = Plane<struct TransmissionTag>;
using GrayMap = Plane<struct GrayTag>;

void require_same_extent(const Image& a, const Image& b, const char* op);

}  // namespace priornet
