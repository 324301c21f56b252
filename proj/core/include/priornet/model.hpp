#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "priornet/autodiff.hpp"
#include "priornet/errors.hpp"
#include "priornet/haze.hpp"
#include "priornet/image.hpp"
#include "priornet/tensor.hpp"

namespace priornet::model {

// Architecture variants used for ablation runs.
enum class Variant : std::uint32_t {
  kFull = 0,                  // 5x5 convolutions + full attention block
  kNoMia = 1,                 // 5x5 convolutions only
  kChannelAttentionOnly = 2,  // 5x5 convolutions + channel gate
  kKernel3Only = 3,           // 3x3 convolutions only
  kMultiKernel = 4,           // 1/3/5/7/3 kernels + full attention block
};

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct PriorNetConfig {
  std::size_t kernel_size = 5;
  std::size_t channels_per_conv = 3;
  std::size_t mia_reduction = 4;
  float bias_b = 1.0f;
  Variant variant = Variant::kFull;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool has_spatial_attention() const { return variant == Variant::kFull || variant == Variant::kMultiKernel; }
  bool has_channel_attention() const { return has_spatial_attention() || variant == Variant::kChannelAttentionOnly; }
  std::array<std::size_t, 5> kernel_sizes() const;
  // Channel count entering the last convolution (all four feature maps).
  std::size_t fused_channels() const { return 4 * channels_per_conv; }

  friend bool operator==(const PriorNetConfig&, const PriorNetConfig&) = default;
};

inline constexpr std::uint32_t kWeightFormatVersion = 1;
inline constexpr std::size_t kMinAttentionExtent = 8;

struct ModelWeights {
  PriorNetConfig config;
  ParamRegistry params;
  std::uint32_t format_version = kWeightFormatVersion;

  std::size_t parameter_count() const { return params.parameter_count(); }
};

// Number of learnable values implied by a configuration.
std::size_t parameter_count(const PriorNetConfig& config);

// Seeded initialisation, uniform in +-sqrt(1 / fan_in) per layer.
//
// Layer graph (c = channels_per_conv):
//   conv1: 3 -> c, conv2: c -> c
//   concat1 = [conv1, conv2]               -> conv3: 2c -> c
//   concat2 = [conv2, conv3]               -> conv4: 2c -> c
//   concat3 = [conv1, conv2, conv3, conv4] -> attention (4c) -> conv5: 4c -> 3 = K
// ReLU follows conv1..conv4; conv5 is linear.
ModelWeights build(const PriorNetConfig& config, std::uint64_t seed);

// K estimate for a 3 x H x W input node. Parameters are bound from `params`
// onto the input's tape.
template <typename T>
Var<T> estimate_k_graph(BasicParamRegistry<T>& params, const PriorNetConfig& config, Var<T> input);

// clamp(K * (I - 1) + b, 0, 1) for the same input.
template <typename T>
Var<T> dehaze_graph(BasicParamRegistry<T>& params, const PriorNetConfig& config, Var<T> input);

haze::KMap estimate_k(const ModelWeights& weights, const Image& hazy);
Image dehaze(const ModelWeights& weights, const Image& hazy);

// Weight file errors, one kind per failure mode.
class WeightFormatError : public FormatError {
 public:
  enum class Kind { kBadMagic, kVersionMismatch, kTruncated, kShapeMismatch, kTrailingData };
  WeightFormatError(Kind kind, const std::string& message) : FormatError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Layout (little-endian): "PRNW", u32 version, u32 kernel_size,
// u32 channels_per_conv, u32 mia_reduction, f32 bias_b, u32 variant,
// u32 record count, then per parameter: u32 name length, name bytes,
// u32 rank, u32 extents[rank], f32 payload.
std::vector<std::uint8_t> serialize(const ModelWeights& weights);
ModelWeights deserialize(std::span<const std::uint8_t> bytes);

void save_weights(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);

}  // namespace priornet::model
