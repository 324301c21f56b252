#include "priornet/model.hpp"

#include <cmath>
#include <random>

#include "priornet/init.hpp"
#include "priornet/mia.hpp"
#include "priornet/ops.hpp"

namespace priornet::model {
namespace {

const std::string kMiaPrefix = "mia";

std::string conv_weight(int n) { return "conv" + std::to_string(n) + ".weight"; }
std::string conv_bias(int n) { return "conv" + std::to_string(n) + ".bias"; }

struct ConvSpec {
  std::size_t in;
  std::size_t out;
  std::size_t kernel;
};

std::array<ConvSpec, 5> conv_specs(const PriorNetConfig& config) {
  const auto k = config.kernel_sizes();
  const std::size_t c = config.channels_per_conv;
  return {{{3, c, k[0]}, {c, c, k[1]}, {2 * c, c, k[2]}, {2 * c, c, k[3]}, {4 * c, 3, k[4]}}};
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kFull:
      return "full";
    case Variant::kNoMia:
      return "no_mia";
    case Variant::kChannelAttentionOnly:
      return "channel_attention_only";
    case Variant::kKernel3Only:
      return "kernel3_only";
    case Variant::kMultiKernel:
      return "multi_kernel";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (auto v : {Variant::kFull, Variant::kNoMia, Variant::kChannelAttentionOnly, Variant::kKernel3Only,
                 Variant::kMultiKernel}) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

void PriorNetConfig::validate() const {
  if (static_cast<std::uint32_t>(variant) > static_cast<std::uint32_t>(Variant::kMultiKernel)) {
    throw std::invalid_argument("variant: unknown value " + std::to_string(static_cast<std::uint32_t>(variant)));
  }
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw std::invalid_argument("kernel_size: must be a positive odd number, got " + std::to_string(kernel_size));
  }
  if (channels_per_conv == 0) throw std::invalid_argument("channels_per_conv: must be positive");
  if (has_channel_attention() && (mia_reduction == 0 || fused_channels() % mia_reduction != 0)) {
    throw std::invalid_argument("mia_reduction: " + std::to_string(mia_reduction) +
                                " must divide the fused channel count " + std::to_string(fused_channels()));
  }
  if (!std::isfinite(bias_b)) throw std::invalid_argument("bias_b: must be finite");
}

std::array<std::size_t, 5> PriorNetConfig::kernel_sizes() const {
  switch (variant) {
    case Variant::kKernel3Only:
      return {3, 3, 3, 3, 3};
    case Variant::kMultiKernel:
      return {1, 3, 5, 7, 3};
    default:
      return {kernel_size, kernel_size, kernel_size, kernel_size, kernel_size};
  }
}

std::size_t parameter_count(const PriorNetConfig& config) {
  config.validate();
  std::size_t n = 0;
  for (const auto& s : conv_specs(config)) n += s.out * s.in * s.kernel * s.kernel + s.out;
  if (config.has_channel_attention()) {
    n += mia::parameter_count(config.fused_channels(), config.mia_reduction, !config.has_spatial_attention());
  }
  return n;
}

ModelWeights build(const PriorNetConfig& config, std::uint64_t seed) {
  config.validate();
  ModelWeights w;
  w.config = config;
  std::mt19937_64 rng(seed);
  int n = 1;
  for (const auto& s : conv_specs(config)) {
    const std::size_t fan_in = s.in * s.kernel * s.kernel;
    w.params.add(conv_weight(n), init::uniform_fan_in({s.out, s.in, s.kernel, s.kernel}, fan_in, rng));
    w.params.add(conv_bias(n), init::uniform_fan_in({s.out}, fan_in, rng));
    ++n;
  }
  if (config.has_channel_attention()) {
    mia::register_parameters(w.params, kMiaPrefix, config.fused_channels(), config.mia_reduction,
                             !config.has_spatial_attention(), rng);
  }
  return w;
}

template <typename T>
Var<T> estimate_k_graph(BasicParamRegistry<T>& params, const PriorNetConfig& config, Var<T> input) {
  const auto& s = input.shape();
  if (s.size() != 3 || s[0] != 3) throw ShapeError("estimate_k: input must be 3xHxW, got " + shape_to_string(s));
  if (config.has_spatial_attention() && (s[1] < kMinAttentionExtent || s[2] < kMinAttentionExtent)) {
    throw ShapeError("estimate_k: input " + std::to_string(s[1]) + "x" + std::to_string(s[2]) +
                     " is smaller than the 8x8 attention window; inputs must be at least 8x8");
  }
  Tape<T>& tape = input.tape();
  auto conv = [&](int n, Var<T> x) {
    return ops::conv2d(x, tape.parameter(params.get(conv_weight(n))), tape.parameter(params.get(conv_bias(n))));
  };
  const Var<T> c1 = ops::relu(conv(1, input));
  const Var<T> c2 = ops::relu(conv(2, c1));
  const std::array<Var<T>, 2> cat1{c1, c2};
  const Var<T> c3 = ops::relu(conv(3, ops::concat_channels<T>(cat1)));
  const std::array<Var<T>, 2> cat2{c2, c3};
  const Var<T> c4 = ops::relu(conv(4, ops::concat_channels<T>(cat2)));
  const std::array<Var<T>, 4> cat3{c1, c2, c3, c4};
  Var<T> fused = ops::concat_channels<T>(cat3);
  if (config.has_spatial_attention()) {
    fused = mia::mia_forward(fused, mia::bind(tape, params, kMiaPrefix));
  } else if (config.has_channel_attention()) {
    fused = ops::scale_channels(fused, mia::channel_attention(fused, mia::bind_channel(tape, params, kMiaPrefix)));
  }
  return conv(5, fused);
}

template <typename T>
Var<T> dehaze_graph(BasicParamRegistry<T>& params, const PriorNetConfig& config, Var<T> input) {
  const Var<T> k = estimate_k_graph(params, config, input);
  BasicTensor<T> shifted = input.value().reshaped(input.shape());
  for (auto& v : shifted.data()) v -= T(1);
  const Var<T> restored = ops::add_scalar(ops::mul(k, input.tape().constant(std::move(shifted))), static_cast<T>(config.bias_b));
  return ops::clamp(restored, T(0), T(1));
}

haze::KMap estimate_k(const ModelWeights& weights, const Image& hazy) {
  ParamRegistry params = weights.params;
  Tape<float> tape;
  const Var<float> k = estimate_k_graph(params, weights.config, tape.constant(hazy.to_tensor()));
  return haze::KMap{k.value().reshaped(k.shape()), weights.config.bias_b};
}

Image dehaze(const ModelWeights& weights, const Image& hazy) {
  return haze::restore(hazy, estimate_k(weights, hazy));
}

template Var<float> estimate_k_graph(BasicParamRegistry<float>&, const PriorNetConfig&, Var<float>);
template Var<double> estimate_k_graph(BasicParamRegistry<double>&, const PriorNetConfig&, Var<double>);
template Var<float> dehaze_graph(BasicParamRegistry<float>&, const PriorNetConfig&, Var<float>);
template Var<double> dehaze_graph(BasicParamRegistry<double>&, const PriorNetConfig&, Var<double>);

}  // namespace priornet::model
