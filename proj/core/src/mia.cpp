#include "priornet/mia.hpp"

#include <array>
#include <cmath>

#include "priornet/init.hpp"
#include "priornet/ops.hpp"

namespace priornet::mia {

template <typename T>
Var<T> channel_attention(Var<T> features, const ChannelAttentionWeights<T>& w) {
  const std::size_t channels = features.shape().at(0);
  const auto& s0 = w.w0.shape();
  if (s0.size() != 2 || s0[1] != channels || s0[0] == 0 || channels % s0[0] != 0) {
    throw ShapeError("channel_attention: W0 " + shape_to_string(s0) + " must be (C/r)x" + std::to_string(channels) +
                     " with r dividing C");
  }
  auto branch = [&](Var<T> pooled) { return ops::fully_connected(ops::relu(ops::fully_connected(pooled, w.w0)), w.w1); };
  const Var<T> avg = branch(ops::avg_pool_global(features));
  const Var<T> mx = branch(ops::max_pool_global(features));
  return ops::sigmoid(ops::add(avg, mx));
}

template <typename T>
Var<T> local_spatial(Var<T> x, const LocalAttentionWeights<T>& w) {
  const std::size_t c = x.shape().at(0), h = x.shape().at(1), wd = x.shape().at(2);
  const Var<T> pooled = ops::sliding_avg_pool(x, kLocalWindow, kLocalStride);
  const Var<T> kernel = ops::reshape(w.mlp_w, {c, c, 1, 1});
  const Var<T> mixed = ops::relu(ops::conv2d(pooled, kernel, w.mlp_b));
  return ops::upsample_nearest(mixed, h, wd);
}

template <typename T>
Var<T> spatial_cross(Var<T> x, const CrossAttentionWeights<T>& w) {
  const auto& s = x.shape();
  if (s.size() != 3) throw ShapeError("spatial_cross: input must be CxHxW, got " + shape_to_string(s));
  const std::size_t c = s[0], h = s[1], wd = s[2];
  const Var<T> q = ops::softmax(ops::avg_pool_global(ops::conv2d(x, ops::reshape(w.wq, {c, c, 1, 1}))), 0);
  const Var<T> v = ops::reshape(ops::conv2d(x, ops::reshape(w.wv, {c, c, 1, 1})), {c, h * wd});
  const Var<T> map = ops::matmul(ops::reshape(q, {1, c}), v);
  return ops::sigmoid(ops::reshape(map, {1, h, wd}));
}

template <typename T>
Var<T> mia_forward(Var<T> x, const MiaWeights<T>& w) {
  const Var<T> refined = ops::scale_channels(x, channel_attention(x, w.channel));
  const Var<T> gate = ops::sigmoid(ops::mul(local_spatial(refined, w.local), spatial_cross(refined, w.cross)));
  return ops::mul(refined, gate);
}

std::string channel_w0_name(const std::string& prefix) { return prefix + ".channel.w0"; }
std::string channel_w1_name(const std::string& prefix) { return prefix + ".channel.w1"; }
std::string local_weight_name(const std::string& prefix) { return prefix + ".local.weight"; }
std::string local_bias_name(const std::string& prefix) { return prefix + ".local.bias"; }
std::string cross_wq_name(const std::string& prefix) { return prefix + ".cross.wq"; }
std::string cross_wv_name(const std::string& prefix) { return prefix + ".cross.wv"; }

void register_parameters(BasicParamRegistry<float>& registry, const std::string& prefix, std::size_t channels,
                         std::size_t reduction, bool channel_only, std::mt19937_64& rng) {
  if (reduction == 0 || channels % reduction != 0) {
    throw std::invalid_argument("mia: reduction " + std::to_string(reduction) + " must divide channel count " +
                                std::to_string(channels));
  }
  const std::size_t hidden = channels / reduction;
  registry.add(channel_w0_name(prefix), init::uniform_fan_in({hidden, channels}, channels, rng));
  registry.add(channel_w1_name(prefix), init::uniform_fan_in({channels, hidden}, hidden, rng));
  if (channel_only) return;
  registry.add(local_weight_name(prefix), init::uniform_fan_in({channels, channels}, channels, rng));
  registry.add(local_bias_name(prefix), init::uniform_fan_in({channels}, channels, rng));
  registry.add(cross_wq_name(prefix), init::uniform_fan_in({channels, channels}, channels, rng));
  registry.add(cross_wv_name(prefix), init::uniform_fan_in({channels, channels}, channels, rng));
}

std::size_t parameter_count(std::size_t channels, std::size_t reduction, bool channel_only) {
  const std::size_t hidden = channels / reduction;
  const std::size_t channel = 2 * hidden * channels;
  if (channel_only) return channel;
  return channel + channels * channels + channels + 2 * channels * channels;
}

template <typename T>
ChannelAttentionWeights<T> bind_channel(Tape<T>& tape, BasicParamRegistry<T>& registry, const std::string& prefix) {
  return {tape.parameter(registry.get(channel_w0_name(prefix))), tape.parameter(registry.get(channel_w1_name(prefix)))};
}

template <typename T>
MiaWeights<T> bind(Tape<T>& tape, BasicParamRegistry<T>& registry, const std::string& prefix) {
  MiaWeights<T> w;
  w.channel = bind_channel(tape, registry, prefix);
  w.local = {tape.parameter(registry.get(local_weight_name(prefix))), tape.parameter(registry.get(local_bias_name(prefix)))};
  w.cross = {tape.parameter(registry.get(cross_wq_name(prefix))), tape.parameter(registry.get(cross_wv_name(prefix)))};
  return w;
}

#define PRIORNET_INSTANTIATE_MIA(T)                                                                   \
  template Var<T> channel_attention(Var<T>, const ChannelAttentionWeights<T>&);                       \
  template Var<T> local_spatial(Var<T>, const LocalAttentionWeights<T>&);                             \
  template Var<T> spatial_cross(Var<T>, const CrossAttentionWeights<T>&);                             \
  template Var<T> mia_forward(Var<T>, const MiaWeights<T>&);                                          \
  template ChannelAttentionWeights<T> bind_channel(Tape<T>&, BasicParamRegistry<T>&, const std::string&); \
  template MiaWeights<T> bind(Tape<T>&, BasicParamRegistry<T>&, const std::string&);

PRIORNET_INSTANTIATE_MIA(float)
PRIORNET_INSTANTIATE_MIA(double)

#undef PRIORNET_INSTANTIATE_MIA

}  // namespace priornet::mia
