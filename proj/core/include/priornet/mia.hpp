#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "priornet/autodiff.hpp"
#include "priornet/tensor.hpp"

// Multidimensional interactive attention: a channel gate followed by a
// spatial gate fused from a windowed local branch and a softmax-weighted
// cross branch.
namespace priornet::mia {

inline constexpr std::size_t kLocalWindow = 8;
inline constexpr std::size_t kLocalStride = 4;

// Shared two-layer MLP over pooled channel statistics.
// w0 is (C/r) x C, w1 is C x (C/r).
template <typename T>
struct ChannelAttentionWeights {
  Var<T> w0;
  Var<T> w1;
};

// Per-cell channel mixing applied after window pooling. mlp_w is C x C.
template <typename T>
struct LocalAttentionWeights {
  Var<T> mlp_w;
  Var<T> mlp_b;
};

// 1x1 query/value projections, both C x C.
template <typename T>
struct CrossAttentionWeights {
  Var<T> wq;
  Var<T> wv;
};

template <typename T>
struct MiaWeights {
  ChannelAttentionWeights<T> channel;
  LocalAttentionWeights<T> local;
  CrossAttentionWeights<T> cross;
};

// sigmoid(W1 relu(W0 avg(F)) + W1 relu(W0 max(F))), one gate per channel.
template <typename T>
Var<T> channel_attention(Var<T> features, const ChannelAttentionWeights<T>& w);

// Window-average pool (8x8, stride 4), channel MLP per cell, ReLU, then
// nearest expansion back to H x W.
template <typename T>
Var<T> local_spatial(Var<T> x, const LocalAttentionWeights<T>& w);

// Softmax over channels of the pooled query weights the value channels;
// returns a 1 x H x W map in (0, 1).
template <typename T>
Var<T> spatial_cross(Var<T> x, const CrossAttentionWeights<T>& w);

// x' = x * Mc(x); out = x' * sigmoid(local(x') * cross(x')).
template <typename T>
Var<T> mia_forward(Var<T> x, const MiaWeights<T>& w);

// Parameter names under `prefix`, in registration order.
std::string channel_w0_name(const std::string& prefix);
std::string channel_w1_name(const std::string& prefix);
std::string local_weight_name(const std::string& prefix);
std::string local_bias_name(const std::string& prefix);
std::string cross_wq_name(const std::string& prefix);
std::string cross_wv_name(const std::string& prefix);

// Adds channel-attention parameters (and, unless channel_only, the spatial
// ones) initialised uniformly in +-sqrt(1 / fan_in).
void register_parameters(BasicParamRegistry<float>& registry, const std::string& prefix, std::size_t channels,
                         std::size_t reduction, bool channel_only, std::mt19937_64& rng);

std::size_t parameter_count(std::size_t channels, std::size_t reduction, bool channel_only);

template <typename T>
ChannelAttentionWeights<T> bind_channel(Tape<T>& tape, BasicParamRegistry<T>& registry, const std::string& prefix);
template <typename T>
MiaWeights<T> bind(Tape<T>& tape, BasicParamRegistry<T>& registry, const std::string& prefix);

}  // namespace priornet::mia
