#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "priornet/autodiff.hpp"

// Differentiable operations over Var handles. Spatial tensors are C x H x W.
// Every op records itself on the tape of its first operand.
namespace priornet::ops {

// Same-size convolution with zero padding (k-1)/2. weight is Cout x Cin x k x k, k odd.
template <typename T>
Var<T> conv2d(Var<T> input, Var<T> weight, Var<T> bias);
template <typename T>
Var<T> conv2d(Var<T> input, Var<T> weight);

// out = weight * input (+ bias); input has n elements, weight is m x n.
template <typename T>
Var<T> fully_connected(Var<T> input, Var<T> weight, Var<T> bias);
template <typename T>
Var<T> fully_connected(Var<T> input, Var<T> weight);

template <typename T>
Var<T> relu(Var<T> x);
template <typename T>
Var<T> sigmoid(Var<T> x);
// Max-subtracted softmax along `axis`.
template <typename T>
Var<T> softmax(Var<T> x, std::size_t axis);

// C x H x W -> C
template <typename T>
Var<T> avg_pool_global(Var<T> x);
template <typename T>
Var<T> max_pool_global(Var<T> x);
// Window means over a C x H x W map; output C x H' x W', H' = (H - window) / stride + 1.
template <typename T>
Var<T> sliding_avg_pool(Var<T> x, std::size_t window, std::size_t stride);

// Elementwise; either operand may be a 1 x H x W map broadcast over C channels.
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
// x[c,:,:] * s[c]
template <typename T>
Var<T> scale_channels(Var<T> x, Var<T> s);

template <typename T>
Var<T> concat_channels(std::span<const Var<T>> xs);
template <typename T>
Var<T> reshape(Var<T> x, Shape shape);
// (m x n) * (n x p) -> m x p
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);
// Output (i, j) reads source (floor(i * H / targetH), floor(j * W / targetW)).
template <typename T>
Var<T> upsample_nearest(Var<T> x, std::size_t target_h, std::size_t target_w);
// Keeps every `stride`-th row and column starting at 0.
template <typename T>
Var<T> subsample(Var<T> x, std::size_t stride);

template <typename T>
Var<T> scale(Var<T> x, T factor);
template <typename T>
Var<T> add_scalar(Var<T> x, T value);
// Gradient is passed only where lo < x < hi.
template <typename T>
Var<T> clamp(Var<T> x, T lo, T hi);
template <typename T>
Var<T> square(Var<T> x);
template <typename T>
Var<T> sum(Var<T> x);

// Fingerprint of the branch taken at every non-smooth point (ReLU sign, clamp
// region, max-pool argmax) while recording is active on the calling thread.
// Two evaluations with equal fingerprints lie on the same smooth piece.
namespace kink_trace {
void begin();
std::uint64_t end();
}  // namespace kink_trace
template <typename T>
Var<T> mean(Var<T> x);

}  // namespace priornet::ops
