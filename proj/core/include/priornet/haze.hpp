#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "priornet/image.hpp"
#include "priornet/tensor.hpp"

// Atmospheric scattering model I = J*t + A*(1 - t), restoration through the
// per-pixel scale field K, and the dark channel prior baseline.
namespace priornet::haze {

inline constexpr float kTransmissionFloor = 0.05f;
inline constexpr double kDenominatorGuard = 1e-4;
inline constexpr float kDefaultBias = 1.0f;

struct HazeParams {
  std::array<float, 3> airlight{1.0f, 1.0f, 1.0f};
  float beta_scatter = 0.0f;
  TransmissionMap transmission;
};

// Per-pixel scale field K (3 x H x W) and the scalar bias b of J = K*I - K + b.
struct KMap {
  Tensor k;
  float bias = kDefaultBias;

  std::size_t height() const { return k.dim(1); }
  std::size_t width() const { return k.dim(2); }
};

// t = clamp(exp(-beta * d), kTransmissionFloor, 1)
TransmissionMap transmission_from_depth(const DepthMap& depth, float beta_scatter);
TransmissionMap uniform_transmission(std::size_t height, std::size_t width, float t);

Image synthesize_haze(const Image& clean, const HazeParams& params);

// Exact K for a hazy image whose airlight and transmission are known. Where
// |I - 1| < kDenominatorGuard the denominator becomes sign(I - 1) * guard,
// with sign(0) = -1.
KMap ideal_k(const Image& hazy, const HazeParams& params, float bias = kDefaultBias);

// J = clamp(K*I - K + b, 0, 1), evaluated as K*(I - 1) + b.
Image restore(const Image& hazy, const KMap& k);

// Minimum over RGB and over a patch x patch neighbourhood, edges replicated.
GrayMap dark_channel(const Image& img, std::size_t patch);

enum class Refinement { kGuided, kBox, kNone };

struct DcpOptions {
  std::size_t patch = 15;
  float omega = 0.95f;
  float t_min = 0.1f;
  double top_fraction = 0.001;
  float airlight_floor = 0.01f;
  Refinement refinement = Refinement::kGuided;
  std::size_t guided_radius = 20;
  float guided_eps = 1e-3f;
};

struct DcpResult {
  Image dehazed;
  std::array<float, 3> airlight{};
  TransmissionMap transmission;
};

DcpResult dcp_estimate(const Image& hazy, const DcpOptions& options = {});
Image dcp_dehaze(const Image& hazy, const DcpOptions& options = {});

// Mean over the (2r+1)^2 window clipped to the image.
GrayMap box_filter(const GrayMap& src, std::size_t radius);
GrayMap guided_filter(const GrayMap& guide, const GrayMap& src, std::size_t radius, float eps);
GrayMap luminance(const Image& img);

// Procedural scene for synthetic corpora: saturated colour regions on a
// textured background, with a depth map that grows toward the top of the frame.
struct Scene {
  Image clean;
  DepthMap depth;
};
Scene make_scene(std::uint64_t seed, std::size_t height, std::size_t width);

}  // namespace priornet::haze
