#include "priornet/haze.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "priornet/init.hpp"

namespace priornet::haze {
namespace {

void require_extent(const Image& img, std::size_t h, std::size_t w, const char* op) {
  if (img.height() != h || img.width() != w) {
    throw ShapeError(std::string(op) + ": map extent " + std::to_string(h) + "x" + std::to_string(w) +
                     " does not match image " + std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
}

// Window minimum along one axis with clamped borders.
void min_filter_1d(std::span<const float> src, std::span<float> dst, std::size_t count, std::size_t stride,
                   std::size_t radius) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t lo = i >= radius ? i - radius : 0;
    const std::size_t hi = std::min(count - 1, i + radius);
    float m = src[lo * stride];
    for (std::size_t k = lo + 1; k <= hi; ++k) m = std::min(m, src[k * stride]);
    dst[i * stride] = m;
  }
}

GrayMap min_filter(const GrayMap& src, std::size_t radius) {
  const std::size_t h = src.height(), w = src.width();
  GrayMap rows(h, w), out(h, w);
  for (std::size_t i = 0; i < h; ++i) {
    min_filter_1d(src.data().subspan(i * w, w), rows.data().subspan(i * w, w), w, 1, radius);
  }
  for (std::size_t j = 0; j < w; ++j) {
    min_filter_1d(rows.data().subspan(j), out.data().subspan(j), h, w, radius);
  }
  return out;
}

GrayMap channel_min(const Image& img) {
  GrayMap out(img.height(), img.width());
  for (std::size_t i = 0; i < img.height(); ++i)
    for (std::size_t j = 0; j < img.width(); ++j)
      out.at(i, j) = std::min({img.at(0, i, j), img.at(1, i, j), img.at(2, i, j)});
  return out;
}

using init::uniform;

}  // namespace

TransmissionMap transmission_from_depth(const DepthMap& depth, float beta_scatter) {
  if (!(beta_scatter >= 0.0f)) throw std::invalid_argument("transmission_from_depth: beta_scatter must be >= 0");
  TransmissionMap t(depth.height(), depth.width());
  for (std::size_t p = 0; p < depth.size(); ++p) {
    const double d = depth.data()[p];
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("transmission_from_depth: depth must be finite and >= 0");
    t.data()[p] = std::clamp(static_cast<float>(std::exp(-static_cast<double>(beta_scatter) * d)), kTransmissionFloor, 1.0f);
  }
  return t;
}

TransmissionMap uniform_transmission(std::size_t height, std::size_t width, float t) {
  return TransmissionMap(height, width, std::clamp(t, kTransmissionFloor, 1.0f));
}

Image synthesize_haze(const Image& clean, const HazeParams& params) {
  require_extent(clean, params.transmission.height(), params.transmission.width(), "synthesize_haze");
  Image out(clean.height(), clean.width());
  for (std::size_t c = 0; c < 3; ++c) {
    const double a = params.airlight[c];
    for (std::size_t i = 0; i < clean.height(); ++i)
      for (std::size_t j = 0; j < clean.width(); ++j) {
        const double t = params.transmission.at(i, j);
        const double v = clean.at(c, i, j) * t + a * (1.0 - t);
        out.at(c, i, j) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
  }
  return out;
}

KMap ideal_k(const Image& hazy, const HazeParams& params, float bias) {
  if (!std::isfinite(bias)) throw std::invalid_argument("ideal_k: bias must be finite");
  require_extent(hazy, params.transmission.height(), params.transmission.width(), "ideal_k");
  const std::size_t h = hazy.height(), w = hazy.width();
  KMap k{Tensor({3, h, w}), bias};
  for (std::size_t c = 0; c < 3; ++c) {
    const double a = params.airlight[c];
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const double in = hazy.at(c, i, j);
        const double t = params.transmission.at(i, j);
        double den = in - 1.0;
        if (std::abs(den) < kDenominatorGuard) den = den > 0.0 ? kDenominatorGuard : -kDenominatorGuard;
        k.k.at(c, i, j) = static_cast<float>((1.0 / t) * ((in - a) / den) + (a - bias) / den);
      }
  }
  return k;
}

Image restore(const Image& hazy, const KMap& k) {
  if (k.k.rank() != 3 || k.k.dim(0) != 3) throw ShapeError("restore: K must be 3xHxW");
  require_extent(hazy, k.height(), k.width(), "restore");
  Image out(hazy.height(), hazy.width());
  const auto in = hazy.data();
  const auto kv = k.k.data();
  auto dst = out.data();
  for (std::size_t p = 0; p < in.size(); ++p) {
    const double v = static_cast<double>(kv[p]) * (static_cast<double>(in[p]) - 1.0) + k.bias;
    dst[p] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

GrayMap dark_channel(const Image& img, std::size_t patch) {
  if (patch == 0 || patch % 2 == 0) {
    throw std::invalid_argument("dark_channel: patch must be a positive odd size, got " + std::to_string(patch));
  }
  return min_filter(channel_min(img), patch / 2);
}

GrayMap box_filter(const GrayMap& src, std::size_t radius) {
  const std::size_t h = src.height(), w = src.width();
  std::vector<double> integral((h + 1) * (w + 1), 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < w; ++j) {
      row += src.at(i, j);
      integral[(i + 1) * (w + 1) + j + 1] = integral[i * (w + 1) + j + 1] + row;
    }
  }
  GrayMap out(h, w);
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t i0 = i >= radius ? i - radius : 0, i1 = std::min(h, i + radius + 1);
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t j0 = j >= radius ? j - radius : 0, j1 = std::min(w, j + radius + 1);
      const double s = integral[i1 * (w + 1) + j1] - integral[i0 * (w + 1) + j1] - integral[i1 * (w + 1) + j0] +
                       integral[i0 * (w + 1) + j0];
      out.at(i, j) = static_cast<float>(s / static_cast<double>((i1 - i0) * (j1 - j0)));
    }
  }
  return out;
}

GrayMap guided_filter(const GrayMap& guide, const GrayMap& src, std::size_t radius, float eps) {
  if (guide.height() != src.height() || guide.width() != src.width()) {
    throw ShapeError("guided_filter: guide and source extents differ");
  }
  const std::size_t n = src.size();
  auto product = [n](const GrayMap& a, const GrayMap& b) {
    GrayMap out(a.height(), a.width());
    for (std::size_t p = 0; p < n; ++p) out.data()[p] = a.data()[p] * b.data()[p];
    return out;
  };
  const GrayMap mean_i = box_filter(guide, radius);
  const GrayMap mean_p = box_filter(src, radius);
  const GrayMap corr_ip = box_filter(product(guide, src), radius);
  const GrayMap corr_ii = box_filter(product(guide, guide), radius);

  GrayMap a(src.height(), src.width()), b(src.height(), src.width());
  for (std::size_t p = 0; p < n; ++p) {
    const float var_i = corr_ii.data()[p] - mean_i.data()[p] * mean_i.data()[p];
    const float cov_ip = corr_ip.data()[p] - mean_i.data()[p] * mean_p.data()[p];
    a.data()[p] = cov_ip / (var_i + eps);
    b.data()[p] = mean_p.data()[p] - a.data()[p] * mean_i.data()[p];
  }
  const GrayMap mean_a = box_filter(a, radius);
  const GrayMap mean_b = box_filter(b, radius);
  GrayMap q(src.height(), src.width());
  for (std::size_t p = 0; p < n; ++p) q.data()[p] = mean_a.data()[p] * guide.data()[p] + mean_b.data()[p];
  return q;
}

GrayMap luminance(const Image& img) {
  GrayMap out(img.height(), img.width());
  for (std::size_t i = 0; i < img.height(); ++i)
    for (std::size_t j = 0; j < img.width(); ++j)
      out.at(i, j) = 0.299f * img.at(0, i, j) + 0.587f * img.at(1, i, j) + 0.114f * img.at(2, i, j);
  return out;
}

DcpResult dcp_estimate(const Image& hazy, const DcpOptions& options) {
  const std::size_t h = hazy.height(), w = hazy.width();
  if (h == 0 || w == 0) throw std::invalid_argument("dcp_dehaze: empty image");
  const GrayMap dark = dark_channel(hazy, options.patch);

  // Airlight: mean colour of the brightest top_fraction of dark-channel pixels.
  const std::size_t n = h * w;
  const std::size_t top = std::max<std::size_t>(1, static_cast<std::size_t>(options.top_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const float da = dark.data()[a], db = dark.data()[b];
                      return da != db ? da > db : a < b;
                    });
  DcpResult result;
  for (std::size_t c = 0; c < 3; ++c) {
    double s = 0.0;
    for (std::size_t k = 0; k < top; ++k) s += hazy.data()[c * n + order[k]];
    result.airlight[c] = std::max(options.airlight_floor, static_cast<float>(s / static_cast<double>(top)));
  }

  Image normalized(h, w);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < n; ++p) normalized.data()[c * n + p] = hazy.data()[c * n + p] / result.airlight[c];
  const GrayMap dark_norm = dark_channel(normalized, options.patch);

  GrayMap t(h, w);
  for (std::size_t p = 0; p < n; ++p)
    t.data()[p] = std::clamp(1.0f - options.omega * dark_norm.data()[p], options.t_min, 1.0f);

  switch (options.refinement) {
    case Refinement::kGuided:
      t = guided_filter(luminance(hazy), t, options.guided_radius, options.guided_eps);
      break;
    case Refinement::kBox:
      t = box_filter(t, options.patch / 2);
      break;
    case Refinement::kNone:
      break;
  }

  result.transmission = TransmissionMap(h, w);
  for (std::size_t p = 0; p < n; ++p) result.transmission.data()[p] = std::clamp(t.data()[p], options.t_min, 1.0f);

  result.dehazed = Image(h, w);
  for (std::size_t c = 0; c < 3; ++c) {
    const double a = result.airlight[c];
    for (std::size_t p = 0; p < n; ++p) {
      const double v = (hazy.data()[c * n + p] - a) / result.transmission.data()[p] + a;
      result.dehazed.data()[c * n + p] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return result;
}

Image dcp_dehaze(const Image& hazy, const DcpOptions& options) { return dcp_estimate(hazy, options).dehazed; }

Scene make_scene(std::uint64_t seed, std::size_t height, std::size_t width) {
  std::mt19937_64 rng(seed);
  Scene scene{Image(height, width), DepthMap(height, width)};
  const double hd = static_cast<double>(std::max<std::size_t>(height, 2) - 1);
  const double wd = static_cast<double>(std::max<std::size_t>(width, 2) - 1);

  // Colour with one weak channel, as in most haze-free outdoor regions.
  auto saturated = [&rng]() {
    std::array<float, 3> c{};
    const std::size_t weak = static_cast<std::size_t>(rng() % 3);
    for (std::size_t k = 0; k < 3; ++k) {
      c[k] = static_cast<float>(k == weak ? uniform(rng, 0.0, 0.12) : uniform(rng, 0.25, 0.95));
    }
    return c;
  };

  const double horizon = uniform(rng, 0.2, 0.35);
  const auto ground = saturated();
  const std::array<float, 3> sky{static_cast<float>(uniform(rng, 0.75, 0.9)), static_cast<float>(uniform(rng, 0.82, 0.95)),
                                 static_cast<float>(uniform(rng, 0.88, 1.0))};
  const double fx = uniform(rng, 0.1, 0.5), fy = uniform(rng, 0.1, 0.5), phase = uniform(rng, 0.0, 6.283);

  for (std::size_t i = 0; i < height; ++i) {
    const double y = static_cast<double>(i) / hd;
    for (std::size_t j = 0; j < width; ++j) {
      const double x = static_cast<double>(j) / wd;
      const double texture = 0.08 * std::sin(fx * static_cast<double>(j) + phase) * std::cos(fy * static_cast<double>(i));
      if (y < horizon) {
        for (std::size_t c = 0; c < 3; ++c) scene.clean.at(c, i, j) = static_cast<float>(sky[c] - 0.05 * y);
        scene.depth.at(i, j) = 1.0f;
      } else {
        const double shade = 0.6 + 0.4 * (y - horizon) / (1.0 - horizon);
        for (std::size_t c = 0; c < 3; ++c) scene.clean.at(c, i, j) = static_cast<float>(ground[c] * shade + texture);
        scene.depth.at(i, j) = static_cast<float>(0.9 * (1.0 - (y - horizon) / (1.0 - horizon)) + 0.05 + 0.02 * x);
      }
    }
  }

  const int objects = 3 + static_cast<int>(rng() % 4);
  for (int o = 0; o < objects; ++o) {
    const auto color = saturated();
    const double cy = uniform(rng, horizon, 0.95), cx = uniform(rng, 0.05, 0.95);
    const double ry = uniform(rng, 0.06, 0.25), rx = uniform(rng, 0.06, 0.25);
    const bool ellipse = (rng() & 1u) != 0;
    const double bottom = std::min(1.0, cy + ry);
    const float depth = static_cast<float>(0.9 * (1.0 - (bottom - horizon) / (1.0 - horizon)) + 0.05);
    const double stripes = uniform(rng, 0.2, 0.9);
    for (std::size_t i = 0; i < height; ++i) {
      const double dy = (static_cast<double>(i) / hd - cy) / ry;
      for (std::size_t j = 0; j < width; ++j) {
        const double dx = (static_cast<double>(j) / wd - cx) / rx;
        const bool inside = ellipse ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (!inside) continue;
        const double detail = 0.85 + 0.15 * std::sin(stripes * static_cast<double>(i + j));
        // Lower-left side of each object is in shadow.
        const double shadow = (dx < -0.3 && dy > 0.3) ? 0.45 : 1.0;
        for (std::size_t c = 0; c < 3; ++c) scene.clean.at(c, i, j) = static_cast<float>(color[c] * detail * shadow);
        scene.depth.at(i, j) = std::max(depth, 0.0f);
      }
    }
  }
  scene.clean.clamp01();
  return scene;
}

}  // namespace priornet::haze
