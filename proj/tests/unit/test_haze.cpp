#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "values.hpp"
#include "priornet/haze.hpp"
#include "priornet/init.hpp"
#include "priornet/metrics.hpp"

using namespace priornet;
using namespace priornet::haze;

namespace {

Image random_image(std::mt19937_64& rng, std::size_t h, std::size_t w, double lo = 0.0, double hi = 1.0) {
  Image img(h, w);
  for (auto& v : img.data()) v = static_cast<float>(init::uniform(rng, lo, hi));
  return img;
}

HazeParams uniform_params(std::size_t h, std::size_t w, float a, float t) {
  HazeParams p;
  p.airlight = {a, a, a};
  p.transmission = uniform_transmission(h, w, t);
  return p;
}

// Exhaustive min over channels and the edge-replicated patch.
GrayMap dark_channel_oracle(const Image& img, std::size_t patch) {
  const long r = static_cast<long>(patch / 2), h = static_cast<long>(img.height()), w = static_cast<long>(img.width());
  GrayMap out(img.height(), img.width());
  for (long i = 0; i < h; ++i)
    for (long j = 0; j < w; ++j) {
      float m = 1e30f;
      for (long u = -r; u <= r; ++u)
        for (long v = -r; v <= r; ++v)
          for (std::size_t c = 0; c < 3; ++c)
            m = std::min(m, img.at(c, std::clamp(i + u, 0L, h - 1), std::clamp(j + v, 0L, w - 1)));
      out.at(i, j) = m;
    }
  return out;
}

}  // namespace

TEST_CASE("transmission from depth closed forms") {
  const DepthMap zero(4, 5, 0.0f);
  for (float v : testing::values(transmission_from_depth(zero, 1.3f).data())) CHECK(v == 1.0f);
  const DepthMap deep(4, 5, 7.0f);
  for (float v : testing::values(transmission_from_depth(deep, 0.0f).data())) CHECK(v == 1.0f);
  const float beta = 1.7f;
  DepthMap d(2, 2, 0.0f);
  d.at(1, 0) = static_cast<float>(std::log(2.0) / beta);
  const auto t = transmission_from_depth(d, beta);
  CHECK(t.at(1, 0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(t.at(0, 0) == 1.0f);
  for (float v : testing::values(transmission_from_depth(DepthMap(3, 3, 100.0f), 2.0f).data())) CHECK(v == kTransmissionFloor);
  CHECK_THROWS_AS((void)transmission_from_depth(zero, -0.1f), std::invalid_argument);
}

TEST_CASE("synthesize_haze closed forms") {
  std::mt19937_64 rng(1);
  const Image j = random_image(rng, 6, 7);
  CHECK(synthesize_haze(j, uniform_params(6, 7, 0.8f, 1.0f)) == j);

  const Image floor_haze = synthesize_haze(j, uniform_params(6, 7, 1.0f, 0.0f));
  for (std::size_t p = 0; p < j.size(); ++p)
    CHECK(floor_haze.data()[p] == doctest::Approx(0.05 * j.data()[p] + 0.95).epsilon(1e-6));

  const Image half(2, 2, 0.5f);
  for (float v : testing::values(synthesize_haze(half, uniform_params(2, 2, 1.0f, 0.5f)).data())) CHECK(v == 0.75f);

  CHECK_THROWS_AS((void)synthesize_haze(j, uniform_params(6, 6, 1.0f, 0.5f)), ShapeError);
}

TEST_CASE("decreasing transmission moves a darker pixel monotonically toward the airlight") {
  const Image j(1, 1, 0.2f);
  float previous = 0.2f;
  for (float t = 1.0f; t >= 0.05f; t -= 0.05f) {
    const float v = synthesize_haze(j, uniform_params(1, 1, 0.9f, t)).data()[0];
    CHECK(v >= previous);
    CHECK(v <= 0.9f);
    previous = v;
  }
}

TEST_CASE("ideal K scalar check and restore") {
  const Image i(1, 1, 0.75f);
  const KMap k = ideal_k(i, uniform_params(1, 1, 1.0f, 0.5f), 1.0f);
  CHECK(k.k[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(restore(i, k).data()[0] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("ideal K without haze restores the input") {
  std::mt19937_64 rng(2);
  const Image i = random_image(rng, 8, 8, 0.0, 0.99);
  const float a = 0.85f;
  const KMap k = ideal_k(i, uniform_params(8, 8, a, 1.0f), a);
  const Image out = restore(i, k);
  for (std::size_t p = 0; p < i.size(); ++p) {
    CHECK(k.k[p] == doctest::Approx((i.data()[p] - a) / (i.data()[p] - 1.0)).epsilon(1e-6));
    CHECK(std::abs(out.data()[p] - i.data()[p]) <= 1e-6f);
  }
}

TEST_CASE("ideal K guard keeps saturated pixels finite") {
  Image i(1, 3);
  for (std::size_t c = 0; c < 3; ++c) {
    i.at(c, 0, 0) = 1.0f;
    i.at(c, 0, 1) = 1.0f - 5e-5f;
    i.at(c, 0, 2) = 0.5f;
  }
  const auto params = uniform_params(1, 3, 0.9f, 0.4f);
  const KMap k = ideal_k(i, params, 1.0f);
  CHECK(k.k.all_finite());
  // sign(0) is taken as -1: denominator -1e-4 at I = 1.
  const double want = (1.0 / 0.4) * ((1.0 - 0.9) / -1e-4) + (0.9 - 1.0) / -1e-4;
  CHECK(k.k.at(0, 0, 0) == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("restore round-trips synthesized haze against direct inversion") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const Image j = random_image(rng, 16, 16);
    HazeParams p;
    for (auto& a : p.airlight) a = static_cast<float>(init::uniform(rng, 0.5, 1.0));
    p.transmission = TransmissionMap(16, 16);
    for (auto& t : p.transmission.data()) t = static_cast<float>(init::uniform(rng, 0.05, 1.0));
    const float b = trial % 2 ? 1.0f : 0.5f;
    const Image hazy = synthesize_haze(j, p);
    const Image out = restore(hazy, ideal_k(hazy, p, b));
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < 16; ++y)
        for (std::size_t x = 0; x < 16; ++x) {
          const double in = hazy.at(c, y, x);
          if (std::abs(in - 1.0) < 1e-3) continue;
          const double t = p.transmission.at(y, x), a = p.airlight[c];
          const double direct = std::clamp((in - a) / t + a, 0.0, 1.0);
          CHECK(std::abs(out.at(c, y, x) - direct) <= 1e-5);
          CHECK(std::abs(out.at(c, y, x) - j.at(c, y, x)) <= 1e-5);
        }
  }
}

TEST_CASE("restore closed forms and clamping") {
  std::mt19937_64 rng(4);
  const Image i = random_image(rng, 5, 5);
  CHECK(restore(i, KMap{Tensor({3, 5, 5}, 1.0f), 1.0f}) == i);
  for (float v : testing::values(restore(i, KMap{Tensor({3, 5, 5}, 0.0f), 0.3f}).data())) CHECK(v == 0.3f);
  for (float v : testing::values(restore(Image(2, 2, 0.75f), KMap{Tensor({3, 2, 2}, 2.0f), 1.0f}).data())) CHECK(v == 0.5f);
  for (float v : testing::values(restore(i, KMap{Tensor({3, 5, 5}, -40.0f), 1.0f}).data())) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  CHECK_THROWS_AS((void)restore(i, KMap{Tensor({3, 4, 5}, 1.0f), 1.0f}), ShapeError);
}

TEST_CASE("dark channel closed forms") {
  for (float v : testing::values(dark_channel(Image(6, 6, 1.0f), 3).data())) CHECK(v == 1.0f);
  std::mt19937_64 rng(5);
  Image img = random_image(rng, 6, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) img.at((i + j) % 3, i, j) = 0.0f;
  for (float v : testing::values(dark_channel(img, 1).data())) CHECK(v == 0.0f);
  CHECK_THROWS_AS((void)dark_channel(img, 4), std::invalid_argument);
}

TEST_CASE("dark channel matches the exhaustive-min oracle") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t patch = 1 + 2 * (trial % 4);
    const Image img = random_image(rng, 5 + trial % 3, 5 + trial % 4);
    CHECK(dark_channel(img, patch) == dark_channel_oracle(img, patch));
  }
}

TEST_CASE("dark channel commutes with brightness scaling") {
  std::mt19937_64 rng(7);
  const Image img = random_image(rng, 12, 9);
  for (float c : {1.0f, 0.8f, 0.31f, 0.05f}) {
    Image scaled = img;
    for (auto& v : scaled.data()) v *= c;
    const auto a = dark_channel(scaled, 5);
    const auto b = dark_channel(img, 5);
    for (std::size_t p = 0; p < a.size(); ++p) CHECK(a.data()[p] == c * b.data()[p]);
  }
}

TEST_CASE("box filter matches a clipped-window mean") {
  std::mt19937_64 rng(8);
  GrayMap src(9, 11);
  for (auto& v : src.data()) v = static_cast<float>(init::unit(rng));
  for (std::size_t r : {0u, 1u, 3u, 20u}) {
    const auto out = box_filter(src, r);
    for (long i = 0; i < 9; ++i)
      for (long j = 0; j < 11; ++j) {
        double sum = 0.0;
        int n = 0;
        for (long u = i - static_cast<long>(r); u <= i + static_cast<long>(r); ++u)
          for (long v = j - static_cast<long>(r); v <= j + static_cast<long>(r); ++v)
            if (u >= 0 && v >= 0 && u < 9 && v < 11) {
              sum += src.at(u, v);
              ++n;
            }
        CHECK(out.at(i, j) == doctest::Approx(sum / n).epsilon(1e-6));
      }
  }
}

TEST_CASE("guided filter preserves constants and smooths noise") {
  GrayMap flat(20, 20, 0.4f);
  for (float v : testing::values(guided_filter(flat, flat, 4, 1e-3f).data())) CHECK(v == doctest::Approx(0.4).epsilon(1e-5));
  std::mt19937_64 rng(9);
  GrayMap guide(20, 20, 0.5f), noisy(20, 20);
  double var_in = 0.0, var_out = 0.0;
  for (auto& v : noisy.data()) v = static_cast<float>(0.5 + init::uniform(rng, -0.1, 0.1));
  const auto out = guided_filter(guide, noisy, 4, 1e-3f);
  for (std::size_t p = 0; p < out.size(); ++p) {
    var_in += std::pow(noisy.data()[p] - 0.5, 2);
    var_out += std::pow(out.data()[p] - 0.5, 2);
  }
  CHECK(var_out < 0.2 * var_in);
}

TEST_CASE("dcp on pure airlight returns the airlight") {
  for (auto refinement : {Refinement::kGuided, Refinement::kBox, Refinement::kNone}) {
    DcpOptions o;
    o.refinement = refinement;
    const Image a(20, 20, 0.8f);
    const auto r = dcp_estimate(a, o);
    for (float v : r.airlight) CHECK(v == doctest::Approx(0.8).epsilon(1e-6));
    for (float v : r.dehazed.data()) CHECK(v == doctest::Approx(0.8).epsilon(1e-5));
  }
}

TEST_CASE("dcp leaves shadowed haze-free regions almost untouched") {
  Image img(30, 30, 0.0f);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j) {
      img.at(0, i, j) = 0.6f;
      img.at(1, i, j) = 0.3f;
      img.at(2, i, j) = 0.0f;
    }
  DcpOptions o;
  o.refinement = Refinement::kNone;
  const auto r = dcp_estimate(img, o);
  for (float t : r.transmission.data()) CHECK(t == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t p = 0; p < img.size(); ++p) CHECK(r.dehazed.data()[p] == doctest::Approx(img.data()[p]).epsilon(1e-6));
}

TEST_CASE("dcp floors the airlight of an all-black image") {
  const auto r = dcp_estimate(Image(16, 16, 0.0f));
  for (float v : r.airlight) CHECK(v >= 0.01f);
  for (float v : r.dehazed.data()) CHECK(v == 0.0f);
}

TEST_CASE("dcp improves PSNR on a uniform-haze scene") {
  const auto scene = make_scene(123, 48, 48);
  const Image hazy = synthesize_haze(scene.clean, uniform_params(48, 48, 0.9f, 0.6f));
  const Image out = dcp_dehaze(hazy);
  CHECK(metrics::psnr(out, scene.clean) > metrics::psnr(hazy, scene.clean));
  for (float v : out.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("procedural scenes are deterministic and in range") {
  const auto a = make_scene(77, 40, 36);
  const auto b = make_scene(77, 40, 36);
  const auto c = make_scene(78, 40, 36);
  CHECK(a.clean == b.clean);
  CHECK(a.depth == b.depth);
  CHECK_FALSE(a.clean == c.clean);
  for (float v : a.clean.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  for (float d : a.depth.data()) {
    CHECK(d >= 0.0f);
    CHECK(std::isfinite(d));
  }
}

TEST_CASE("luminance weights") {
  Image img(1, 1);
  img.at(0, 0, 0) = 1.0f;
  CHECK(luminance(img).at(0, 0) == doctest::Approx(0.299));
}
