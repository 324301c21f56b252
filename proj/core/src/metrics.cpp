#include "priornet/metrics.hpp"

#include <array>
#include <cmath>

namespace priornet::metrics {
namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> taps{};
  const double mid = (kSsimWindow - 1) / 2.0;
  double total = 0.0;
  for (std::size_t k = 0; k < kSsimWindow; ++k) {
    const double d = static_cast<double>(k) - mid;
    taps[k] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    total += taps[k];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

// Separable valid-mode Gaussian filter of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w) {
  static const auto taps = gaussian_taps();
  const std::size_t oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < ow; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < kSsimWindow; ++k) s += taps[k] * src[i * w + j + k];
      rows[i * ow + j] = s;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t i = 0; i < oh; ++i)
    for (std::size_t j = 0; j < ow; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < kSsimWindow; ++k) s += taps[k] * rows[(i + k) * ow + j];
      out[i * ow + j] = s;
    }
  return out;
}

}  // namespace

double mse(const Image& a, const Image& b) {
  require_same_extent(a, b, "mse");
  double s = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    const double d = static_cast<double>(a.data()[p]) - static_cast<double>(b.data()[p]);
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr_from_mse(double m) {
  if (m == 0.0) return kPsnrExactMatch;
  return 10.0 * std::log10(1.0 / m);
}

double psnr(const Image& a, const Image& b) { return psnr_from_mse(mse(a, b)); }

double ssim(const Image& a, const Image& b) {
  require_same_extent(a, b, "ssim");
  const std::size_t h = a.height(), w = a.width();
  if (h < kSsimWindow || w < kSsimWindow) {
    throw ShapeError("ssim: images must be at least 11x11, got " + std::to_string(h) + "x" + std::to_string(w));
  }
  const std::size_t plane = h * w;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
    for (std::size_t p = 0; p < plane; ++p) {
      x[p] = a.data()[c * plane + p];
      y[p] = b.data()[c * plane + p];
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    const auto mx = filter_valid(x, h, w);
    const auto my = filter_valid(y, h, w);
    const auto sxx = filter_valid(xx, h, w);
    const auto syy = filter_valid(yy, h, w);
    const auto sxy = filter_valid(xy, h, w);
    for (std::size_t p = 0; p < mx.size(); ++p) {
      const double vx = sxx[p] - mx[p] * mx[p];
      const double vy = syy[p] - my[p] * my[p];
      const double cov = sxy[p] - mx[p] * my[p];
      const double num = (2.0 * mx[p] * my[p] + kC1) * (2.0 * cov + kC2);
      const double den = (mx[p] * mx[p] + my[p] * my[p] + kC1) * (vx + vy + kC2);
      total += num / den;
    }
    count += mx.size();
  }
  return total / static_cast<double>(count);
}

QualityReport evaluate(const Image& restored, const Image& reference, std::string image_id) {
  QualityReport r;
  r.image_id = std::move(image_id);
  r.exact_match = mse(restored, reference) == 0.0;
  r.psnr_db = psnr(restored, reference);
  r.ssim = ssim(restored, reference);
  return r;
}

}  // namespace priornet::metrics
