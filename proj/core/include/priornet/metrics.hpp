#pragma once

#include <string>

#include "priornet/image.hpp"

namespace priornet::metrics {

// Reported PSNR for identical images.
inline constexpr double kPsnrExactMatch = 99.0;

struct QualityReport {
  std::string image_id;
  double psnr_db = 0.0;
  bool exact_match = false;
  double ssim = 0.0;
};

// Mean squared error accumulated in double.
double mse(const Image& a, const Image& b);

// 10 log10(1 / mse) with peak 1; kPsnrExactMatch when mse is zero.
double psnr(const Image& a, const Image& b);
double psnr_from_mse(double mse);

// Per-channel SSIM over valid 11x11 Gaussian windows (sigma 1.5, K1 0.01,
// K2 0.03, L 1), averaged over window positions and channels.
double ssim(const Image& a, const Image& b);

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

QualityReport evaluate(const Image& restored, const Image& reference, std::string image_id);

}  // namespace priornet::metrics
