// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "fieldfuse/image.hpp"

namespace fieldfuse {

/// Reported PSNR for identical images, keeping reports finite.
constexpr double kPsnrIdentical = 99.0;

/// 10 log10(max^2 / MSE) over all channels. Throws DimensionMismatch.
double psnr(const ImageD& a, const ImageD& b, double max_value = 1.0);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

/// Mean SSIM over every window position with full support, averaged over
/// channels. Gaussian-weighted local statistics.
double ssim(const ImageD& a, const ImageD& b, const SsimOptions& options = {});

struct ImageMetrics {
  double psnr = 0.0;
  double ssim = 0.0;
};

ImageMetrics image_metrics(const ImageD& a, const ImageD& b);

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double delta1 = 0.0;  // fraction with max(p/g, g/p) < 1.25
  double delta2 = 0.0;  // < 1.25^2
  double delta3 = 0.0;  // < 1.25^3
};

/// Standard depth errors over pixels with mask != 0 and gt > 0. With
/// median_scale, pred is first multiplied by median(gt) / median(pred).
/// Throws EmptyMask or DimensionMismatch.
DepthMetrics depth_metrics(std::span<const double> pred, std::span<const double> gt,
                           std::span<const unsigned char> mask, bool median_scale);

}  // namespace fieldfuse
