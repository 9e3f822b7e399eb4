// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "fieldfuse/error.hpp"
#include "fieldfuse/metrics.hpp"
#include "fieldfuse/random.hpp"

using namespace fieldfuse;

namespace {

// Reference values from an independent windowed-SSIM implementation
// (Gaussian weights, sigma 1.5, population covariance, data range 1).
constexpr double kSsimGray = 0.7261267003909827;
constexpr double kSsimColor = 0.731377233502684;

ImageD wave(int w, int h, double phase, double ripple) {
  ImageD img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = 0.5 + 0.4 * std::sin(0.3 * x + 0.2 * y + phase) + ripple * std::cos(0.7 * y);
  return img;
}

ImageD random_image(Rng& rng, int w, int h, int c) {
  ImageD img(w, h, c);
  for (double& v : img.data) v = uniform(rng, 0.0, 1.0);
  return img;
}

}  // namespace

TEST_CASE("psnr") {
  Rng rng(1);
  const ImageD a = random_image(rng, 17, 9, 3);
  CHECK(psnr(a, a) == kPsnrIdentical);

  ImageD c0(8, 8, 3, 0.3), c1(8, 8, 3, 0.4);
  CHECK(std::abs(psnr(c0, c1) - 20.0) < 1e-9);

  const ImageD b = random_image(rng, 17, 9, 3);
  double se = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) se += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
  const double reference = 10.0 * std::log10(1.0 / (se / static_cast<double>(a.data.size())));
  CHECK(std::abs(psnr(a, b) - reference) < 1e-9);
  CHECK(psnr(a, b) == psnr(b, a));
  CHECK(psnr(a, b) >= 0.0);

  CHECK_THROWS_AS(psnr(a, ImageD(17, 9, 1)), Error);
}

TEST_CASE("ssim") {
  const int w = 24, h = 20;
  const ImageD a = wave(w, h, 0.0, 0.0);
  const ImageD b = wave(w, h, 0.5, 0.05);
  CHECK(std::abs(ssim(a, a) - 1.0) < 1e-12);
  CHECK(std::abs(ssim(a, b) - kSsimGray) < 1e-6);
  CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-15);

  ImageD c(w, h, 3), d(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double av = a.at(x, y), bv = b.at(x, y);
      c.at(x, y, 0) = av;
      c.at(x, y, 1) = bv;
      c.at(x, y, 2) = 1.0 - av;
      d.at(x, y, 0) = bv;
      d.at(x, y, 1) = av;
      d.at(x, y, 2) = std::clamp(1.0 - bv + 0.02 * x / w, 0.0, 1.0);
    }
  }
  CHECK(std::abs(ssim(c, d) - kSsimColor) < 1e-6);

  // Binary checkerboard against its complement is anticorrelated.
  ImageD board(16, 16, 1), inverse(16, 16, 1);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      board.at(x, y) = ((x / 2 + y / 3) % 2) ? 1.0 : 0.0;
      inverse.at(x, y) = 1.0 - board.at(x, y);
    }
  }
  CHECK(ssim(board, inverse) < 0.0);

  CHECK_THROWS_AS(ssim(a, ImageD(w, h + 1, 1)), Error);
  CHECK_THROWS_AS(ssim(ImageD(8, 8, 1), ImageD(8, 8, 1)), Error);

  const ImageMetrics m = image_metrics(c, d);
  CHECK(m.psnr == psnr(c, d));
  CHECK(m.ssim == ssim(c, d));
}

TEST_CASE("depth metrics") {
  Rng rng(4);
  std::vector<double> gt(500);
  for (double& g : gt) g = uniform(rng, 0.5, 5.0);
  std::vector<unsigned char> mask(gt.size(), 1);

  const DepthMetrics same = depth_metrics(gt, gt, mask, false);
  CHECK(same.abs_rel == 0.0);
  CHECK(same.sq_rel == 0.0);
  CHECK(same.rmse == 0.0);
  CHECK(same.delta1 == 1.0);
  CHECK(same.delta3 == 1.0);

  std::vector<double> twice(gt.size()), scaled(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    twice[i] = 2.0 * gt[i];
    scaled[i] = 1.3 * gt[i];
  }
  const DepthMetrics med = depth_metrics(twice, gt, mask, true);
  CHECK(med.abs_rel < 1e-12);
  CHECK(med.rmse < 1e-12);
  CHECK(med.delta1 == 1.0);

  double mean_g = 0.0, mean_g2 = 0.0;
  for (double g : gt) {
    mean_g += g / gt.size();
    mean_g2 += g * g / gt.size();
  }
  const DepthMetrics off = depth_metrics(scaled, gt, mask, false);
  CHECK(off.delta1 == 0.0);
  CHECK(off.delta2 == 1.0);
  CHECK(off.delta3 == 1.0);
  CHECK(std::abs(off.abs_rel - 0.3) < 1e-12);
  CHECK(std::abs(off.sq_rel - 0.09 * mean_g) < 1e-12);
  CHECK(std::abs(off.rmse - 0.3 * std::sqrt(mean_g2)) < 1e-12);

  // Masked and non-positive ground truth pixels are ignored.
  std::vector<double> noisy = gt;
  std::vector<unsigned char> half = mask;
  std::vector<double> gt_holes = gt;
  for (std::size_t i = 0; i < gt.size(); i += 2) {
    half[i] = 0;
    noisy[i] = 100.0;
  }
  gt_holes[1] = 0.0;
  noisy[1] = 50.0;
  const DepthMetrics masked = depth_metrics(noisy, gt_holes, half, false);
  CHECK(masked.abs_rel == 0.0);
  CHECK(masked.delta1 == 1.0);

  CHECK(off.delta1 <= off.delta2);
  CHECK(off.delta2 <= off.delta3);

  const std::vector<unsigned char> none(gt.size(), 0);
  try {
    depth_metrics(gt, gt, none, false);
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyMask);
  }
  const std::vector<double> short_pred(10, 1.0);
  CHECK_THROWS_AS(depth_metrics(short_pred, gt, mask, false), Error);
}
