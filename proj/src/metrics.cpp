// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fieldfuse/error.hpp"

namespace fieldfuse {

double psnr(const ImageD& a, const ImageD& b, double max_value) {
  if (!a.same_shape(b) || a.data.empty()) throw Error(ErrorCode::DimensionMismatch, "psnr needs equally sized images");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(max_value * max_value / mse);
}

namespace {

// Valid-mode separable filter of one channel.
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  const int ow = w - 2 * r, oh = h - 2 * r;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < static_cast<int>(k.size()); ++i) s += k[i] * img[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < static_cast<int>(k.size()); ++i) s += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double ssim(const ImageD& a, const ImageD& b, const SsimOptions& o) {
  if (!a.same_shape(b)) throw Error(ErrorCode::DimensionMismatch, "ssim needs equally sized images");
  if (a.width < o.window || a.height < o.window || o.window % 2 == 0)
    throw Error(ErrorCode::DimensionMismatch, "ssim needs images at least as large as an odd window");
  std::vector<double> kernel(static_cast<std::size_t>(o.window));
  const int r = o.window / 2;
  double ksum = 0.0;
  for (int i = 0; i < o.window; ++i) {
    kernel[i] = std::exp(-0.5 * (i - r) * (i - r) / (o.sigma * o.sigma));
    ksum += kernel[i];
  }
  for (double& v : kernel) v /= ksum;

  const double c1 = (o.k1 * o.data_range) * (o.k1 * o.data_range);
  const double c2 = (o.k2 * o.data_range) * (o.k2 * o.data_range);
  const std::size_t n = a.pixel_count();
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a.data[i * a.channels + c];
      y[i] = b.data[i * b.channels + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, a.width, a.height, kernel);
    const auto my = filter_valid(y, a.width, a.height, kernel);
    const auto mxx = filter_valid(xx, a.width, a.height, kernel);
    const auto myy = filter_valid(yy, a.width, a.height, kernel);
    const auto mxy = filter_valid(xy, a.width, a.height, kernel);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = mxx[i] - mx[i] * mx[i];
      const double vy = myy[i] - my[i] * my[i];
      const double cov = mxy[i] - mx[i] * my[i];
      sum += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / a.channels;
}

ImageMetrics image_metrics(const ImageD& a, const ImageD& b) { return {psnr(a, b), ssim(a, b)}; }

DepthMetrics depth_metrics(std::span<const double> pred, std::span<const double> gt,
                           std::span<const unsigned char> mask, bool median_scale) {
  if (pred.size() != gt.size() || mask.size() != gt.size())
    throw Error(ErrorCode::DimensionMismatch, "depth maps and mask must have equal sizes");
  std::vector<double> p, g;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (mask[i] && gt[i] > 0.0 && pred[i] > 0.0) {
      p.push_back(pred[i]);
      g.push_back(gt[i]);
    }
  }
  if (g.empty()) throw Error(ErrorCode::EmptyMask, "no valid depth pixels under the mask");
  if (median_scale) {
    auto median = [](std::vector<double> v) {
      const std::size_t mid = v.size() / 2;
      std::nth_element(v.begin(), v.begin() + mid, v.end());
      if (v.size() % 2 == 1) return v[mid];
      return 0.5 * (v[mid] + *std::max_element(v.begin(), v.begin() + mid));
    };
    const double s = median(g) / median(p);
    for (double& x : p) x *= s;
  }
  DepthMetrics m;
  double sq = 0.0;
  std::size_t d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double diff = p[i] - g[i];
    m.abs_rel += std::abs(diff) / g[i];
    m.sq_rel += diff * diff / g[i];
    sq += diff * diff;
    const double ratio = std::max(p[i] / g[i], g[i] / p[i]);
    if (ratio < 1.25) ++d1;
    if (ratio < 1.25 * 1.25) ++d2;
    if (ratio < 1.25 * 1.25 * 1.25) ++d3;
  }
  const double n = static_cast<double>(g.size());
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.rmse = std::sqrt(sq / n);
  m.delta1 = d1 / n;
  m.delta2 = d2 / n;
  m.delta3 = d3 / n;
  return m;
}

}  // namespace fieldfuse
