// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/field.hpp"

#include <algorithm>
#include <cmath>

#include "fieldfuse/error.hpp"
#include "fieldfuse/parallel.hpp"

namespace fieldfuse {

Primitive Primitive::sphere(const Vec3& center, double radius, double sigma, const Vec3& color) {
  Primitive p;
  p.shape = ShapeKind::Sphere;
  p.center = center;
  p.radius = radius;
  p.sigma = sigma;
  p.color.color = color;
  return p;
}

Primitive Primitive::box(const Vec3& center, const Vec3& half_extents, double sigma, const Vec3& color,
                         const Mat3& rotation) {
  Primitive p;
  p.shape = ShapeKind::Box;
  p.center = center;
  p.half_extents = half_extents;
  p.rotation = rotation;
  p.sigma = sigma;
  p.color.color = color;
  return p;
}

Primitive Primitive::gaussian(const Vec3& center, double stddev, double sigma, const Vec3& color) {
  Primitive p;
  p.shape = ShapeKind::Gaussian;
  p.center = center;
  p.stddev = stddev;
  p.sigma = sigma;
  p.color.color = color;
  return p;
}

double Primitive::density(const Vec3& x) const {
  switch (shape) {
    case ShapeKind::Sphere:
      return (x - center).squaredNorm() <= radius * radius ? sigma : 0.0;
    case ShapeKind::Box: {
      const Vec3 local = rotation.transpose() * (x - center);
      return (local.cwiseAbs().array() <= half_extents.array()).all() ? sigma : 0.0;
    }
    case ShapeKind::Gaussian:
      return sigma * std::exp(-(x - center).squaredNorm() / (2.0 * stddev * stddev));
  }
  return 0.0;
}

Vec3 Primitive::color_at(const Vec3& x) const {
  if (!color.gradient) return color.color;
  double extent = radius;
  if (shape == ShapeKind::Box) extent = half_extents.maxCoeff();
  if (shape == ShapeKind::Gaussian) extent = 3.0 * stddev;
  const double s = std::clamp(0.5 + 0.5 * (x[color.axis] - center[color.axis]) / extent, 0.0, 1.0);
  return (1.0 - s) * color.color + s * color.color_end;
}

void Primitive::validate() const {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "primitive density must be non-negative");
  const bool sized = (shape == ShapeKind::Sphere && radius > 0.0) ||
                     (shape == ShapeKind::Box && (half_extents.array() > 0.0).all()) ||
                     (shape == ShapeKind::Gaussian && stddev > 0.0);
  if (!sized) throw Error(ErrorCode::InvalidArgument, "primitive size must be positive");
  auto in_unit = [](const Vec3& c) { return (c.array() >= 0.0).all() && (c.array() <= 1.0).all(); };
  if (!in_unit(color.color) || (color.gradient && !in_unit(color.color_end)))
    throw Error(ErrorCode::InvalidArgument, "primitive colors must lie in [0, 1]");
  if (color.axis < 0 || color.axis > 2) throw Error(ErrorCode::InvalidArgument, "gradient axis must be 0, 1 or 2");
}

FieldValue Field::eval(const Vec3& x) const {
  FieldValue out;
  Vec3 weighted = Vec3::Zero();
  for (const auto& p : primitives) {
    const double s = p.density(x);
    if (s <= 0.0) continue;
    out.sigma += s;
    weighted += s * p.color_at(x);
  }
  out.color = out.sigma > 0.0 ? Vec3(weighted / out.sigma) : background;
  return out;
}

void Field::validate() const {
  for (const auto& p : primitives) p.validate();
}

std::vector<RaySample> sample_ray(const Field& field, const Ray& ray, double t_near, double t_far, int n) {
  if (!(t_near > 0.0) || !(t_far > t_near) || n < 2)
    throw Error(ErrorCode::InvalidArgument, "sample_ray needs 0 < t_near < t_far and n >= 2");
  std::vector<RaySample> samples(static_cast<std::size_t>(n));
  const double span = t_far - t_near;
  for (int k = 0; k < n; ++k) {
    const double lo = t_near + span * k / n;
    const double hi = t_near + span * (k + 1) / n;
    RaySample& s = samples[k];
    s.t = 0.5 * (lo + hi);
    s.delta = hi - lo;
    const FieldValue v = field.eval(ray.origin + s.t * ray.direction);
    s.sigma = v.sigma;
    s.color = v.color;
  }
  return samples;
}

RenderResult render_ray(std::span<const RaySample> samples, const Vec3& background) {
  RenderResult r;
  r.masses.resize(samples.size());
  double optical_depth = 0.0;
  double weighted_t = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double transmittance = std::exp(-optical_depth);
    const double tau = samples[k].sigma * samples[k].delta;
    const double p = transmittance * -std::expm1(-tau);
    r.masses[k] = p;
    r.accumulation += p;
    r.color += p * samples[k].color;
    weighted_t += p * samples[k].t;
    optical_depth += tau;
  }
  r.transmittance = std::exp(-optical_depth);
  r.color += (1.0 - r.accumulation) * background;
  r.depth = r.accumulation > 0.0 ? weighted_t / r.accumulation : 0.0;
  return r;
}

double distant_accumulation(std::span<const RaySample> samples, std::span<const double> masses, double cutoff) {
  if (!(cutoff >= 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff distance must be non-negative");
  if (samples.size() != masses.size()) throw Error(ErrorCode::DimensionMismatch, "one mass per sample required");
  double q = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double lo = samples[k].t - 0.5 * samples[k].delta;
    const double hi = samples[k].t + 0.5 * samples[k].delta;
    if (lo >= cutoff) {
      q += masses[k];
    } else if (hi > cutoff) {
      q += masses[k] * (hi - cutoff) / samples[k].delta;
    }
  }
  return q;
}

double distant_accumulation(std::span<const RaySample> samples, double cutoff) {
  const RenderResult r = render_ray(samples, Vec3::Zero());
  return distant_accumulation(samples, r.masses, cutoff);
}

RenderedImage render_image(const Field& field, const CameraModel& model, const Pose& pose,
                           const ImageGeometry& geom, const RenderOptions& options) {
  const RayBundle rays = generate_rays(model, pose, geom, RayConvention::Conventional);
  RenderedImage out;
  out.color = ImageD(geom.width, geom.height, 3);
  out.depth = ImageD(geom.width, geom.height, 1);
  out.accumulation = ImageD(geom.width, geom.height, 1);
  out.distant = ImageD(geom.width, geom.height, 1);

  parallel_for(rays.directions.size(), [&](std::size_t i) {
    const int u = static_cast<int>(i % geom.width);
    const int v = static_cast<int>(i / geom.width);
    if (!rays.valid[i]) {
      for (int c = 0; c < 3; ++c) out.color.at(u, v, c) = field.background[c];
      return;
    }
    const auto samples = sample_ray(field, {rays.origin, rays.directions[i]}, options.t_near, options.t_far,
                                    options.n_samples);
    const RenderResult r = render_ray(samples, field.background);
    for (int c = 0; c < 3; ++c) out.color.at(u, v, c) = r.color[c];
    out.depth.at(u, v) = r.depth;
    out.accumulation.at(u, v) = r.accumulation;
    out.distant.at(u, v) = distant_accumulation(samples, r.masses, options.qd_cutoff);
  });

  double sum = 0.0;
  for (double q : out.distant.data) sum += q;
  out.mean_distant_accumulation = out.distant.data.empty() ? 0.0 : sum / out.distant.data.size();
  return out;
}

}  // namespace fieldfuse
