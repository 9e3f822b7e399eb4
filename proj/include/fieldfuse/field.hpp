// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "fieldfuse/camera.hpp"
#include "fieldfuse/geometry.hpp"
#include "fieldfuse/image.hpp"

namespace fieldfuse {

enum class ShapeKind { Sphere, Box, Gaussian };

/// Constant color, or a linear ramp from `color` to `color_end` across the
/// primitive's extent along one world axis.
struct ColorSpec {
  Vec3 color = Vec3(0.5, 0.5, 0.5);
  bool gradient = false;
  Vec3 color_end = Vec3(0.5, 0.5, 0.5);
  int axis = 0;
};

/// Analytic density blob. Spheres and boxes are homogeneous with density
/// `sigma`; gaussians peak at `sigma` at the center.
struct Primitive {
  ShapeKind shape = ShapeKind::Sphere;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;                          // sphere
  Mat3 rotation = Mat3::Identity();             // box, world-from-box
  Vec3 half_extents = Vec3(0.5, 0.5, 0.5);      // box
  double stddev = 1.0;                          // gaussian
  double sigma = 0.0;
  ColorSpec color;

  static Primitive sphere(const Vec3& center, double radius, double sigma, const Vec3& color);
  static Primitive box(const Vec3& center, const Vec3& half_extents, double sigma, const Vec3& color,
                       const Mat3& rotation = Mat3::Identity());
  static Primitive gaussian(const Vec3& center, double stddev, double sigma, const Vec3& color);

  double density(const Vec3& x) const;
  Vec3 color_at(const Vec3& x) const;
  void validate() const;
};

struct FieldValue {
  double sigma = 0.0;
  Vec3 color = Vec3::Zero();
};

/// Volumetric scene: density is the sum of the primitive densities and color
/// their density-weighted mean.
struct Field {
  std::vector<Primitive> primitives;
  Vec3 background = Vec3::Zero();

  FieldValue eval(const Vec3& x) const;
  void validate() const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
};

/// Segment [t - delta/2, t + delta/2] with density and color at its midpoint.
struct RaySample {
  double t = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  Vec3 color = Vec3::Zero();
};

/// n equal segments covering [t_near, t_far], evaluated at midpoints.
std::vector<RaySample> sample_ray(const Field& field, const Ray& ray, double t_near, double t_far, int n);

struct RenderResult {
  Vec3 color = Vec3::Zero();
  double depth = 0.0;  // meaningful only when accumulation > 0
  double accumulation = 0.0;
  double transmittance = 1.0;  // residual after the last sample
  std::vector<double> masses;  // termination probability per sample
};

RenderResult render_ray(std::span<const RaySample> samples, const Vec3& background);

/// Termination mass at distance >= cutoff. A segment straddling the cutoff
/// contributes the fraction of its mass beyond it.
double distant_accumulation(std::span<const RaySample> samples, std::span<const double> masses, double cutoff);
double distant_accumulation(std::span<const RaySample> samples, double cutoff);

struct RenderOptions {
  int n_samples = 256;
  double t_near = 0.02;
  double t_far = 6.0;
  double qd_cutoff = 0.3;
};

struct RenderedImage {
  ImageD color;         // 3 channels
  ImageD depth;         // 0 where nothing terminates
  ImageD accumulation;
  ImageD distant;       // per-pixel q_d
  double mean_distant_accumulation = 0.0;
};

/// Renders every pixel; pixels outside the camera's domain count as
/// background with q_d = 0.
RenderedImage render_image(const Field& field, const CameraModel& model, const Pose& pose,
                           const ImageGeometry& geom, const RenderOptions& options = {});

}  // namespace fieldfuse
