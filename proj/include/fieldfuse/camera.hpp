// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "fieldfuse/geometry.hpp"
#include "fieldfuse/image.hpp"

namespace fieldfuse {

enum class CameraKind { Pinhole, UCM, EUCM, DS };

const char* camera_kind_name(CameraKind kind);
CameraKind camera_kind_from_name(const std::string& name);

/// Guard on projection denominators.
constexpr double kDenomEps = 1e-9;

/// Central camera from the unified family.
///
/// Parameter vector order is (fx, fy, cx, cy) followed by alpha for UCM,
/// (alpha, beta) for EUCM and (alpha, xi) for DS.
struct CameraModel {
  CameraKind kind = CameraKind::Pinhole;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double alpha = 0.0;
  double beta = 1.0;
  double xi = 0.0;

  static CameraModel pinhole(double fx, double fy, double cx, double cy);
  static CameraModel ucm(double fx, double fy, double cx, double cy, double alpha);
  static CameraModel eucm(double fx, double fy, double cx, double cy, double alpha, double beta);
  static CameraModel ds(double fx, double fy, double cx, double cy, double alpha, double xi);

  /// Defaults derived from the image shape only: f = width, c = center,
  /// alpha = 0.5, beta = 1, xi = 0.
  static CameraModel image_defaults(CameraKind kind, int width, int height);

  int param_count() const;
  Eigen::VectorXd params() const;
  static CameraModel from_params(CameraKind kind, const Eigen::VectorXd& p);

  /// Throws InvalidArgument when the parameter invariants do not hold.
  void validate() const;
};

int param_count(CameraKind kind);

/// Continuous pixel grid; (0, 0) is the center of the top-left pixel,
/// +u right and +v down.
struct ImageGeometry {
  int width = 1;
  int height = 1;
};

std::optional<Vec2> try_project(const CameraModel& model, const Vec3& p);

/// Throws BehindCamera when p is outside the projection domain.
Vec2 project(const CameraModel& model, const Vec3& p);

/// Unit viewing ray through a pixel, or nullopt outside the unprojection domain.
std::optional<Vec3> try_unproject_ray(const CameraModel& model, const Vec2& pixel);

/// Point at range `range` (distance from the optical center) along the pixel's
/// viewing ray. Throws InvalidPixel outside the unprojection domain.
Vec3 unproject(const CameraModel& model, const Vec2& pixel, double range);

struct ProjectionJacobians {
  Eigen::Matrix<double, 2, 3> d_point;
  Eigen::MatrixXd d_params;  // 2 x param_count
};

ProjectionJacobians project_jacobians(const CameraModel& model, const Vec3& p);

/// Pixel p_t with range d in the target camera, moved by target_to_context and
/// projected into the context camera.
Vec2 warp_pixel(const Vec2& pixel, double range, const RigidTransform& target_to_context,
                const CameraModel& target, const CameraModel& context);

enum class RayConvention { Conventional, Global };

/// Per-pixel rays, row-major. Pixels outside the unprojection domain carry a
/// zero direction and valid = 0.
struct RayBundle {
  RayConvention convention = RayConvention::Conventional;
  int width = 0;
  int height = 0;
  Vec3 origin = Vec3::Zero();
  std::vector<Vec3> directions;
  std::vector<unsigned char> valid;
};

/// Conventional rays are unit directions in the world frame from the camera
/// center. Global rays use the extrinsics [R_j | t_j] (inverse of the pose):
/// origin -R_j t_j, direction (K R_j)^-1 [u, v, 1]^T + t_j, unnormalized.
RayBundle generate_rays(const CameraModel& model, const Pose& pose, const ImageGeometry& geom,
                        RayConvention convention = RayConvention::Conventional);

/// K frequencies equally spaced on [1, max_frequency / 2].
std::vector<double> fourier_frequencies(int count, double max_frequency);

/// [x, sin(f1 pi x), cos(f1 pi x), ..., sin(fK pi x), cos(fK pi x)].
std::vector<double> fourier_encode(double x, const std::vector<double>& frequencies);

/// For each destination pixel, the source pixel observing the same ray.
struct RectifyMap {
  int width = 0;
  int height = 0;
  std::vector<Vec2> source;
  std::vector<unsigned char> valid;
};

/// `dst` must be a pinhole model. Throws InvalidArgument otherwise.
RectifyMap rectify_map(const CameraModel& src, const CameraModel& dst, const ImageGeometry& geom);

/// Bilinear resampling of `src` through `map`; invalid or out-of-bounds
/// pixels receive `fill`.
ImageD remap(const ImageD& src, const RectifyMap& map, double fill = 0.0);

}  // namespace fieldfuse
