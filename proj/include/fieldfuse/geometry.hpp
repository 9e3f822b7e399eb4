// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fieldfuse {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rigid motion x -> R x + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;
  RigidTransform operator*(const RigidTransform& rhs) const;
};

/// Similarity x -> s R x + t, with s > 0.
///
/// A frame map T_BA carries a point expressed in frame B to frame A.
struct SimTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static SimTransform identity() { return {}; }
  static SimTransform from_rigid(const RigidTransform& t) { return {1.0, t.rotation, t.translation}; }

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

SimTransform compose(const SimTransform& a, const SimTransform& b);
SimTransform inverse(const SimTransform& t);
inline Vec3 apply(const SimTransform& t, const Vec3& p) { return t.apply(p); }

/// Camera pose stored world-from-camera; the camera center is the translation.
struct Pose {
  RigidTransform world_from_camera;

  const Vec3& center() const { return world_from_camera.translation; }
  const Mat3& rotation() const { return world_from_camera.rotation; }
};

/// Angle of R_a^T R_b in degrees, in [0, 180].
double rotation_geodesic_deg(const Mat3& a, const Mat3& b);

/// Nearest rotation in the Frobenius sense (polar projection, det forced to +1).
Mat3 nearest_rotation(const Mat3& m);

bool is_rotation(const Mat3& m, double tol = 1e-9);

Mat3 rot_x(double rad);
Mat3 rot_y(double rad);
Mat3 rot_z(double rad);

/// Intrinsic XYZ Euler angles: R = Rx(a) * Ry(b) * Rz(c).
Mat3 euler_xyz(const Vec3& angles);

/// World-from-camera rotation for a camera at `eye` looking at `target`
/// (camera axes: +x right, +y down, +z forward). Up is world +z, falling back
/// to +x when the view direction is parallel to it.
Mat3 look_at_rotation(const Vec3& eye, const Vec3& target);

constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace fieldfuse
