// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "fieldfuse/error.hpp"

namespace fieldfuse {

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

SimTransform compose(const SimTransform& a, const SimTransform& b) {
  // a(b(p)) = sa Ra (sb Rb p + tb) + ta
  SimTransform out;
  out.scale = a.scale * b.scale;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.scale * (a.rotation * b.translation) + a.translation;
  return out;
}

SimTransform inverse(const SimTransform& t) {
  SimTransform out;
  out.scale = 1.0 / t.scale;
  out.rotation = t.rotation.transpose();
  out.translation = -out.scale * (out.rotation * t.translation);
  return out;
}

double rotation_geodesic_deg(const Mat3& a, const Mat3& b) {
  // arccos((tr - 1) / 2) evaluated as atan2(sin, cos): same angle, but no
  // loss of precision near 0 and 180 degrees.
  const Mat3 r = a.transpose() * b;
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double s = 0.5 * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)).norm();
  return rad2deg(std::atan2(s, c));
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

bool is_rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  const Mat3 e = m.transpose() * m - Mat3::Identity();
  return e.cwiseAbs().maxCoeff() <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Mat3 rot_x(double rad) { return Eigen::AngleAxisd(rad, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_y(double rad) { return Eigen::AngleAxisd(rad, Vec3::UnitY()).toRotationMatrix(); }
Mat3 rot_z(double rad) { return Eigen::AngleAxisd(rad, Vec3::UnitZ()).toRotationMatrix(); }

Mat3 euler_xyz(const Vec3& angles) { return rot_x(angles.x()) * rot_y(angles.y()) * rot_z(angles.z()); }

Mat3 look_at_rotation(const Vec3& eye, const Vec3& target) {
  const Vec3 diff = target - eye;
  if (diff.norm() < 1e-9) throw Error(ErrorCode::DegenerateLookAt, "look-at target coincides with the eye");
  const Vec3 forward = diff.normalized();
  Vec3 up = Vec3::UnitZ();
  Vec3 up_orth = up - up.dot(forward) * forward;
  if (up_orth.norm() < 1e-9) {
    up = Vec3::UnitX();
    up_orth = up - up.dot(forward) * forward;
  }
  const Vec3 down = -up_orth.normalized();
  const Vec3 right = down.cross(forward);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return r;
}

}  // namespace fieldfuse
