// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "fieldfuse/camera.hpp"
#include "fieldfuse/geometry.hpp"
#include "fieldfuse/image.hpp"

namespace fieldfuse {

struct PoseSet {
  std::vector<Pose> poses;
  std::size_t canonical = 0;
};

struct JitterConfig {
  double sigma_t = 0.0;  // translation std, scene units
  double sigma_r = 0.0;  // rotation std per Euler angle, radians
  double sigma_v = 0.0;  // virtual camera translation std (also perturbs the look-at target)
  std::uint64_t seed = 0;
};

struct HemisphereConfig {
  double radius = 1.0;
  /// Fraction of poses drawn from the band just below the equator.
  double below_fraction = 0.0;
  /// Lowest elevation (radians, negative) for the below-equator band.
  double below_min_elevation = -0.2;
};

/// Centers uniform on the upper hemisphere of the given radius around the
/// origin, each camera looking at the origin with world +z as up.
PoseSet sample_hemisphere_poses(std::size_t n, std::uint64_t seed, const HemisphereConfig& config = {});

/// Base center moved by N(0, sigma_v) noise, looking at the cloud center
/// moved by independent N(0, sigma_v) noise. Throws DegenerateLookAt.
Pose make_virtual_camera(const Pose& base, const Vec3& cloud_center, const JitterConfig& config);

struct ColoredPoint {
  Vec3 position = Vec3::Zero();  // world frame
  Vec3 color = Vec3::Zero();
};

struct SparseView {
  ImageD color;  // 3 channels
  ImageD depth;  // camera-frame range, 0 where empty
  std::vector<unsigned char> valid;
};

/// Z-buffered splat of the cloud into the view: each point lands on its
/// nearest pixel center and the smallest range wins.
SparseView project_cloud_to_view(const std::vector<ColoredPoint>& cloud, const Pose& view, const CameraModel& model,
                                 const ImageGeometry& geom);

/// Draws one transform T0' from (sigma_t, sigma_r) and left-composes every
/// pose with it.
PoseSet canonical_jitter(const PoseSet& set, const JitterConfig& config);

/// The jitter transform canonical_jitter would draw for this config.
RigidTransform draw_jitter(const JitterConfig& config);

/// Re-expresses poses relative to a random canonical index o, which lands at
/// the identity. Camera-to-camera transforms W_i^-1 W_j are unchanged.
PoseSet canonical_randomize(const PoseSet& set, std::uint64_t seed);
PoseSet canonicalize(const PoseSet& set, std::size_t index);

}  // namespace fieldfuse
