// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/augment.hpp"

#include <cmath>
#include <limits>

#include "fieldfuse/error.hpp"
#include "fieldfuse/random.hpp"

namespace fieldfuse {

PoseSet sample_hemisphere_poses(std::size_t n, std::uint64_t seed, const HemisphereConfig& config) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one pose");
  if (!(config.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "hemisphere radius must be positive");
  Rng rng(seed);
  PoseSet set;
  set.poses.reserve(n);
  const double z_below = std::sin(config.below_min_elevation);
  for (std::size_t i = 0; i < n; ++i) {
    const bool below = config.below_fraction > 0.0 && uniform(rng, 0.0, 1.0) < config.below_fraction;
    // Uniform on the sphere means uniform in z.
    const double z = below ? uniform(rng, z_below, 0.0) : uniform(rng, 0.0, 1.0);
    const double phi = uniform(rng, 0.0, 2.0 * kPi);
    const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 center = config.radius * Vec3(rxy * std::cos(phi), rxy * std::sin(phi), z);
    Pose pose;
    pose.world_from_camera.translation = center;
    pose.world_from_camera.rotation = look_at_rotation(center, Vec3::Zero());
    set.poses.push_back(pose);
  }
  return set;
}

Pose make_virtual_camera(const Pose& base, const Vec3& cloud_center, const JitterConfig& config) {
  Rng rng(derive_seed(config.seed, 0x7669727475616cull));
  const Vec3 eps_v = normal_vec3(rng, config.sigma_v);
  const Vec3 eps_c = normal_vec3(rng, config.sigma_v);
  Pose out;
  out.world_from_camera.translation = base.center() + eps_v;
  out.world_from_camera.rotation = look_at_rotation(out.center(), cloud_center + eps_c);
  return out;
}

SparseView project_cloud_to_view(const std::vector<ColoredPoint>& cloud, const Pose& view, const CameraModel& model,
                                 const ImageGeometry& geom) {
  SparseView out;
  out.color = ImageD(geom.width, geom.height, 3);
  out.depth = ImageD(geom.width, geom.height, 1);
  out.valid.assign(out.depth.pixel_count(), 0);
  std::vector<double> zbuf(out.depth.pixel_count(), std::numeric_limits<double>::infinity());
  const RigidTransform camera_from_world = view.world_from_camera.inverse();
  for (const auto& p : cloud) {
    const Vec3 pc = camera_from_world.apply(p.position);
    const auto px = try_project(model, pc);
    if (!px) continue;
    const long u = std::lround(px->x());
    const long v = std::lround(px->y());
    if (u < 0 || v < 0 || u >= geom.width || v >= geom.height) continue;
    const std::size_t i = static_cast<std::size_t>(v) * geom.width + static_cast<std::size_t>(u);
    const double range = pc.norm();
    if (range >= zbuf[i]) continue;
    zbuf[i] = range;
    out.valid[i] = 1;
    out.depth.data[i] = range;
    for (int c = 0; c < 3; ++c) out.color.data[3 * i + c] = p.color[c];
  }
  return out;
}

RigidTransform draw_jitter(const JitterConfig& config) {
  Rng rng(derive_seed(config.seed, 0x6a6974746572ull));
  const Vec3 eps_t = normal_vec3(rng, config.sigma_t);
  const Vec3 eps_r = normal_vec3(rng, config.sigma_r);
  RigidTransform t;
  t.rotation = euler_xyz(eps_r);
  t.translation = eps_t;
  return t;
}

PoseSet canonical_jitter(const PoseSet& set, const JitterConfig& config) {
  const RigidTransform jitter = draw_jitter(config);
  PoseSet out = set;
  for (auto& pose : out.poses) pose.world_from_camera = jitter * pose.world_from_camera;
  return out;
}

PoseSet canonicalize(const PoseSet& set, std::size_t index) {
  if (index >= set.poses.size()) throw Error(ErrorCode::InvalidArgument, "canonical index out of range");
  // On camera-from-world extrinsics E this is E_i' = E_i E_o^-1; for the
  // stored world-from-camera poses W it reads W_i' = W_o^-1 W_i.
  const RigidTransform inv = set.poses[index].world_from_camera.inverse();
  PoseSet out = set;
  out.canonical = index;
  for (std::size_t i = 0; i < out.poses.size(); ++i) {
    out.poses[i].world_from_camera = i == index ? RigidTransform::identity() : inv * set.poses[i].world_from_camera;
  }
  return out;
}

PoseSet canonical_randomize(const PoseSet& set, std::uint64_t seed) {
  if (set.poses.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one pose");
  Rng rng(derive_seed(seed, 0x63616e6f6eull));
  std::uniform_int_distribution<std::size_t> pick(0, set.poses.size() - 1);
  return canonicalize(set, pick(rng));
}

}  // namespace fieldfuse
