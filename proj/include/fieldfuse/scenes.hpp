// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "fieldfuse/blend.hpp"
#include "fieldfuse/camera.hpp"
#include "fieldfuse/field.hpp"

namespace fieldfuse {

/// The primitive as seen after mapping space through `t`. Gradient color axes
/// are kept as given.
Primitive transform_primitive(const Primitive& p, const SimTransform& t);
Field transform_field(const Field& field, const SimTransform& t);

/// `count` random spheres, boxes and gaussians inside [-1, 1]^3.
Field make_random_scene(std::uint64_t seed, int count);

/// Four spheres on the x axis and two fields that each reconstruct only their
/// own half well: on the far half a field has wrong colors and a floater.
/// Field A sits at x = -1 and field B at x = +1 with its own rotation and
/// scale. Test views look at the origin from the x = 0 midline.
struct TwoFieldScene {
  Field truth;
  std::vector<RegisteredField> fields;
  CameraModel camera;
  ImageGeometry geom;
  std::vector<Pose> views;
  RenderOptions render;
};

TwoFieldScene make_two_field_scene(int resolution);

/// Closed box room with an opaque sphere in the middle.
struct RoomScene {
  Field field;
  Vec3 sphere_center = Vec3::Zero();
  double sphere_radius = 0.0;
  double half_size = 0.0;  // interior half-width of the room
  CameraModel camera;
  ImageGeometry geom;
  RenderOptions render;
};

RoomScene make_room_scene(int resolution);

/// Camera at `eye` looking at `target`.
Pose look_at_pose(const Vec3& eye, const Vec3& target);

}  // namespace fieldfuse
