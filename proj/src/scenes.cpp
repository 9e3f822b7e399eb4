// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/scenes.hpp"

#include "fieldfuse/error.hpp"
#include "fieldfuse/random.hpp"

namespace fieldfuse {

Primitive transform_primitive(const Primitive& p, const SimTransform& t) {
  Primitive out = p;
  out.center = t.apply(p.center);
  out.radius = p.radius * t.scale;
  out.rotation = t.rotation * p.rotation;
  out.half_extents = p.half_extents * t.scale;
  out.stddev = p.stddev * t.scale;
  // Optical depth is preserved, so density scales inversely with length.
  out.sigma = p.sigma / t.scale;
  return out;
}

Field transform_field(const Field& field, const SimTransform& t) {
  Field out;
  out.background = field.background;
  out.primitives.reserve(field.primitives.size());
  for (const auto& p : field.primitives) out.primitives.push_back(transform_primitive(p, t));
  return out;
}

Pose look_at_pose(const Vec3& eye, const Vec3& target) {
  return Pose{RigidTransform{look_at_rotation(eye, target), eye}};
}

Field make_random_scene(std::uint64_t seed, int count) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "random scene needs at least one primitive");
  Rng rng(derive_seed(seed, 0x5ce7e));
  Field f;
  f.background = Vec3(uniform(rng, 0.0, 0.3), uniform(rng, 0.0, 0.3), uniform(rng, 0.0, 0.3));
  for (int i = 0; i < count; ++i) {
    const Vec3 c(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const Vec3 color(uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1));
    const double sigma = uniform(rng, 5.0, 50.0);
    const int shape = static_cast<int>(rng() % 3);
    if (shape == 0) {
      f.primitives.push_back(Primitive::sphere(c, uniform(rng, 0.1, 0.4), sigma, color));
    } else if (shape == 1) {
      const Vec3 h(uniform(rng, 0.05, 0.3), uniform(rng, 0.05, 0.3), uniform(rng, 0.05, 0.3));
      f.primitives.push_back(Primitive::box(c, h, sigma, color, random_rotation(rng)));
    } else {
      f.primitives.push_back(Primitive::gaussian(c, uniform(rng, 0.05, 0.25), sigma, color));
    }
  }
  return f;
}

TwoFieldScene make_two_field_scene(int resolution) {
  if (resolution < 8) throw Error(ErrorCode::InvalidArgument, "two-field scene needs resolution >= 8");
  const Vec3 background(0.2, 0.2, 0.2);
  const double radius = 0.3, sigma = 30.0;
  struct Ball {
    Vec3 center;
    Vec3 color;
  };
  const Ball balls[] = {
      {Vec3(-1.5, 0.0, 0.4), Vec3(0.9, 0.15, 0.1)},
      {Vec3(-0.8, 0.0, -0.3), Vec3(0.1, 0.8, 0.2)},
      {Vec3(0.8, 0.0, 0.3), Vec3(0.15, 0.25, 0.9)},
      {Vec3(1.5, 0.0, -0.4), Vec3(0.95, 0.85, 0.1)},
  };

  TwoFieldScene s;
  s.truth.background = background;
  for (const auto& b : balls) s.truth.primitives.push_back(Primitive::sphere(b.center, radius, sigma, b.color));

  // Global-frame content of a field that is faithful where sign(x) == side.
  auto degraded = [&](double side) {
    Field f;
    f.background = background;
    for (const auto& b : balls) {
      const bool near = b.center.x() * side > 0.0;
      const Vec3 color = near ? b.color : Vec3(1.0, 1.0, 1.0) - b.color;
      f.primitives.push_back(Primitive::sphere(b.center, radius, sigma, color));
    }
    f.primitives.push_back(Primitive::sphere(Vec3(-side * 1.1, -1.6, 0.1 * side), 0.35, 6.0, Vec3(0.9, 0.1, 0.9)));
    f.primitives.push_back(Primitive::gaussian(Vec3(-side * 1.0, 0.0, 0.0), 0.5, 1.5, Vec3(0.6, 0.6, 0.6)));
    return f;
  };

  const SimTransform a_to_global{1.0, Mat3::Identity(), Vec3(-1.0, 0.0, 0.0)};
  const SimTransform b_to_global{0.8, rot_z(deg2rad(90.0)), Vec3(1.0, 0.0, 0.0)};
  s.fields.push_back({transform_field(degraded(-1.0), inverse(a_to_global)), a_to_global});
  s.fields.push_back({transform_field(degraded(1.0), inverse(b_to_global)), b_to_global});

  s.geom = {resolution, resolution};
  const double f = 0.6 * resolution;
  s.camera = CameraModel::pinhole(f, f, 0.5 * (resolution - 1), 0.5 * (resolution - 1));
  for (double z : {-0.6, 0.0, 0.6}) s.views.push_back(look_at_pose(Vec3(0.0, -3.0, z), Vec3::Zero()));
  s.views.push_back(look_at_pose(Vec3(0.0, 3.0, 0.2), Vec3::Zero()));
  s.render = RenderOptions{256, 0.02, 6.0, 0.3};
  return s;
}

RoomScene make_room_scene(int resolution) {
  if (resolution < 4) throw Error(ErrorCode::InvalidArgument, "room scene needs resolution >= 4");
  RoomScene s;
  s.half_size = 1.5;
  const double wall = 0.1;  // half thickness
  const double reach = s.half_size + 2.0 * wall;
  const double sigma = 50.0;
  s.field.background = Vec3(0.0, 0.0, 0.0);
  const Vec3 colors[] = {Vec3(0.8, 0.3, 0.3), Vec3(0.3, 0.8, 0.3), Vec3(0.3, 0.3, 0.8),
                         Vec3(0.8, 0.8, 0.3), Vec3(0.3, 0.8, 0.8), Vec3(0.8, 0.3, 0.8)};
  int k = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (double side : {-1.0, 1.0}) {
      Vec3 c = Vec3::Zero();
      c[axis] = side * (s.half_size + wall);
      Vec3 h = Vec3::Constant(reach);
      h[axis] = wall;
      s.field.primitives.push_back(Primitive::box(c, h, sigma, colors[k++]));
    }
  }
  s.sphere_center = Vec3::Zero();
  s.sphere_radius = 0.4;
  s.field.primitives.push_back(Primitive::sphere(s.sphere_center, s.sphere_radius, 60.0, Vec3(0.9, 0.9, 0.9)));
  s.geom = {resolution, resolution};
  const double f = 0.5 * resolution;
  s.camera = CameraModel::pinhole(f, f, 0.5 * (resolution - 1), 0.5 * (resolution - 1));
  s.render = RenderOptions{256, 0.02, 6.0, 0.3};
  return s;
}

}  // namespace fieldfuse
