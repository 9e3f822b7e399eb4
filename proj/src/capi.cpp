// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/fieldfuse.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "fieldfuse/camera.hpp"
#include "fieldfuse/commands.hpp"
#include "fieldfuse/error.hpp"
#include "fieldfuse/field.hpp"
#include "fieldfuse/register.hpp"
#include "fieldfuse/serialize.hpp"

struct ff_camera {
  fieldfuse::CameraModel model;
};

struct ff_field {
  fieldfuse::Field field;
};

namespace {

using fieldfuse::ErrorCode;

thread_local std::string g_last_error;

ff_status fail(ff_status s, const char* msg) {
  g_last_error = msg;
  return s;
}

template <typename F>
ff_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return FF_OK;
  } catch (const fieldfuse::Error& e) {
    return fail(static_cast<ff_status>(static_cast<int>(e.code())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(FF_INVALID_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FF_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FF_INTERNAL, e.what());
  } catch (...) {
    return fail(FF_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* msg) {
  if (!ok) throw fieldfuse::Error(ErrorCode::InvalidArgument, msg);
}

fieldfuse::Vec3 vec3(const double* p) { return {p[0], p[1], p[2]}; }

}  // namespace

extern "C" {

const char* ff_version(void) { return "0.1.0"; }

const char* ff_status_name(ff_status status) {
  return fieldfuse::error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
}

const char* ff_last_error(void) { return g_last_error.c_str(); }

void ff_string_free(char* s) { std::free(s); }

ff_status ff_camera_create(ff_camera_kind kind, const double* params, size_t count, ff_camera** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = nullptr;
    require(kind >= FF_CAMERA_PINHOLE && kind <= FF_CAMERA_DS, "unknown camera kind");
    const auto k = static_cast<fieldfuse::CameraKind>(static_cast<int>(kind));
    require(params != nullptr && count == static_cast<size_t>(fieldfuse::param_count(k)), "wrong parameter count");
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(params, static_cast<Eigen::Index>(count));
    auto model = fieldfuse::CameraModel::from_params(k, p);
    model.validate();
    *out = new ff_camera{model};
  });
}

ff_status ff_camera_from_json(const char* json, ff_camera** out) {
  return guarded([&] {
    require(out != nullptr && json != nullptr, "null argument");
    *out = nullptr;
    const auto model = fieldfuse::camera_from_json(fieldfuse::parse_json(json, "camera"));
    *out = new ff_camera{model};
  });
}

void ff_camera_destroy(ff_camera* camera) { delete camera; }

ff_status ff_camera_params(const ff_camera* camera, double* params, size_t capacity, size_t* count) {
  return guarded([&] {
    require(camera != nullptr, "camera must not be null");
    const Eigen::VectorXd p = camera->model.params();
    if (count) *count = static_cast<size_t>(p.size());
    require(params == nullptr || capacity >= static_cast<size_t>(p.size()), "parameter buffer too small");
    if (params)
      for (Eigen::Index i = 0; i < p.size(); ++i) params[i] = p[i];
  });
}

ff_status ff_camera_project(const ff_camera* camera, const double point[3], double pixel[2]) {
  return guarded([&] {
    require(camera && point && pixel, "null argument");
    const auto uv = fieldfuse::project(camera->model, vec3(point));
    pixel[0] = uv.x();
    pixel[1] = uv.y();
  });
}

ff_status ff_camera_unproject(const ff_camera* camera, const double pixel[2], double range, double point[3]) {
  return guarded([&] {
    require(camera && pixel && point, "null argument");
    const auto p = fieldfuse::unproject(camera->model, {pixel[0], pixel[1]}, range);
    for (int i = 0; i < 3; ++i) point[i] = p[i];
  });
}

ff_status ff_camera_jacobians(const ff_camera* camera, const double point[3], double d_point[6], double* d_params,
                              size_t capacity) {
  return guarded([&] {
    require(camera && point, "null argument");
    const auto j = fieldfuse::project_jacobians(camera->model, vec3(point));
    if (d_point)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) d_point[r * 3 + c] = j.d_point(r, c);
    if (d_params) {
      const auto cols = j.d_params.cols();
      require(capacity >= static_cast<size_t>(2 * cols), "jacobian buffer too small");
      for (int r = 0; r < 2; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) d_params[r * cols + c] = j.d_params(r, c);
    }
  });
}

ff_status ff_field_from_json(const char* json, ff_field** out) {
  return guarded([&] {
    require(out != nullptr && json != nullptr, "null argument");
    *out = nullptr;
    auto field = fieldfuse::field_from_json(fieldfuse::parse_json(json, "scene"));
    *out = new ff_field{std::move(field)};
  });
}

void ff_field_destroy(ff_field* field) { delete field; }

ff_status ff_field_render_ray(const ff_field* field, const double origin[3], const double direction[3], double t_near,
                              double t_far, int samples, double rgb[3], double* depth, double* accumulation) {
  return guarded([&] {
    require(field && origin && direction && rgb, "null argument");
    const fieldfuse::Ray ray{vec3(origin), vec3(direction)};
    const auto s = fieldfuse::sample_ray(field->field, ray, t_near, t_far, samples);
    const auto r = fieldfuse::render_ray(s, field->field.background);
    for (int i = 0; i < 3; ++i) rgb[i] = r.color[i];
    if (depth) *depth = r.depth;
    if (accumulation) *accumulation = r.accumulation;
  });
}

ff_status ff_field_render(const ff_field* field, const ff_camera* camera, int width, int height,
                          const double rotation[9], const double translation[3], int samples, double t_near,
                          double t_far, double qd_cutoff, double* rgb, double* mean_distant_accumulation) {
  return guarded([&] {
    require(field && camera && rotation && translation && rgb, "null argument");
    require(width > 0 && height > 0, "image size must be positive");
    fieldfuse::Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = rotation[i * 3 + j];
    require(fieldfuse::is_rotation(r, 1e-6), "pose rotation is not orthonormal");
    const fieldfuse::Pose pose{{fieldfuse::nearest_rotation(r), vec3(translation)}};
    const fieldfuse::RenderOptions options{samples, t_near, t_far, qd_cutoff};
    const auto img = fieldfuse::render_image(field->field, camera->model, pose, {width, height}, options);
    std::memcpy(rgb, img.color.data.data(), img.color.data.size() * sizeof(double));
    if (mean_distant_accumulation) *mean_distant_accumulation = img.mean_distant_accumulation;
  });
}

ff_status ff_register_json(const char* correspondences_json, char** result_json) {
  return guarded([&] {
    require(correspondences_json && result_json, "null argument");
    *result_json = nullptr;
    const auto data = fieldfuse::pose_correspondences_from_json(fieldfuse::parse_json(correspondences_json, "correspondences"));
    const auto r = fieldfuse::solve_frame_transform(data);
    *result_json = dup_string(fieldfuse::registration_to_json(r).dump());
  });
}

ff_status ff_run_command(const char* name, const char* config_json, uint64_t seed, const char* out_dir,
                         char** report_json) {
  return guarded([&] {
    require(name && out_dir, "null argument");
    if (report_json) *report_json = nullptr;
    fieldfuse::Json config;
    if (config_json && *config_json) config = fieldfuse::parse_json(config_json, "config");
    const auto report = fieldfuse::run_command(name, config, seed, out_dir);
    if (report_json) *report_json = dup_string(report.dump(2));
  });
}

}  // extern "C"
