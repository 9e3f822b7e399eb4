// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "fieldfuse/camera.hpp"
#include "fieldfuse/field.hpp"
#include "fieldfuse/geometry.hpp"
#include "fieldfuse/image.hpp"

namespace fieldfuse {

/// A field placed in the global frame. Its center is the image of its local
/// origin.
struct RegisteredField {
  Field field;
  SimTransform to_global;

  Vec3 center() const { return to_global.translation; }
};

enum class BlendMethod { Nearest, IDW2D, IDW3D, IDWSample };

const char* blend_method_name(BlendMethod method);
BlendMethod blend_method_from_name(const std::string& name);

struct BlendConfig {
  BlendMethod method = BlendMethod::IDWSample;
  double gamma = 10.0;
  double tau = 1.2;
  RenderOptions render;  // t range in global units; qd_cutoff is reported only

  void validate() const;
};

/// Indices of fields whose center distance to the camera is within `tau`
/// times the closest one, ordered by distance.
std::vector<std::size_t> proximity_test(const Vec3& camera_center, std::span<const Vec3> field_centers, double tau);

/// w_i = d_i^-gamma / sum_j d_j^-gamma, computed in log space. Any zero
/// distance takes all the weight (shared equally among zero distances).
std::vector<double> idw_weights(std::span<const double> distances, double gamma);

/// A ray segment carrying termination mass and color for one field.
struct MassSample {
  double t = 0.0;
  double delta = 0.0;
  double mass = 0.0;
  Vec3 color = Vec3::Zero();
};

std::vector<MassSample> to_mass_samples(std::span<const RaySample> samples, std::span<const double> masses);

struct MergedSample {
  double t = 0.0;
  double delta = 0.0;
  std::vector<double> mass;            // per field
  std::vector<Vec3> color;             // per field, zero when uncovered
  std::vector<unsigned char> covered;  // per field
};

/// Union of all segment boundaries. Each field's mass is spread over the
/// merged pieces in proportion to overlap length; colors are copied. Pieces
/// covered by no field are dropped.
std::vector<MergedSample> merge_samples(const std::vector<std::vector<MassSample>>& per_field);

struct SampleBlend {
  Vec3 color = Vec3::Zero();
  bool zero_mass = false;
  /// Final weights w_{i,k}; the last row is the background sample.
  std::vector<std::vector<double>> weights;
  /// sum_k sum_i w_{i,k} pbar_{i,k} after both normalization steps.
  double weighted_mass = 0.0;
};

/// Sample-level IDW blend of one ray. The per-field residual transmittance
/// enters as a final sample at infinite distance carrying that field's
/// background color, where all IDW weights are equal.
SampleBlend blend_ray_idw_sample(const std::vector<MergedSample>& merged, std::span<const Vec3> field_centers,
                                 const Ray& ray, double gamma, std::span<const Vec3> backgrounds);

/// Samples and volumetric render of a registered field along a global-frame
/// ray with unit direction. Sample t and delta are in global units.
struct FieldRay {
  std::vector<MassSample> samples;
  RenderResult render;
};
FieldRay render_field_ray(const RegisteredField& field, const Ray& global_ray, const RenderOptions& options);

struct BlendedImage {
  ImageD color;
  std::vector<std::size_t> fields_used;  // proximity survivors
  std::size_t zero_mass_pixels = 0;
};

BlendedImage blend_image(std::span<const RegisteredField> fields, const CameraModel& model, const Pose& pose,
                         const ImageGeometry& geom, const BlendConfig& config);

/// Per-field renders through the global camera (no blending).
std::vector<ImageD> render_fields(std::span<const RegisteredField> fields, const CameraModel& model, const Pose& pose,
                                  const ImageGeometry& geom, const RenderOptions& options);

}  // namespace fieldfuse
