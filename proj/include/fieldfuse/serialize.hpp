// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fieldfuse/blend.hpp"
#include "fieldfuse/calib.hpp"
#include "fieldfuse/camera.hpp"
#include "fieldfuse/error.hpp"
#include "fieldfuse/field.hpp"
#include "fieldfuse/geometry.hpp"
#include "fieldfuse/metrics.hpp"
#include "fieldfuse/register.hpp"

namespace fieldfuse {

using Json = nlohmann::json;

// Malformed input surfaces as Error(InvalidConfig) from every reader below.

Json vec_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vec_from_json(const Json& j);
Json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j);
/// Row-major, 9 numbers. Reading re-orthonormalizes.
Json mat3_to_json(const Mat3& m);
Mat3 mat3_from_json(const Json& j);

Json rigid_to_json(const RigidTransform& t);
RigidTransform rigid_from_json(const Json& j);
Json sim_to_json(const SimTransform& t);
SimTransform sim_from_json(const Json& j);
Json pose_to_json(const Pose& pose);
Pose pose_from_json(const Json& j);

/// Model parameters plus optional image size; parameters a kind does not use
/// are omitted.
Json camera_to_json(const CameraModel& model, const std::optional<ImageGeometry>& geom = std::nullopt);
CameraModel camera_from_json(const Json& j);
std::optional<ImageGeometry> geometry_from_json(const Json& j);

Json primitive_to_json(const Primitive& p);
Primitive primitive_from_json(const Json& j);
Json field_to_json(const Field& field);
Field field_from_json(const Json& j);

/// {"fields": [{"scene": ..., "transform": sim}, ...]}
Json registered_fields_to_json(const std::vector<RegisteredField>& fields);
std::vector<RegisteredField> registered_fields_from_json(const Json& j);

/// One JSON object per line: point, pixel, pose_id and optionally the pose.
std::string correspondences_to_jsonl(const std::vector<Correspondence>& data, bool with_pose);
/// Lines without a pose take it from `poses` by pose_id.
std::vector<Correspondence> correspondences_from_jsonl(const std::string& text, const std::vector<Pose>& poses);

/// {"poses": [{"id": i, "rotation": ..., "translation": ...}], "canonical": o}
/// plus an optional provenance object.
Json trajectory_to_json(const std::vector<Pose>& poses, std::size_t canonical = 0,
                        const Json& provenance = Json());
/// Accepts the object form or a bare list of poses; poses are ordered by id.
std::vector<Pose> trajectory_from_json(const Json& j);

Json pose_correspondences_to_json(const std::vector<PoseCorrespondence>& data);
std::vector<PoseCorrespondence> pose_correspondences_from_json(const Json& j);

Json render_options_to_json(const RenderOptions& o);
RenderOptions render_options_from_json(const Json& j, RenderOptions base = {});
SolverOptions solver_options_from_json(const Json& j, SolverOptions base = {});

Json calib_result_to_json(const CalibResult& r);
Json registration_to_json(const RegistrationResult& r);
Json registration_errors_to_json(const RegistrationErrors& e);
Json image_metrics_to_json(const ImageMetrics& m);
Json depth_metrics_to_json(const DepthMetrics& m);

/// Parses text, mapping syntax errors to InvalidConfig.
Json parse_json(const std::string& text, const std::string& what);

/// j[key] converted to T, or `fallback` when j is null or lacks the key.
template <typename T>
T config_value(const Json& j, const std::string& key, T fallback) {
  if (j.is_null() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::InvalidConfig, "config field '" + key + "' has the wrong type");
  }
}

}  // namespace fieldfuse
