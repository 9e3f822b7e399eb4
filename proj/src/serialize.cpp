// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fieldfuse/error.hpp"

namespace fieldfuse {
namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

double number(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) bad(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number()) bad(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

std::vector<double> numbers(const Json& j, std::size_t expected, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array");
  if (expected != 0 && j.size() != expected)
    bad(std::string(what) + " must have " + std::to_string(expected) + " entries");
  std::vector<double> out;
  out.reserve(j.size());
  for (const Json& v : j) {
    if (!v.is_number()) bad(std::string(what) + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

const Json& member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    bad("cannot parse " + what + ": " + e.what());
  }
}

Json vec_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vec_from_json(const Json& j) {
  const auto values = numbers(j, 0, "vector");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) {
  const auto v = numbers(j, 3, "3-vector");
  return Vec3(v[0], v[1], v[2]);
}

Json mat3_to_json(const Mat3& m) {
  Json out = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  return out;
}

Mat3 mat3_from_json(const Json& j) {
  const auto v = numbers(j, 9, "rotation");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[static_cast<std::size_t>(r * 3 + c)];
  if (!m.allFinite()) bad("rotation must be finite");
  if (!is_rotation(m, 1e-6)) bad("rotation is not orthonormal");
  // Rounded input is snapped back; already-orthonormal input round-trips exactly.
  return is_rotation(m, 1e-12) ? m : nearest_rotation(m);
}

Json rigid_to_json(const RigidTransform& t) {
  return Json{{"rotation", mat3_to_json(t.rotation)}, {"translation", vec3_to_json(t.translation)}};
}

RigidTransform rigid_from_json(const Json& j) {
  RigidTransform t;
  t.rotation = j.contains("rotation") ? mat3_from_json(j.at("rotation")) : Mat3::Identity();
  t.translation = j.contains("translation") ? vec3_from_json(j.at("translation")) : Vec3::Zero();
  return t;
}

Json sim_to_json(const SimTransform& t) {
  return Json{{"scale", t.scale}, {"rotation", mat3_to_json(t.rotation)}, {"translation", vec3_to_json(t.translation)}};
}

SimTransform sim_from_json(const Json& j) {
  if (!j.is_object()) bad("transform must be an object");
  const RigidTransform r = rigid_from_json(j);
  const double s = number_or(j, "scale", 1.0);
  if (!(s > 0.0) || !std::isfinite(s)) bad("transform scale must be positive");
  return {s, r.rotation, r.translation};
}

Json pose_to_json(const Pose& pose) { return rigid_to_json(pose.world_from_camera); }

Pose pose_from_json(const Json& j) {
  if (!j.is_object()) bad("pose must be an object");
  return Pose{rigid_from_json(j)};
}

Json camera_to_json(const CameraModel& model, const std::optional<ImageGeometry>& geom) {
  Json j{{"kind", camera_kind_name(model.kind)}, {"fx", model.fx}, {"fy", model.fy}, {"cx", model.cx}, {"cy", model.cy}};
  if (model.kind != CameraKind::Pinhole) j["alpha"] = model.alpha;
  if (model.kind == CameraKind::EUCM) j["beta"] = model.beta;
  if (model.kind == CameraKind::DS) j["xi"] = model.xi;
  if (geom) {
    j["width"] = geom->width;
    j["height"] = geom->height;
  }
  return j;
}

CameraModel camera_from_json(const Json& j) {
  if (!j.is_object()) bad("camera must be an object");
  const Json& kind = member(j, "kind");
  if (!kind.is_string()) bad("camera kind must be a string");
  CameraModel m;
  try {
    m.kind = camera_kind_from_name(kind.get<std::string>());
  } catch (const Error& e) {
    bad(e.what());
  }
  m.fx = number(j, "fx");
  m.fy = number(j, "fy");
  m.cx = number(j, "cx");
  m.cy = number(j, "cy");
  m.alpha = m.kind == CameraKind::Pinhole ? 0.0 : number(j, "alpha");
  m.beta = m.kind == CameraKind::EUCM ? number(j, "beta") : 1.0;
  m.xi = m.kind == CameraKind::DS ? number(j, "xi") : 0.0;
  try {
    m.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return m;
}

std::optional<ImageGeometry> geometry_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("width") || !j.contains("height")) return std::nullopt;
  if (!j.at("width").is_number_integer() || !j.at("height").is_number_integer()) bad("width/height must be integers");
  ImageGeometry g{j.at("width").get<int>(), j.at("height").get<int>()};
  if (g.width <= 0 || g.height <= 0) bad("width/height must be positive");
  return g;
}

Json primitive_to_json(const Primitive& p) {
  Json params{{"center", vec3_to_json(p.center)}};
  const char* shape = "sphere";
  switch (p.shape) {
    case ShapeKind::Sphere:
      params["radius"] = p.radius;
      break;
    case ShapeKind::Box:
      shape = "box";
      params["half_extents"] = vec3_to_json(p.half_extents);
      params["rotation"] = mat3_to_json(p.rotation);
      break;
    case ShapeKind::Gaussian:
      shape = "gaussian";
      params["std"] = p.stddev;
      break;
  }
  Json color = p.color.gradient ? Json{{"from", vec3_to_json(p.color.color)},
                                       {"to", vec3_to_json(p.color.color_end)},
                                       {"axis", p.color.axis}}
                                : vec3_to_json(p.color.color);
  return Json{{"shape", shape}, {"params", params}, {"sigma", p.sigma}, {"color", color}};
}

Primitive primitive_from_json(const Json& j) {
  if (!j.is_object()) bad("primitive must be an object");
  const Json& shape = member(j, "shape");
  const Json& params = member(j, "params");
  if (!shape.is_string()) bad("primitive shape must be a string");
  Primitive p;
  const std::string name = shape.get<std::string>();
  p.center = vec3_from_json(member(params, "center"));
  if (name == "sphere") {
    p.shape = ShapeKind::Sphere;
    p.radius = number(params, "radius");
  } else if (name == "box") {
    p.shape = ShapeKind::Box;
    p.half_extents = vec3_from_json(member(params, "half_extents"));
    if (params.contains("rotation")) p.rotation = mat3_from_json(params.at("rotation"));
  } else if (name == "gaussian") {
    p.shape = ShapeKind::Gaussian;
    p.stddev = number(params, "std");
  } else {
    bad("unknown primitive shape '" + name + "'");
  }
  p.sigma = number(j, "sigma");
  const Json& color = member(j, "color");
  if (color.is_array()) {
    p.color.color = vec3_from_json(color);
  } else if (color.is_object()) {
    p.color.gradient = true;
    p.color.color = vec3_from_json(member(color, "from"));
    p.color.color_end = vec3_from_json(member(color, "to"));
    const Json& axis = member(color, "axis");
    if (!axis.is_number_integer()) bad("color axis must be 0, 1 or 2");
    p.color.axis = axis.get<int>();
  } else {
    bad("primitive color must be an array or a gradient object");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return p;
}

Json field_to_json(const Field& field) {
  Json prims = Json::array();
  for (const auto& p : field.primitives) prims.push_back(primitive_to_json(p));
  return Json{{"primitives", prims}, {"background", vec3_to_json(field.background)}};
}

Field field_from_json(const Json& j) {
  if (!j.is_object()) bad("scene must be an object");
  Field f;
  const Json& prims = member(j, "primitives");
  if (!prims.is_array()) bad("primitives must be an array");
  for (const Json& p : prims) f.primitives.push_back(primitive_from_json(p));
  if (j.contains("background")) f.background = vec3_from_json(j.at("background"));
  return f;
}

Json registered_fields_to_json(const std::vector<RegisteredField>& fields) {
  Json arr = Json::array();
  for (const auto& f : fields) arr.push_back(Json{{"scene", field_to_json(f.field)}, {"transform", sim_to_json(f.to_global)}});
  return Json{{"fields", arr}};
}

std::vector<RegisteredField> registered_fields_from_json(const Json& j) {
  const Json& arr = j.is_array() ? j : member(j, "fields");
  if (!arr.is_array() || arr.empty()) bad("fields must be a non-empty array");
  std::vector<RegisteredField> out;
  for (const Json& f : arr) {
    RegisteredField rf;
    rf.field = field_from_json(member(f, "scene"));
    rf.to_global = f.contains("transform") ? sim_from_json(f.at("transform")) : SimTransform::identity();
    out.push_back(std::move(rf));
  }
  return out;
}

std::string correspondences_to_jsonl(const std::vector<Correspondence>& data, bool with_pose) {
  std::string out;
  for (const auto& c : data) {
    Json j{{"point", vec3_to_json(c.world_point)},
           {"pixel", Json::array({c.pixel.x(), c.pixel.y()})},
           {"pose_id", c.pose_id}};
    if (with_pose) j["pose"] = pose_to_json(c.pose);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Correspondence> correspondences_from_jsonl(const std::string& text, const std::vector<Pose>& poses) {
  std::vector<Correspondence> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = parse_json(line, "correspondence line " + std::to_string(line_no));
    Correspondence c;
    c.world_point = vec3_from_json(member(j, "point"));
    const auto px = numbers(member(j, "pixel"), 2, "pixel");
    c.pixel = Vec2(px[0], px[1]);
    const Json& id = member(j, "pose_id");
    if (!id.is_number_integer()) bad("pose_id must be an integer");
    c.pose_id = id.get<int>();
    if (j.contains("pose")) {
      c.pose = pose_from_json(j.at("pose"));
    } else {
      if (c.pose_id < 0 || static_cast<std::size_t>(c.pose_id) >= poses.size())
        bad("pose_id " + std::to_string(c.pose_id) + " has no pose");
      c.pose = poses[static_cast<std::size_t>(c.pose_id)];
    }
    out.push_back(c);
  }
  return out;
}

Json trajectory_to_json(const std::vector<Pose>& poses, std::size_t canonical, const Json& provenance) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    Json p = pose_to_json(poses[i]);
    p["id"] = i;
    arr.push_back(p);
  }
  Json out{{"poses", arr}, {"canonical", canonical}};
  if (!provenance.is_null()) out["provenance"] = provenance;
  return out;
}

std::vector<Pose> trajectory_from_json(const Json& j) {
  const Json& arr = j.is_array() ? j : member(j, "poses");
  if (!arr.is_array()) bad("poses must be an array");
  std::vector<std::pair<long long, Pose>> items;
  long long next = 0;
  for (const Json& p : arr) {
    long long id = next;
    if (p.contains("id")) {
      if (!p.at("id").is_number_integer()) bad("pose id must be an integer");
      id = p.at("id").get<long long>();
    }
    items.emplace_back(id, pose_from_json(p));
    next = id + 1;
  }
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Pose> out;
  for (auto& [id, pose] : items) out.push_back(pose);
  return out;
}

Json pose_correspondences_to_json(const std::vector<PoseCorrespondence>& data) {
  Json arr = Json::array();
  for (const auto& c : data) {
    auto finite = [](const Pose& p) { return p.rotation().allFinite() && p.center().allFinite(); };
    // Non-finite poses are written as null so that they round-trip as unusable.
    arr.push_back(Json{{"local", finite(c.local) ? pose_to_json(c.local) : Json()},
                       {"shared", finite(c.shared) ? pose_to_json(c.shared) : Json()}});
  }
  return arr;
}

std::vector<PoseCorrespondence> pose_correspondences_from_json(const Json& j) {
  if (!j.is_array()) bad("pose correspondences must be an array");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Pose missing{RigidTransform{Mat3::Constant(nan), Vec3::Constant(nan)}};
  std::vector<PoseCorrespondence> out;
  for (const Json& c : j) {
    const Json& l = member(c, "local");
    const Json& s = member(c, "shared");
    out.push_back({l.is_null() ? missing : pose_from_json(l), s.is_null() ? missing : pose_from_json(s)});
  }
  return out;
}

Json render_options_to_json(const RenderOptions& o) {
  return Json{{"n_samples", o.n_samples}, {"t_near", o.t_near}, {"t_far", o.t_far}, {"qd_cutoff", o.qd_cutoff}};
}

RenderOptions render_options_from_json(const Json& j, RenderOptions base) {
  if (j.is_null()) return base;
  if (!j.is_object()) bad("render options must be an object");
  if (j.contains("n_samples")) {
    if (!j.at("n_samples").is_number_integer()) bad("n_samples must be an integer");
    base.n_samples = j.at("n_samples").get<int>();
  }
  base.t_near = number_or(j, "t_near", base.t_near);
  base.t_far = number_or(j, "t_far", base.t_far);
  base.qd_cutoff = number_or(j, "qd_cutoff", base.qd_cutoff);
  if (base.n_samples < 2 || !(base.t_near > 0.0) || !(base.t_far > base.t_near) || !(base.qd_cutoff >= 0.0))
    bad("render options out of range");
  return base;
}

SolverOptions solver_options_from_json(const Json& j, SolverOptions base) {
  if (j.is_null()) return base;
  if (!j.is_object()) bad("solver options must be an object");
  base.max_iterations = static_cast<int>(number_or(j, "max_iterations", base.max_iterations));
  base.lambda_initial = number_or(j, "lambda_initial", base.lambda_initial);
  base.lambda_factor = number_or(j, "lambda_factor", base.lambda_factor);
  base.relative_cost_tolerance = number_or(j, "relative_cost_tolerance", base.relative_cost_tolerance);
  base.gradient_tolerance = number_or(j, "gradient_tolerance", base.gradient_tolerance);
  if (j.contains("huber")) {
    if (!j.at("huber").is_boolean()) bad("huber must be a boolean");
    base.huber = j.at("huber").get<bool>();
  }
  base.huber_delta = number_or(j, "huber_delta", base.huber_delta);
  if (base.max_iterations < 1 || !(base.lambda_initial > 0.0) || !(base.lambda_factor > 1.0) || !(base.huber_delta > 0.0))
    bad("solver options out of range");
  return base;
}

Json calib_result_to_json(const CalibResult& r) {
  Json trace = Json::array();
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    Json step{{"iteration", i}, {"params", vec_to_json(r.trace[i])}};
    if (i < r.cost_trace.size()) step["cost"] = r.cost_trace[i];
    if (i < r.mre_trace.size()) step["mre"] = r.mre_trace[i];
    trace.push_back(step);
  }
  return Json{{"camera", camera_to_json(r.model)},
              {"params", vec_to_json(r.model.params())},
              {"mre", r.mre},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"status", error_code_name(r.status)},
              {"trace", trace}};
}

Json registration_to_json(const RegistrationResult& r) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(); };
  Json t = r.success ? sim_to_json(r.transform) : Json();
  return Json{{"transform", t},
              {"used", r.used},
              {"candidates", {{"scale", r.scale_candidates}, {"rotation", r.rotation_candidates}, {"translation", r.translation_candidates}}},
              {"dispersion", {{"scale_mad", num(r.scale_mad)}, {"rotation_mad_deg", num(r.rotation_mad_deg)}, {"translation_mad", num(r.translation_mad)}}},
              {"success", r.success}};
}

Json registration_errors_to_json(const RegistrationErrors& e) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(); };
  return Json{{"r_err_deg", num(e.rotation_deg)}, {"t_err", num(e.translation)}, {"s_err", num(e.scale)}, {"success", e.success}};
}

Json image_metrics_to_json(const ImageMetrics& m) {
  return Json{{"psnr", m.psnr}, {"ssim", m.ssim}, {"lpips", nullptr}};
}

Json depth_metrics_to_json(const DepthMetrics& m) {
  return Json{{"abs_rel", m.abs_rel}, {"sq_rel", m.sq_rel}, {"rmse", m.rmse},
              {"delta1", m.delta1}, {"delta2", m.delta2}, {"delta3", m.delta3}};
}

}  // namespace fieldfuse
