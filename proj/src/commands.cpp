// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/commands.hpp"

#include <algorithm>
#include <cmath>

#include "fieldfuse/augment.hpp"
#include "fieldfuse/blend.hpp"
#include "fieldfuse/calib.hpp"
#include "fieldfuse/error.hpp"
#include "fieldfuse/experiments.hpp"
#include "fieldfuse/field.hpp"
#include "fieldfuse/io.hpp"
#include "fieldfuse/metrics.hpp"
#include "fieldfuse/random.hpp"
#include "fieldfuse/register.hpp"
#include "fieldfuse/scenes.hpp"

namespace fieldfuse {
namespace {

namespace fs = std::filesystem;

bool has(const Json& config, const char* key) {
  return config.is_object() && config.contains(key) && !config.at(key).is_null();
}

/// An inline JSON value, or the parsed contents of the file a string names.
Json inline_or_file(const Json& value, const std::string& what) {
  if (value.is_string()) return parse_json(read_text(value.get<std::string>()), what);
  return value;
}

std::string text_or_file(const Json& value) {
  if (!value.is_string()) throw Error(ErrorCode::InvalidConfig, "expected a file path");
  return read_text(value.get<std::string>());
}

struct CameraSetup {
  CameraModel model;
  ImageGeometry geom;
};

CameraSetup camera_setup(const Json& config, int default_resolution) {
  if (has(config, "camera")) {
    const Json j = inline_or_file(config.at("camera"), "camera");
    const auto g = geometry_from_json(j);
    if (!g) throw Error(ErrorCode::InvalidConfig, "camera needs width and height");
    return {camera_from_json(j), *g};
  }
  const double f = 0.6 * default_resolution;
  const double c = 0.5 * (default_resolution - 1);
  return {CameraModel::pinhole(f, f, c, c), {default_resolution, default_resolution}};
}

Pose pose_setup(const Json& config, const Pose& fallback) {
  if (has(config, "pose")) return pose_from_json(inline_or_file(config.at("pose"), "pose"));
  if (has(config, "look_at")) {
    const Json& j = config.at("look_at");
    if (!j.is_object() || !j.contains("eye")) throw Error(ErrorCode::InvalidConfig, "look_at needs an eye");
    const Vec3 target = j.contains("target") ? vec3_from_json(j.at("target")) : Vec3::Zero();
    return look_at_pose(vec3_from_json(j.at("eye")), target);
  }
  return fallback;
}

RenderOptions render_setup(const Json& config, RenderOptions base = {}) {
  return render_options_from_json(has(config, "render") ? config.at("render") : Json(), base);
}

double mean_of(const ImageD& img) {
  double s = 0.0;
  for (double v : img.data) s += v;
  return img.data.empty() ? 0.0 : s / static_cast<double>(img.data.size());
}

Json scene_gen(const Json& config, std::uint64_t seed, const fs::path& out) {
  const std::string kind = config_value<std::string>(config, "kind", "random");
  const int resolution = config_value(config, "resolution", 64);
  Json files = Json::array();
  Json report{{"kind", kind}};
  auto save = [&](const std::string& name, const Json& j) {
    write_text(out / name, j.dump(2) + "\n");
    files.push_back(name);
  };
  if (kind == "random") {
    const Field f = make_random_scene(seed, config_value(config, "count", 8));
    save("scene.json", field_to_json(f));
    report["primitives"] = f.primitives.size();
  } else if (kind == "two-field") {
    const TwoFieldScene s = make_two_field_scene(resolution);
    save("scene.json", field_to_json(s.truth));
    save("fields.json", registered_fields_to_json(s.fields));
    save("views.json", trajectory_to_json(s.views));
    save("camera.json", camera_to_json(s.camera, s.geom));
    report["primitives"] = s.truth.primitives.size();
    report["fields"] = s.fields.size();
    report["views"] = s.views.size();
  } else if (kind == "room") {
    const RoomScene s = make_room_scene(resolution);
    save("scene.json", field_to_json(s.field));
    save("camera.json", camera_to_json(s.camera, s.geom));
    report["primitives"] = s.field.primitives.size();
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown scene kind '" + kind + "'");
  }
  report["files"] = files;
  return report;
}

Json render(const Json& config, std::uint64_t seed, const fs::path& out) {
  const Field field = has(config, "scene") ? field_from_json(inline_or_file(config.at("scene"), "scene"))
                                           : make_random_scene(seed, 8);
  const CameraSetup cam = camera_setup(config, config_value(config, "resolution", 64));
  const Pose pose = pose_setup(config, look_at_pose(Vec3(0.0, -3.0, 0.5), Vec3::Zero()));
  const RenderOptions options = render_setup(config);
  const RenderedImage img = render_image(field, cam.model, pose, cam.geom, options);
  write_png(out / "color.png", img.color);
  write_pfm(out / "depth.pfm", img.depth);
  write_pfm(out / "accumulation.pfm", img.accumulation);
  write_pfm(out / "distant.pfm", img.distant);
  return Json{{"camera", camera_to_json(cam.model, cam.geom)},
              {"pose", pose_to_json(pose)},
              {"render", render_options_to_json(options)},
              {"mean_accumulation", mean_of(img.accumulation)},
              {"mean_distant_accumulation", img.mean_distant_accumulation},
              {"files", {"color.png", "depth.pfm", "accumulation.pfm", "distant.pfm"}}};
}

Json calibrate(const Json& config, std::uint64_t seed, const fs::path& out) {
  std::vector<Correspondence> data;
  std::optional<CameraModel> truth;
  ImageGeometry geom = reference_geometry();
  Json files = Json::array();
  if (has(config, "correspondences")) {
    std::vector<Pose> poses;
    if (has(config, "poses")) poses = trajectory_from_json(inline_or_file(config.at("poses"), "poses"));
    data = correspondences_from_jsonl(text_or_file(config.at("correspondences")), poses);
    if (has(config, "truth")) truth = camera_from_json(config.at("truth"));
    if (has(config, "width") && has(config, "height"))
      geom = {config_value(config, "width", 0), config_value(config, "height", 0)};
  } else {
    const Json synth = has(config, "synthetic") ? config.at("synthetic") : Json::object();
    truth = has(synth, "truth") ? camera_from_json(synth.at("truth"))
                                : reference_camera(camera_kind_from_name(config_value<std::string>(synth, "kind", "ucm")));
    if (has(synth, "truth")) geom = geometry_from_json(synth.at("truth")).value_or(geom);
    SyntheticCalibConfig sc;
    sc.count = config_value(synth, "count", sc.count);
    sc.poses = config_value(synth, "poses", sc.poses);
    sc.pixel_noise = config_value(synth, "noise", 0.25);
    data = synthesize_correspondences(*truth, geom, sc, derive_seed(seed, 0));
    write_text(out / "correspondences.jsonl", correspondences_to_jsonl(data, true));
    files.push_back("correspondences.jsonl");
  }
  if (geom.width <= 0 || geom.height <= 0) throw Error(ErrorCode::InvalidConfig, "width/height must be positive");
  CameraModel initial;
  if (has(config, "initial")) {
    initial = camera_from_json(config.at("initial"));
  } else {
    const CameraKind kind = has(config, "kind") ? camera_kind_from_name(config.at("kind").get<std::string>())
                                               : (truth ? truth->kind : CameraKind::UCM);
    initial = CameraModel::image_defaults(kind, geom.width, geom.height);
  }
  const SolverOptions solver = solver_options_from_json(has(config, "solver") ? config.at("solver") : Json());
  const CalibResult r = recalibrate(initial, data, config_value(config, "warm_start", false), solver);
  Json report{{"correspondences", data.size()}, {"initial", camera_to_json(initial)}, {"result", calib_result_to_json(r)}};
  if (truth) {
    report["truth"] = camera_to_json(*truth);
    std::vector<double> rel;
    const auto p = r.model.params(), t = truth->params();
    if (p.size() == t.size())
      for (Eigen::Index i = 0; i < t.size(); ++i) rel.push_back(std::abs(p[i] - t[i]) / (t[i] != 0.0 ? std::abs(t[i]) : 1.0));
    report["relative_errors"] = rel;
  }
  report["files"] = files;
  return report;
}

Json augment(const Json& config, std::uint64_t seed, const fs::path& out) {
  PoseSet set;
  if (has(config, "trajectory")) {
    set.poses = trajectory_from_json(inline_or_file(config.at("trajectory"), "trajectory"));
  } else {
    const Json h = has(config, "hemisphere") ? config.at("hemisphere") : Json::object();
    HemisphereConfig hc;
    hc.radius = config_value(h, "radius", 2.5);
    hc.below_fraction = config_value(h, "below_fraction", 0.0);
    set = sample_hemisphere_poses(config_value<std::size_t>(h, "count", 12), derive_seed(seed, 0), hc);
  }
  if (set.poses.empty()) throw Error(ErrorCode::InvalidConfig, "trajectory is empty");
  const Json jc = has(config, "jitter") ? config.at("jitter") : Json::object();
  JitterConfig jitter;
  jitter.sigma_t = config_value(jc, "sigma_t", 0.1);
  jitter.sigma_r = config_value(jc, "sigma_r", 0.05);
  jitter.sigma_v = config_value(jc, "sigma_v", 0.1);
  jitter.seed = derive_seed(seed, 1);
  const std::vector<Pose> original = set.poses;

  PoseSet result = canonical_jitter(set, jitter);
  const bool randomize = config_value(config, "canonical_randomize", true);
  if (randomize) result = canonical_randomize(result, derive_seed(seed, 2));

  // Pairwise geometry is what the augmentation must leave untouched.
  double max_distance_change = 0.0, max_angle_change = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    for (std::size_t j = i + 1; j < original.size(); ++j) {
      const double d0 = (original[i].center() - original[j].center()).norm();
      const double d1 = (result.poses[i].center() - result.poses[j].center()).norm();
      max_distance_change = std::max(max_distance_change, std::abs(d1 - d0));
      const double a0 = rotation_geodesic_deg(original[i].rotation(), original[j].rotation());
      const double a1 = rotation_geodesic_deg(result.poses[i].rotation(), result.poses[j].rotation());
      max_angle_change = std::max(max_angle_change, std::abs(a1 - a0));
    }
  }

  const Json provenance{{"seed", seed}, {"config", config.is_null() ? Json::object() : config},
                        {"jitter", {{"sigma_t", jitter.sigma_t}, {"sigma_r", jitter.sigma_r}}},
                        {"canonical_randomize", randomize}};
  write_text(out / "trajectory.json", trajectory_to_json(result.poses, result.canonical, provenance).dump(2) + "\n");
  Json files = Json::array({"trajectory.json"});

  const int virtual_count = config_value(config, "virtual_views", 0);
  Json virtual_views = Json::array();
  if (virtual_count > 0) {
    // Fuse rendered depth from every input view into one colored cloud, then
    // splat it into noisy virtual cameras aimed at the cloud center.
    const Field field = has(config, "scene") ? field_from_json(inline_or_file(config.at("scene"), "scene"))
                                             : make_random_scene(seed, 8);
    const CameraSetup cam = camera_setup(config, 32);
    const RenderOptions options = render_setup(config);
    std::vector<ColoredPoint> cloud;
    for (const Pose& pose : original) {
      const RenderedImage img = render_image(field, cam.model, pose, cam.geom, options);
      for (int y = 0; y < cam.geom.height; ++y)
        for (int x = 0; x < cam.geom.width; ++x) {
          if (img.accumulation.at(x, y) < 0.5) continue;
          const Vec3 pc = unproject(cam.model, Vec2(x, y), img.depth.at(x, y));
          cloud.push_back({pose.world_from_camera.apply(pc), Vec3(img.color.at(x, y, 0), img.color.at(x, y, 1), img.color.at(x, y, 2))});
        }
    }
    Vec3 center = Vec3::Zero();
    for (const auto& p : cloud) center += p.position;
    if (!cloud.empty()) center /= static_cast<double>(cloud.size());
    std::vector<Pose> virtual_poses;
    for (int k = 0; k < virtual_count; ++k) {
      JitterConfig vc = jitter;
      vc.seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(k));
      const Pose& base = original[static_cast<std::size_t>(k) % original.size()];
      const Pose v = make_virtual_camera(base, center, vc);
      virtual_poses.push_back(v);
      const SparseView sv = project_cloud_to_view(cloud, v, cam.model, cam.geom);
      const std::string stem = "virtual_" + std::to_string(k);
      write_png(out / (stem + ".png"), sv.color);
      write_pfm(out / (stem + "_depth.pfm"), sv.depth);
      files.push_back(stem + ".png");
      files.push_back(stem + "_depth.pfm");
      const auto filled = std::count(sv.valid.begin(), sv.valid.end(), 1);
      virtual_views.push_back(Json{{"index", k}, {"pose", pose_to_json(v)}, {"filled_pixels", filled}});
    }
    write_text(out / "virtual_trajectory.json",
               trajectory_to_json(virtual_poses, 0, Json{{"seed", seed}, {"sigma_v", jitter.sigma_v}, {"cloud_points", cloud.size()}}).dump(2) + "\n");
    files.push_back("virtual_trajectory.json");
  }
  return Json{{"poses", result.poses.size()},
              {"canonical", result.canonical},
              {"max_distance_change", max_distance_change},
              {"max_relative_angle_change_deg", max_angle_change},
              {"virtual_views", virtual_views},
              {"files", files}};
}

Json register_command(const Json& config, std::uint64_t seed, const fs::path& out) {
  std::vector<PoseCorrespondence> data;
  std::optional<SimTransform> truth;
  if (has(config, "truth")) truth = sim_from_json(config.at("truth"));
  Json files = Json::array();
  if (has(config, "correspondences")) {
    data = pose_correspondences_from_json(inline_or_file(config.at("correspondences"), "correspondences"));
  } else {
    const Json synth = has(config, "synthetic") ? config.at("synthetic") : Json::object();
    Rng rng(derive_seed(seed, 0));
    if (!truth) {
      SimTransform t;
      t.scale = std::exp(uniform(rng, std::log(0.5), std::log(2.0)));
      t.rotation = random_rotation(rng);
      t.translation = normal_vec3(rng, 1.0);
      truth = t;
    }
    SyntheticRegistrationConfig sc;
    sc.rotation_noise_deg = config_value(synth, "rotation_noise_deg", 0.5);
    sc.translation_noise = config_value(synth, "translation_noise", 0.01);
    sc.outlier_fraction = config_value(synth, "outlier_fraction", 0.2);
    const PoseSet local = sample_hemisphere_poses(config_value<std::size_t>(synth, "poses", 20), derive_seed(seed, 1));
    data = synthesize_pose_correspondences(local.poses, *truth, sc, derive_seed(seed, 2));
    write_text(out / "correspondences.json", pose_correspondences_to_json(data).dump(2) + "\n");
    files.push_back("correspondences.json");
  }
  std::size_t filtered_out = 0;
  if (has(config, "qualities")) {
    // Optional re-render quality per correspondence: drop the poor ones first.
    const auto q = config.at("qualities").get<std::vector<double>>();
    if (q.size() != data.size()) throw Error(ErrorCode::InvalidConfig, "one quality value per correspondence required");
    const double threshold = config_value(config, "threshold", 0.9);
    std::vector<PoseCorrespondence> kept;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (q[i] >= threshold) kept.push_back(data[i]);
    if (kept.size() < 2) throw Error(ErrorCode::TooFewPoses, "fewer than two poses pass the quality threshold");
    filtered_out = data.size() - kept.size();
    data = std::move(kept);
  }
  const RegistrationResult r = solve_frame_transform(data);
  Json report = registration_to_json(r);
  report["correspondences"] = data.size();
  report["filtered_out"] = filtered_out;
  RegistrationRubric rubric;
  report["rubric"] = Json{{"max_rotation_deg", rubric.max_rotation_deg}, {"max_translation", rubric.max_translation},
                          {"max_scale", rubric.max_scale}};
  if (truth) {
    report["truth"] = sim_to_json(*truth);
    report["errors"] = registration_errors_to_json(registration_errors(r.transform, *truth, rubric));
  }
  report["files"] = files;
  return report;
}

Json blend(const Json& config, std::uint64_t, const fs::path& out) {
  const int resolution = config_value(config, "resolution", 64);
  std::vector<RegisteredField> fields;
  std::optional<Field> reference;
  CameraSetup cam;
  std::vector<Pose> views;
  RenderOptions base;
  if (has(config, "fields")) {
    fields = registered_fields_from_json(inline_or_file(config.at("fields"), "fields"));
    cam = camera_setup(config, resolution);
    if (has(config, "poses")) views = trajectory_from_json(inline_or_file(config.at("poses"), "poses"));
    else views.push_back(pose_setup(config, look_at_pose(Vec3(0.0, -3.0, 0.0), Vec3::Zero())));
  } else {
    TwoFieldScene s = make_two_field_scene(resolution);
    fields = s.fields;
    reference = s.truth;
    cam = {s.camera, s.geom};
    views = s.views;
    base = s.render;
  }
  if (has(config, "reference")) reference = field_from_json(inline_or_file(config.at("reference"), "reference"));
  BlendConfig bc;
  bc.method = blend_method_from_name(config_value<std::string>(config, "method", "idw-sample"));
  bc.gamma = config_value(config, "gamma", bc.gamma);
  bc.tau = config_value(config, "tau", bc.tau);
  bc.render = render_setup(config, base);
  bc.render.qd_cutoff = config_value(config, "qd_cutoff", bc.render.qd_cutoff);
  try {
    bc.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }

  Json per_view = Json::array();
  Json files = Json::array();
  double mean_psnr = 0.0, mean_ssim = 0.0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const BlendedImage img = blend_image(fields, cam.model, views[v], cam.geom, bc);
    const std::string name = "blend_" + std::to_string(v) + ".png";
    write_png(out / name, img.color);
    files.push_back(name);
    Json row{{"view", v}, {"fields_used", img.fields_used}, {"zero_mass_pixels", img.zero_mass_pixels}};
    if (reference) {
      const ImageD truth = render_image(*reference, cam.model, views[v], cam.geom, bc.render).color;
      const ImageMetrics m = image_metrics(img.color, truth);
      row["metrics"] = image_metrics_to_json(m);
      mean_psnr += m.psnr / views.size();
      mean_ssim += m.ssim / views.size();
    }
    per_view.push_back(row);
  }
  Json report{{"method", blend_method_name(bc.method)}, {"gamma", bc.gamma}, {"tau", bc.tau},
              {"qd_cutoff", bc.render.qd_cutoff}, {"views", per_view}, {"files", files}};
  if (reference) report["mean"] = Json{{"psnr", mean_psnr}, {"ssim", mean_ssim}, {"lpips", nullptr}};
  return report;
}

ImageD load_image(const std::string& path) {
  const fs::path p(path);
  if (p.extension() == ".pfm") return read_pfm(p);
  if (p.extension() == ".png") return read_png(p);
  throw Error(ErrorCode::InvalidConfig, "unsupported image format: " + path);
}

Json eval(const Json& config, std::uint64_t, const fs::path&) {
  if (!has(config, "a") || !has(config, "b")) throw Error(ErrorCode::InvalidConfig, "eval needs inputs 'a' and 'b'");
  const std::string kind = config_value<std::string>(config, "kind", "image");
  const ImageD a = load_image(config_value<std::string>(config, "a", ""));
  const ImageD b = load_image(config_value<std::string>(config, "b", ""));
  if (kind == "image") return Json{{"kind", kind}, {"metrics", image_metrics_to_json(image_metrics(a, b))}};
  if (kind != "depth") throw Error(ErrorCode::InvalidConfig, "eval kind must be 'image' or 'depth'");
  if (a.channels != 1 || b.channels != 1) throw Error(ErrorCode::InvalidConfig, "depth maps must have one channel");
  std::vector<unsigned char> mask(a.data.size(), 1);
  if (has(config, "mask")) {
    const ImageD m = load_image(config_value<std::string>(config, "mask", ""));
    if (m.pixel_count() != a.pixel_count()) throw Error(ErrorCode::DimensionMismatch, "mask size differs from depth");
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = m.data[i * m.channels] > 0.0 ? 1 : 0;
  }
  const bool median_scale = config_value(config, "median_scale", true);
  return Json{{"kind", kind}, {"median_scale", median_scale},
              {"metrics", depth_metrics_to_json(depth_metrics(a.data, b.data, mask, median_scale))}};
}

Json experiment(const Json& config, std::uint64_t seed, const fs::path&) {
  if (!has(config, "name")) throw Error(ErrorCode::InvalidConfig, "experiment config needs a name");
  const std::string name = config_value<std::string>(config, "name", "");
  Json rest = config;
  rest.erase("name");
  return run_experiment(name, rest, seed);
}

}  // namespace

std::vector<std::string> command_names() {
  return {"scene-gen", "render", "calibrate", "perturb-recover", "augment", "register", "blend", "eval", "experiment"};
}

Json run_command(const std::string& name, const Json& config, std::uint64_t seed, const fs::path& out_dir) {
  if (!config.is_null() && !config.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  Json body;
  try {
    if (name == "scene-gen") body = scene_gen(config, seed, out_dir);
    else if (name == "render") body = render(config, seed, out_dir);
    else if (name == "calibrate") body = calibrate(config, seed, out_dir);
    else if (name == "perturb-recover") body = run_experiment("perturbation-sweep", config, seed);
    else if (name == "augment") body = augment(config, seed, out_dir);
    else if (name == "register") body = register_command(config, seed, out_dir);
    else if (name == "blend") body = blend(config, seed, out_dir);
    else if (name == "eval") body = eval(config, seed, out_dir);
    else if (name == "experiment") body = experiment(config, seed, out_dir);
    else throw Error(ErrorCode::InvalidArgument, "unknown command '" + name + "'");
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad config: ") + e.what());
  }
  Json report{{"command", name}, {"seed", seed}, {"result", body}};
  write_text(out_dir / "report.json", report.dump(2) + "\n");
  return report;
}

}  // namespace fieldfuse
