// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "fieldfuse/augment.hpp"
#include "fieldfuse/blend.hpp"
#include "fieldfuse/calib.hpp"
#include "fieldfuse/error.hpp"
#include "fieldfuse/field.hpp"
#include "fieldfuse/metrics.hpp"
#include "fieldfuse/parallel.hpp"
#include "fieldfuse/random.hpp"
#include "fieldfuse/register.hpp"
#include "fieldfuse/scenes.hpp"

namespace fieldfuse {
namespace {

CameraKind kind_from_config(const std::string& name) {
  try {
    return camera_kind_from_name(name);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
}

std::vector<double> relative_errors(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  std::vector<double> out(static_cast<std::size_t>(truth.size()));
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    // Zero-valued parameters fall back to absolute error.
    const double denom = truth[i] != 0.0 ? std::abs(truth[i]) : 1.0;
    out[i] = std::abs(estimate[i] - truth[i]) / denom;
  }
  return out;
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SyntheticCalibConfig calib_data_config(const Json& config, double default_noise) {
  SyntheticCalibConfig c;
  c.count = config_value(config, "count", c.count);
  c.poses = config_value(config, "poses", c.poses);
  c.pixel_noise = config_value(config, "noise", default_noise);
  if (c.count < 8 || c.poses < 1 || c.pixel_noise < 0.0) throw Error(ErrorCode::InvalidConfig, "bad synthetic data config");
  return c;
}

Json calib_recovery(const Json& config, std::uint64_t seed) {
  const auto models = config_value(config, "models", std::vector<std::string>{"ucm", "eucm", "ds"});
  const double noise = config_value(config, "noise", 0.25);
  const ImageGeometry geom = reference_geometry();
  SyntheticCalibConfig clean = calib_data_config(config, 0.0);
  clean.pixel_noise = 0.0;
  SyntheticCalibConfig noisy = clean;
  noisy.pixel_noise = noise;
  const SolverOptions solver = solver_options_from_json(config.is_object() && config.contains("solver") ? config.at("solver") : Json());

  Json rows = Json::array();
  for (std::size_t m = 0; m < models.size(); ++m) {
    const CameraKind kind = kind_from_config(models[m]);
    const CameraModel truth = reference_camera(kind);
    const CameraModel init = CameraModel::image_defaults(kind, geom.width, geom.height);

    const auto clean_data = synthesize_correspondences(truth, geom, clean, derive_seed(seed, 2 * m));
    const CalibResult a = solve_intrinsics(init, clean_data, solver);
    const auto rel = relative_errors(a.model.params(), truth.params());

    const auto noisy_data = synthesize_correspondences(truth, geom, noisy, derive_seed(seed, 2 * m + 1));
    const CalibResult b = solve_intrinsics(init, noisy_data, solver);
    const auto rel_noisy = relative_errors(b.model.params(), truth.params());

    rows.push_back(Json{{"model", camera_kind_name(kind)},
                        {"truth", vec_to_json(truth.params())},
                        {"init", vec_to_json(init.params())},
                        {"noiseless", {{"result", calib_result_to_json(a)},
                                       {"relative_errors", rel},
                                       {"max_relative_error", max_of(rel)}}},
                        {"noisy", {{"pixel_noise", noise},
                                   {"result", calib_result_to_json(b)},
                                   {"relative_errors", rel_noisy},
                                   {"mre", b.mre}}}});
  }
  return Json{{"models", rows}, {"count", clean.count}, {"poses", clean.poses}};
}

Json perturbation_sweep(const Json& config, std::uint64_t seed) {
  const bool custom = config.is_object() && config.contains("truth");
  const CameraModel truth = custom ? camera_from_json(config.at("truth"))
                                   : reference_camera(kind_from_config(config_value<std::string>(config, "model", "eucm")));
  const CameraKind kind = truth.kind;
  const ImageGeometry geom = custom ? geometry_from_json(config.at("truth")).value_or(reference_geometry()) : reference_geometry();
  const auto factors = config_value(config, "factors", std::vector<double>{1.10, 1.05, 0.95, 0.90});
  const bool warm = config_value(config, "warm_start", true);
  const double tolerance = config_value(config, "tolerance", 0.03);
  const double frozen_fraction = config_value(config, "frozen_fraction", 0.1);
  const SyntheticCalibConfig data_cfg = calib_data_config(config, 0.25);
  const SolverOptions solver = solver_options_from_json(config.is_object() && config.contains("solver") ? config.at("solver") : Json());
  const auto data = synthesize_correspondences(truth, geom, data_cfg, derive_seed(seed, 0));

  Json runs = Json::array();
  bool all_within = true;
  for (double f : factors) {
    if (!(f > 0.0)) throw Error(ErrorCode::InvalidConfig, "perturbation factors must be positive");
    const CameraModel init = perturb_params(truth, f);
    const CalibResult r = recalibrate(init, data, warm, solver, frozen_fraction);
    const auto rel = relative_errors(r.model.params(), truth.params());
    const bool within = max_of(rel) <= tolerance;
    all_within = all_within && within;
    runs.push_back(Json{{"factor", f},
                        {"init", vec_to_json(init.params())},
                        {"result", calib_result_to_json(r)},
                        {"relative_errors", rel},
                        {"max_relative_error", max_of(rel)},
                        {"within_tolerance", within}});
  }
  return Json{{"model", camera_kind_name(kind)},
              {"truth", vec_to_json(truth.params())},
              {"warm_start", warm},
              {"pixel_noise", data_cfg.pixel_noise},
              {"tolerance", tolerance},
              {"runs", runs},
              {"all_within_tolerance", all_within}};
}

SimTransform random_similarity(Rng& rng) {
  SimTransform t;
  t.scale = std::exp(uniform(rng, std::log(0.5), std::log(2.0)));
  t.rotation = random_rotation(rng);
  t.translation = normal_vec3(rng, 1.0);
  return t;
}

Json registration_montecarlo(const Json& config, std::uint64_t seed) {
  const int trials = config_value(config, "trials", 100);
  const std::size_t poses = config_value<std::size_t>(config, "poses", 20);
  SyntheticRegistrationConfig noise;
  noise.rotation_noise_deg = config_value(config, "rotation_noise_deg", 0.5);
  noise.translation_noise = config_value(config, "translation_noise", 0.01);
  noise.outlier_fraction = config_value(config, "outlier_fraction", 0.2);
  if (trials < 1 || poses < 2 || noise.outlier_fraction < 0.0 || noise.outlier_fraction >= 1.0)
    throw Error(ErrorCode::InvalidConfig, "bad registration experiment config");
  RegistrationRubric rubric;
  rubric.max_rotation_deg = config_value(config, "max_rotation_deg", rubric.max_rotation_deg);
  rubric.max_translation = config_value(config, "max_translation", rubric.max_translation);
  rubric.max_scale = config_value(config, "max_scale", rubric.max_scale);

  struct Trial {
    RegistrationErrors noiseless;
    RegistrationErrors noisy;
  };
  std::vector<Trial> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), [&](std::size_t i) {
    Rng rng(derive_seed(seed, 3 * i));
    const SimTransform truth = random_similarity(rng);
    const PoseSet local = sample_hemisphere_poses(poses, derive_seed(seed, 3 * i + 1), {1.0, 0.2, -0.2});
    const auto clean = synthesize_pose_correspondences(local.poses, truth, {}, derive_seed(seed, 3 * i + 2));
    results[i].noiseless = registration_errors(solve_frame_transform(clean).transform, truth, rubric);
    const auto noisy = synthesize_pose_correspondences(local.poses, truth, noise, derive_seed(seed, 3 * i + 2));
    results[i].noisy = registration_errors(solve_frame_transform(noisy).transform, truth, rubric);
  });

  int successes = 0;
  double worst_clean = 0.0;
  std::vector<double> r_err, t_err, s_err;
  Json rows = Json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& t = results[i];
    successes += t.noisy.success ? 1 : 0;
    worst_clean = std::max({worst_clean, t.noiseless.rotation_deg, t.noiseless.translation, t.noiseless.scale});
    r_err.push_back(t.noisy.rotation_deg);
    t_err.push_back(t.noisy.translation);
    s_err.push_back(t.noisy.scale);
    rows.push_back(Json{{"trial", i}, {"noiseless", registration_errors_to_json(t.noiseless)},
                        {"noisy", registration_errors_to_json(t.noisy)}});
  }
  return Json{{"trials", trials},
              {"poses", poses},
              {"noise", {{"rotation_noise_deg", noise.rotation_noise_deg},
                         {"translation_noise", noise.translation_noise},
                         {"outlier_fraction", noise.outlier_fraction}}},
              {"rubric", {{"max_rotation_deg", rubric.max_rotation_deg},
                          {"max_translation", rubric.max_translation},
                          {"max_scale", rubric.max_scale}}},
              {"successes", successes},
              {"success_rate", static_cast<double>(successes) / trials},
              {"max_noiseless_error", worst_clean},
              {"median", {{"r_err_deg", median_of(r_err)}, {"t_err", median_of(t_err)}, {"s_err", median_of(s_err)}}},
              {"per_trial", rows}};
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (count == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return out;
}

Json gamma_sweep(const Json& config, std::uint64_t) {
  const int resolution = config_value(config, "resolution", 48);
  const double lo = config_value(config, "gamma_min", 1e-2);
  const double hi = config_value(config, "gamma_max", 1e3);
  const int count = config_value(config, "count", 11);
  const double tau = config_value(config, "tau", 1.2);
  const int n_samples = config_value(config, "n_samples", 128);
  if (!(lo > 0.0) || !(hi >= lo) || count < 1 || n_samples < 2)
    throw Error(ErrorCode::InvalidConfig, "bad gamma sweep config");
  TwoFieldScene scene = make_two_field_scene(resolution);
  scene.render.n_samples = n_samples;
  const auto gammas = geometric_grid(lo, hi, count);

  std::vector<ImageD> truth;
  Json per_field = Json::array();
  std::vector<double> field_psnr(scene.fields.size(), 0.0);
  for (const Pose& view : scene.views) {
    truth.push_back(render_image(scene.truth, scene.camera, view, scene.geom, scene.render).color);
    const auto renders = render_fields(scene.fields, scene.camera, view, scene.geom, scene.render);
    for (std::size_t f = 0; f < renders.size(); ++f) field_psnr[f] += psnr(renders[f], truth.back()) / scene.views.size();
  }
  for (std::size_t f = 0; f < field_psnr.size(); ++f) per_field.push_back(Json{{"field", f}, {"psnr", field_psnr[f]}});

  Json methods = Json::object();
  for (BlendMethod method : {BlendMethod::Nearest, BlendMethod::IDW2D, BlendMethod::IDW3D, BlendMethod::IDWSample}) {
    Json curve = Json::array();
    for (double gamma : gammas) {
      BlendConfig cfg{method, gamma, tau, scene.render};
      double mean = 0.0;
      for (std::size_t v = 0; v < scene.views.size(); ++v) {
        const auto blended = blend_image(scene.fields, scene.camera, scene.views[v], scene.geom, cfg);
        mean += psnr(blended.color, truth[v]) / scene.views.size();
      }
      curve.push_back(Json{{"gamma", gamma}, {"psnr", mean}});
    }
    methods[blend_method_name(method)] = curve;
  }
  return Json{{"resolution", resolution}, {"views", scene.views.size()}, {"gammas", gammas},
              {"fields", per_field}, {"methods", methods}};
}

Json filter_threshold_sweep(const Json& config, std::uint64_t seed) {
  const int resolution = config_value(config, "resolution", 16);
  const int poses = config_value(config, "poses", 40);
  const double inside_fraction = config_value(config, "inside_fraction", 0.25);
  const int count = config_value(config, "thresholds", 21);
  if (poses < 2 || count < 2 || inside_fraction < 0.0 || inside_fraction > 1.0)
    throw Error(ErrorCode::InvalidConfig, "bad filter sweep config");
  const RoomScene room = make_room_scene(resolution);

  struct View {
    Pose pose;
    bool inside = false;
    double q = 0.0;
  };
  std::vector<View> views(static_cast<std::size_t>(poses));
  Rng rng(derive_seed(seed, 0));
  const int inside_count = static_cast<int>(std::lround(inside_fraction * poses));
  for (int i = 0; i < poses; ++i) {
    View& v = views[i];
    v.inside = i < inside_count;
    Vec3 eye;
    if (v.inside) {
      // Anywhere inside the opaque sphere, away from its surface.
      do eye = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)) * 0.7 * room.sphere_radius;
      while (eye.norm() > 0.7 * room.sphere_radius);
    } else {
      // Free space: clear of the sphere and the walls.
      const double lim = room.half_size - 0.4;
      do eye = Vec3(uniform(rng, -lim, lim), uniform(rng, -lim, lim), uniform(rng, -lim, lim));
      while ((eye - room.sphere_center).norm() < room.sphere_radius + 0.4);
    }
    Vec3 target = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    if ((target - eye).norm() < 0.2) target = eye + Vec3(0.5, 0.0, 0.0);
    v.pose = look_at_pose(eye, target);
  }
  for (auto& v : views) v.q = render_image(room.field, room.camera, v.pose, room.geom, room.render).mean_distant_accumulation;

  Json rows = Json::array();
  for (int k = 0; k < count; ++k) {
    const double threshold = static_cast<double>(k) / (count - 1);
    int kept = 0, kept_inside = 0, kept_outside = 0, outside_total = 0;
    for (const auto& v : views) {
      outside_total += v.inside ? 0 : 1;
      if (v.q >= threshold) {
        ++kept;
        (v.inside ? kept_inside : kept_outside)++;
      }
    }
    rows.push_back(Json{{"threshold", threshold},
                        {"kept", kept},
                        {"kept_inside", kept_inside},
                        {"kept_outside", kept_outside},
                        {"precision", kept > 0 ? static_cast<double>(kept_outside) / kept : 1.0},
                        {"recall", outside_total > 0 ? static_cast<double>(kept_outside) / outside_total : 1.0}});
  }
  Json per_view = Json::array();
  for (std::size_t i = 0; i < views.size(); ++i)
    per_view.push_back(Json{{"view", i}, {"inside", views[i].inside}, {"q", views[i].q}});
  return Json{{"qd_cutoff", room.render.qd_cutoff}, {"resolution", resolution}, {"views", per_view}, {"sweep", rows}};
}

}  // namespace

CameraModel reference_camera(CameraKind kind) {
  switch (kind) {
    case CameraKind::Pinhole: return CameraModel::pinhole(235.4, 245.1, 186.5, 132.6);
    case CameraKind::UCM: return CameraModel::ucm(235.4, 245.1, 186.5, 132.6, 0.650);
    case CameraKind::EUCM: return CameraModel::eucm(235.6, 245.4, 186.4, 132.7, 0.597, 1.112);
    case CameraKind::DS: return CameraModel::ds(181.4, 188.9, 186.4, 132.6, 0.571, -0.230);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown camera kind");
}

ImageGeometry reference_geometry() { return {384, 256}; }

std::vector<std::string> experiment_names() {
  return {"calib-recovery", "perturbation-sweep", "registration-montecarlo", "gamma-sweep", "filter-threshold-sweep"};
}

Json run_experiment(const std::string& name, const Json& config, std::uint64_t seed) {
  if (!config.is_null() && !config.is_object()) throw Error(ErrorCode::InvalidConfig, "experiment config must be an object");
  Json report;
  if (name == "calib-recovery") report = calib_recovery(config, seed);
  else if (name == "perturbation-sweep") report = perturbation_sweep(config, seed);
  else if (name == "registration-montecarlo") report = registration_montecarlo(config, seed);
  else if (name == "gamma-sweep") report = gamma_sweep(config, seed);
  else if (name == "filter-threshold-sweep") report = filter_threshold_sweep(config, seed);
  else throw Error(ErrorCode::UnknownExperiment, "unknown experiment '" + name + "'");
  return Json{{"experiment", name}, {"seed", seed}, {"config", config.is_null() ? Json::object() : config}, {"report", report}};
}

}  // namespace fieldfuse
