// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion with its runtime.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fieldfuse/augment.hpp"
#include "fieldfuse/blend.hpp"
#include "fieldfuse/calib.hpp"
#include "fieldfuse/camera.hpp"
#include "fieldfuse/commands.hpp"
#include "fieldfuse/error.hpp"
#include "fieldfuse/experiments.hpp"
#include "fieldfuse/field.hpp"
#include "fieldfuse/io.hpp"
#include "fieldfuse/metrics.hpp"
#include "fieldfuse/random.hpp"
#include "fieldfuse/register.hpp"
#include "fieldfuse/scenes.hpp"

using namespace fieldfuse;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const CameraKind kAllKinds[] = {CameraKind::Pinhole, CameraKind::UCM, CameraKind::EUCM, CameraKind::DS};
const CameraKind kUnified[] = {CameraKind::UCM, CameraKind::EUCM, CameraKind::DS};

double max_relative_error(const Eigen::VectorXd& est, const Eigen::VectorXd& truth) {
  double m = 0.0;
  for (int i = 0; i < truth.size(); ++i) {
    const double scale = truth[i] != 0.0 ? std::abs(truth[i]) : 1.0;
    m = std::max(m, std::abs(est[i] - truth[i]) / scale);
  }
  return m;
}

double max_diff(const ImageD& a, const ImageD& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// 1
void check_camera_round_trip(Outcome& out) {
  const ImageGeometry geom = reference_geometry();
  double worst = 0.0;
  for (CameraKind kind : kAllKinds) {
    const CameraModel model = reference_camera(kind);
    Rng rng(derive_seed(1, static_cast<std::uint64_t>(kind)));
    int done = 0;
    while (done < 10000) {
      const Vec2 px(uniform(rng, 0.0, geom.width - 1.0), uniform(rng, 0.0, geom.height - 1.0));
      if (!try_unproject_ray(model, px)) continue;
      const double depth = uniform(rng, 0.1, 20.0);
      const Vec2 back = project(model, unproject(model, px, depth));
      worst = std::max(worst, (back - px).norm());
      ++done;
    }
  }
  out.detail << "max error " << worst << " px over 4 x 10000 pairs";
  out.require(worst < 1e-6, "round-trip error < 1e-6 px");
}

// 2
void check_jacobians(Outcome& out) {
  const double h = 1e-6;
  double worst = 0.0;
  for (CameraKind kind : kAllKinds) {
    const CameraModel model = reference_camera(kind);
    Rng rng(derive_seed(2, static_cast<std::uint64_t>(kind)));
    int done = 0;
    while (done < 1000) {
      const Vec3 p(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -0.5, 3));
      if (p.norm() < 0.2) continue;
      // Central differences need both neighbours inside the domain.
      bool inside = try_project(model, p).has_value();
      for (int a = 0; a < 3 && inside; ++a)
        for (double s : {-1.0, 1.0}) inside = inside && try_project(model, p + s * h * Vec3::Unit(a)).has_value();
      if (!inside) continue;
      const ProjectionJacobians j = project_jacobians(model, p);
      Eigen::Matrix<double, 2, 3> np;
      for (int a = 0; a < 3; ++a)
        np.col(a) = (project(model, p + h * Vec3::Unit(a)) - project(model, p - h * Vec3::Unit(a))) / (2 * h);
      const Eigen::VectorXd k = model.params();
      Eigen::MatrixXd nk(2, k.size());
      for (int i = 0; i < k.size(); ++i) {
        Eigen::VectorXd kp = k, km = k;
        kp[i] += h;
        km[i] -= h;
        nk.col(i) = (project(CameraModel::from_params(kind, kp), p) - project(CameraModel::from_params(kind, km), p)) /
                    (2 * h);
      }
      worst = std::max(worst, (j.d_point - np).norm() / np.norm());
      worst = std::max(worst, (j.d_params - nk).norm() / nk.norm());
      ++done;
    }
  }
  out.detail << "max relative error " << worst << " over 4 x 1000 cases";
  out.require(worst < 1e-4, "relative error < 1e-4");
}

// 3
void check_calibration_recovery(Outcome& out) {
  const ImageGeometry geom = reference_geometry();
  for (CameraKind kind : kUnified) {
    const CameraModel truth = reference_camera(kind);
    SyntheticCalibConfig cfg;
    cfg.count = 2000;
    const auto clean = synthesize_correspondences(truth, geom, cfg, 30 + static_cast<std::uint64_t>(kind));
    const CalibResult r = solve_intrinsics(CameraModel::image_defaults(kind, geom.width, geom.height), clean);
    const double rel = max_relative_error(r.model.params(), truth.params());
    cfg.pixel_noise = 0.25;
    const auto noisy = synthesize_correspondences(truth, geom, cfg, 40 + static_cast<std::uint64_t>(kind));
    const CalibResult rn = solve_intrinsics(CameraModel::image_defaults(kind, geom.width, geom.height), noisy);
    out.detail << camera_kind_name(kind) << ": rel " << rel << ", noisy MRE " << rn.mre << "; ";
    out.require(r.converged && rel < 1e-6, std::string(camera_kind_name(kind)) + " noiseless rel < 1e-6");
    out.require(rn.mre < 1.0, std::string(camera_kind_name(kind)) + " noisy MRE < 1 px");
  }
}

// 4
void check_perturbation(Outcome& out) {
  const ImageGeometry geom = reference_geometry();
  double worst = 0.0;
  for (CameraKind kind : kUnified) {
    const CameraModel truth = reference_camera(kind);
    SyntheticCalibConfig cfg;
    cfg.pixel_noise = 0.25;
    const auto data = synthesize_correspondences(truth, geom, cfg, 50 + static_cast<std::uint64_t>(kind));
    for (double factor : {1.10, 1.05, 0.95, 0.90}) {
      const CalibResult r = recalibrate(perturb_params(truth, factor), data, true);
      const double rel = max_relative_error(r.model.params(), truth.params());
      worst = std::max(worst, rel);
      out.require(rel < 0.03, std::string(camera_kind_name(kind)) + " factor " + std::to_string(factor));
    }
  }
  out.detail << "worst relative parameter error " << worst << " over 3 models x 4 factors";
}

// 5
void check_registration(Outcome& out) {
  Rng rng(5);
  double noiseless = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const SimTransform truth{uniform(rng, 0.3, 3.0), random_rotation(rng),
                             Vec3(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2))};
    const auto local = sample_hemisphere_poses(20, derive_seed(5, trial)).poses;
    const auto data = synthesize_pose_correspondences(local, truth, {}, trial);
    const RegistrationErrors e = registration_errors(solve_frame_transform(data).transform, truth);
    noiseless = std::max({noiseless, e.rotation_deg, e.translation, e.scale});
  }
  SyntheticRegistrationConfig noisy;
  noisy.rotation_noise_deg = 0.5;
  noisy.translation_noise = 0.01;
  noisy.outlier_fraction = 0.2;
  int passed = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng t(derive_seed(55, trial));
    const SimTransform truth{uniform(t, 0.3, 3.0), random_rotation(t),
                             Vec3(uniform(t, -2, 2), uniform(t, -2, 2), uniform(t, -2, 2))};
    const auto local = sample_hemisphere_poses(20, derive_seed(56, trial)).poses;
    const auto data = synthesize_pose_correspondences(local, truth, noisy, derive_seed(57, trial));
    if (registration_errors(solve_frame_transform(data).transform, truth).success) ++passed;
  }
  out.detail << "noiseless max error " << noiseless << "; noisy trials passing " << passed << "/100";
  out.require(noiseless < 1e-9, "noiseless exact to 1e-9");
  out.require(passed >= 95, ">= 95 of 100 noisy trials");
}

// 6
void check_distant_accumulation(Outcome& out) {
  const RoomScene room = make_room_scene(32);
  const RenderedImage inside =
      render_image(room.field, room.camera, look_at_pose(Vec3(0.05, 0.0, 0.0), Vec3(1, 0, 0)), room.geom, room.render);
  const RenderedImage outside =
      render_image(room.field, room.camera, look_at_pose(Vec3(0.0, -1.2, 0.1), Vec3::Zero()), room.geom, room.render);
  out.detail << "inside q " << inside.mean_distant_accumulation << ", exterior q "
             << outside.mean_distant_accumulation;
  out.require(inside.mean_distant_accumulation < 0.5, "inside q < 0.5");
  out.require(outside.mean_distant_accumulation > 0.9, "exterior q > 0.9");
}

// 7
void check_blending_laws(Outcome& out) {
  TwoFieldScene s = make_two_field_scene(24);
  s.render.n_samples = 96;
  const Pose view = s.views[1];
  const BlendMethod all[] = {BlendMethod::Nearest, BlendMethod::IDW2D, BlendMethod::IDW3D, BlendMethod::IDWSample};

  double a = 0.0;
  const std::span<const RegisteredField> one(s.fields.data(), 1);
  const ImageD direct = render_fields(one, s.camera, view, s.geom, s.render)[0];
  for (BlendMethod m : all) {
    BlendConfig cfg;
    cfg.method = m;
    cfg.render = s.render;
    a = std::max(a, max_diff(blend_image(one, s.camera, view, s.geom, cfg).color, direct));
  }

  double b = 0.0;
  const auto solo = render_fields(s.fields, s.camera, view, s.geom, s.render);
  ImageD mean = solo[0];
  for (std::size_t i = 0; i < mean.data.size(); ++i) mean.data[i] = 0.5 * (solo[0].data[i] + solo[1].data[i]);
  for (BlendMethod m : {BlendMethod::IDW2D, BlendMethod::IDW3D, BlendMethod::IDWSample}) {
    BlendConfig cfg;
    cfg.method = m;
    cfg.gamma = 1e-9;
    cfg.tau = 100.0;
    cfg.render = s.render;
    b = std::max(b, max_diff(blend_image(s.fields, s.camera, view, s.geom, cfg).color, mean));
  }

  const Pose off = look_at_pose(Vec3(0.5, -3.0, 0.1), Vec3::Zero());
  BlendConfig cn;
  cn.method = BlendMethod::Nearest;
  cn.tau = 100.0;
  cn.render = s.render;
  BlendConfig ci = cn;
  ci.method = BlendMethod::IDW2D;
  ci.gamma = 1e6;
  const double c = max_diff(blend_image(s.fields, s.camera, off, s.geom, ci).color,
                            blend_image(s.fields, s.camera, off, s.geom, cn).color);

  // (d) and (e) over the rays of the two-field scene.
  double d = 0.0, e = 0.0;
  const RayBundle rays = generate_rays(s.camera, view, s.geom, RayConvention::Conventional);
  const std::vector<Vec3> centers{s.fields[0].center(), s.fields[1].center()};
  const std::vector<Vec3> bgs{s.fields[0].field.background, s.fields[1].field.background};
  RenderOptions shifted = s.render;
  shifted.n_samples = 77;
  for (std::size_t p = 0; p < rays.directions.size(); ++p) {
    const Ray ray{rays.origin, rays.directions[p]};
    const std::vector<std::vector<MassSample>> per_field{render_field_ray(s.fields[0], ray, s.render).samples,
                                                         render_field_ray(s.fields[1], ray, shifted).samples};
    const auto merged = merge_samples(per_field);
    for (std::size_t f = 0; f < 2; ++f) {
      double before = 0.0, after = 0.0;
      for (const auto& smp : per_field[f]) before += smp.mass;
      for (const auto& m : merged) after += m.mass[f];
      d = std::max(d, std::abs(before - after));
    }
    const SampleBlend sb = blend_ray_idw_sample(merged, centers, ray, 10.0, bgs);
    if (sb.zero_mass) continue;
    e = std::max(e, std::abs(sb.weighted_mass - 1.0));
    double bg_row = 0.0;
    for (double w : sb.weights.back()) bg_row += w;
    for (std::size_t k = 0; k < merged.size(); ++k) {
      double row = 0.0;
      for (double w : sb.weights[k]) row += w;
      e = std::max(e, std::abs(row / bg_row - 1.0));
    }
  }
  out.detail << "(a) " << a << " (b) " << b << " (c) " << c << " (d) " << d << " (e) " << e;
  out.require(a <= 1e-9, "(a) single field");
  out.require(b <= 1e-6, "(b) mean image");
  out.require(c <= 1e-9, "(c) nearest limit");
  out.require(d <= 1e-12, "(d) mass conservation");
  out.require(e <= 1e-12, "(e) normalization");
}

// 8
void check_blending_quality(Outcome& out) {
  const TwoFieldScene s = make_two_field_scene(128);
  BlendConfig cfg;
  cfg.method = BlendMethod::IDWSample;
  cfg.render = s.render;
  double worst_margin = 1e9;
  for (std::size_t v = 0; v < s.views.size(); ++v) {
    const ImageD truth = render_image(s.truth, s.camera, s.views[v], s.geom, s.render).color;
    const auto solo = render_fields(s.fields, s.camera, s.views[v], s.geom, s.render);
    const double blended = psnr(blend_image(s.fields, s.camera, s.views[v], s.geom, cfg).color, truth);
    const double best_field = std::max(psnr(solo[0], truth), psnr(solo[1], truth));
    out.detail << "view " << v << ": " << blended << " vs " << best_field << " dB; ";
    worst_margin = std::min(worst_margin, blended - best_field);
  }
  out.require(worst_margin >= 1.0, "IDW-Sample >= each field + 1 dB on every view");
}

// 9
void check_augmentation(Outcome& out) {
  Rng rng(9);
  PoseSet set;
  for (int i = 0; i < 16; ++i) {
    Pose p;
    p.world_from_camera.rotation = random_rotation(rng);
    p.world_from_camera.translation = Vec3(uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3));
    set.poses.push_back(p);
  }
  JitterConfig cfg;
  cfg.sigma_t = 0.5;
  cfg.sigma_r = 0.3;
  cfg.seed = 99;
  const PoseSet jit = canonical_jitter(set, cfg);
  const PoseSet ran = canonical_randomize(set, 1234);
  double dist = 0.0, angle = 0.0, rel = 0.0;
  for (std::size_t i = 0; i < set.poses.size(); ++i) {
    for (std::size_t j = 0; j < set.poses.size(); ++j) {
      const auto& a = set.poses;
      const auto& b = jit.poses;
      dist = std::max(dist, std::abs((b[i].center() - b[j].center()).norm() - (a[i].center() - a[j].center()).norm()));
      angle = std::max(angle, std::abs(rotation_geodesic_deg(b[i].rotation(), b[j].rotation()) -
                                       rotation_geodesic_deg(a[i].rotation(), a[j].rotation())));
      const RigidTransform e0 = a[i].world_from_camera.inverse() * a[j].world_from_camera.inverse().inverse();
      const RigidTransform e1 =
          ran.poses[i].world_from_camera.inverse() * ran.poses[j].world_from_camera.inverse().inverse();
      rel = std::max({rel, (e0.rotation - e1.rotation).cwiseAbs().maxCoeff(),
                      (e0.translation - e1.translation).cwiseAbs().maxCoeff()});
    }
  }
  const RigidTransform& o = ran.poses[ran.canonical].world_from_camera;
  const bool identity = o.rotation == Mat3::Identity() && o.translation == Vec3::Zero();
  out.detail << "jitter: distance " << dist << ", angle " << angle << " deg; randomize: relative " << rel
             << ", pose " << ran.canonical << " identity " << (identity ? "yes" : "no");
  out.require(dist <= 1e-9 && angle <= 1e-9, "jitter preserves distances and angles");
  out.require(rel <= 1e-12, "randomization preserves relative transforms");
  out.require(identity, "canonical pose is the identity");
}

// 10
void check_slab_quadrature(Outcome& out) {
  const double sigma = 4.0, a = 0.75, b = 0.75 + (128.0 + 1.0 / 3.0) / 256.0;
  Field f;
  f.primitives.push_back(Primitive::box(Vec3(0, 0, 0.5 * (a + b)), Vec3(1, 1, 0.5 * (b - a)), sigma, Vec3(1, 0, 0)));
  const double exact = 1.0 - std::exp(-sigma * (b - a));
  auto error = [&](int n) {
    return std::abs(render_ray(sample_ray(f, Ray{Vec3::Zero(), Vec3::UnitZ()}, 0.5, 1.5, n), Vec3::Zero())
                        .accumulation -
                    exact);
  };
  const double e256 = error(256), e512 = error(512), e1024 = error(1024);
  out.detail << "error n=256 " << e256 << ", ratios " << e256 / e512 << ", " << e512 / e1024;
  out.require(e256 < 1e-3, "error < 1e-3 at n = 256");
  out.require(std::abs(e256 / e512 - 2.0) < 0.1 && std::abs(e512 / e1024 - 2.0) < 0.1, "error halves per doubling");
}

// 11
void check_determinism(Outcome& out) {
  const fs::path root = fs::temp_directory_path() / ("fieldfuse_acceptance_" + std::to_string(std::random_device{}()));
  std::vector<std::pair<std::string, Json>> runs;
  for (const auto& name : command_names()) {
    if (name == "eval" || name == "experiment") continue;
    runs.emplace_back(name, Json::object());
  }
  for (const auto& exp : experiment_names()) {
    Json cfg{{"name", exp}};
    if (exp == "gamma-sweep") cfg["resolution"] = 16;
    runs.emplace_back("experiment", cfg);
  }
  int identical = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& [name, cfg] = runs[i];
    const fs::path a = root / (std::to_string(i) + "a"), b = root / (std::to_string(i) + "b");
    run_command(name, cfg, 2024, a);
    run_command(name, cfg, 2024, b);
    if (read_text(a / "report.json") == read_text(b / "report.json")) ++identical;
    else out.require(false, name + " " + cfg.dump());
  }
  const Json ev{{"a", (root / "1a" / "color.png").string()}, {"b", (root / "1b" / "color.png").string()}};
  run_command("eval", ev, 0, root / "eval_a");
  run_command("eval", ev, 0, root / "eval_b");
  if (read_text(root / "eval_a" / "report.json") == read_text(root / "eval_b" / "report.json")) ++identical;
  else out.require(false, "eval");
  out.detail << identical << "/" << runs.size() + 1 << " command runs byte-identical";
  fs::remove_all(root);
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 when the criterion has no runtime bound
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "camera round-trip", 2.0, check_camera_round_trip},
      {2, "jacobians vs central differences", 0.0, check_jacobians},
      {3, "calibration recovery from image-shape defaults", 0.0, check_calibration_recovery},
      {4, "perturbation protocol", 30.0, check_perturbation},
      {5, "registration", 10.0, check_registration},
      {6, "distant accumulation discrimination", 0.0, check_distant_accumulation},
      {7, "blending laws", 0.0, check_blending_laws},
      {8, "blending quality on the two-field scene", 60.0, check_blending_quality},
      {9, "augmentation invariants", 0.0, check_augmentation},
      {10, "renderer quadrature", 0.0, check_slab_quadrature},
      {11, "determinism", 0.0, check_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && seconds >= c.budget_s) out.require(false, "runtime budget " + std::to_string(c.budget_s) + " s");
    if (!out.pass) ++failed;
    std::printf("%s %2d %-48s %8.3f s  %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                out.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
