// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/register.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldfuse/error.hpp"
#include "fieldfuse/random.hpp"

namespace fieldfuse {

namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

bool finite_pose(const Pose& p) {
  return p.world_from_camera.rotation.allFinite() && p.world_from_camera.translation.allFinite();
}

}  // namespace

std::vector<Pose> filter_poses_by_quality(std::span<const RenderQuality> renders, double threshold) {
  std::vector<Pose> kept;
  for (const auto& r : renders)
    if (r.mean_distant_accumulation >= threshold) kept.push_back(r.pose);
  if (kept.size() < 2) throw Error(ErrorCode::TooFewPoses, "fewer than two renders pass the quality filter");
  return kept;
}

RegistrationResult solve_frame_transform(std::span<const PoseCorrespondence> data) {
  std::vector<PoseCorrespondence> usable;
  for (const auto& c : data)
    if (finite_pose(c.local) && finite_pose(c.shared)) usable.push_back(c);

  RegistrationResult result;
  result.used = usable.size();
  if (usable.size() < 2) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    result.transform.scale = nan;
    result.transform.rotation.setConstant(nan);
    result.transform.translation.setConstant(nan);
    return result;
  }

  const std::size_t n = usable.size();
  std::vector<double> scales;
  scales.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ds = (usable[i].shared.center() - usable[j].shared.center()).norm();
      if (ds < 1e-12) continue;
      scales.push_back((usable[i].local.center() - usable[j].local.center()).norm() / ds);
    }
  }
  if (scales.empty()) throw Error(ErrorCode::DegenerateBaseline, "shared-frame centers coincide; scale unobservable");
  const double scale = median(scales);

  std::vector<Mat3> rotations(n);
  for (std::size_t k = 0; k < n; ++k) rotations[k] = usable[k].local.rotation() * usable[k].shared.rotation().transpose();
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    double cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) cost += rotation_geodesic_deg(rotations[k], rotations[j]);
    if (cost < best_cost) {
      best_cost = cost;
      best = k;
    }
  }
  const Mat3 rotation = rotations[best];

  std::vector<Vec3> translations(n);
  for (std::size_t k = 0; k < n; ++k)
    translations[k] = usable[k].local.center() - scale * (rotation * usable[k].shared.center());
  // Per-component median along the axes of R*, so that a rigid change of
  // the local frame carries the result along with it.
  Vec3 aligned;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> comp(n);
    for (std::size_t k = 0; k < n; ++k) comp[k] = rotation.col(axis).dot(translations[k]);
    aligned[axis] = median(comp);
  }
  const Vec3 translation = rotation * aligned;

  result.transform = {scale, rotation, translation};
  result.scale_candidates = scales.size();
  result.rotation_candidates = n;
  result.translation_candidates = n;

  std::vector<double> dev(scales.size());
  for (std::size_t i = 0; i < scales.size(); ++i) dev[i] = std::abs(scales[i] - scale);
  result.scale_mad = median(dev);
  dev.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) dev[k] = rotation_geodesic_deg(rotation, rotations[k]);
  result.rotation_mad_deg = median(dev);
  for (std::size_t k = 0; k < n; ++k) dev[k] = (translations[k] - translation).norm();
  result.translation_mad = median(dev);

  result.success = std::isfinite(scale) && scale > 0.0 && rotation.allFinite() && translation.allFinite();
  return result;
}

SimTransform relative_field_transform(const RegistrationResult& a, const RegistrationResult& b) {
  if (!a.success || !b.success) throw Error(ErrorCode::InvalidArgument, "relative transform needs two successful registrations");
  return compose(a.transform, inverse(b.transform));
}

RegistrationErrors registration_errors(const SimTransform& estimate, const SimTransform& truth,
                                       const RegistrationRubric& rubric) {
  RegistrationErrors e;
  e.rotation_deg = rotation_geodesic_deg(estimate.rotation, truth.rotation);
  e.translation = (estimate.translation - truth.translation).norm();
  e.scale = std::abs(estimate.scale / truth.scale - 1.0);
  const bool finite = std::isfinite(e.rotation_deg) && std::isfinite(e.translation) && std::isfinite(e.scale) &&
                      estimate.rotation.allFinite();
  e.success = finite && e.rotation_deg <= rubric.max_rotation_deg && e.translation <= rubric.max_translation &&
              e.scale <= rubric.max_scale;
  return e;
}

std::vector<PoseCorrespondence> synthesize_pose_correspondences(const std::vector<Pose>& local,
                                                                const SimTransform& shared_to_local,
                                                                const SyntheticRegistrationConfig& config,
                                                                std::uint64_t seed) {
  Rng rng(seed);
  const SimTransform local_to_shared = inverse(shared_to_local);
  const std::size_t outliers = static_cast<std::size_t>(std::llround(config.outlier_fraction * local.size()));

  // Outlier slots are a seeded random subset.
  std::vector<std::size_t> order(local.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<unsigned char> is_outlier(local.size(), 0);
  for (std::size_t i = 0; i < outliers && i < order.size(); ++i) is_outlier[order[i]] = 1;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : local) {
    const Vec3 c = local_to_shared.apply(p.center());
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }

  std::normal_distribution<double> angle_noise(0.0, 1.0);
  std::vector<PoseCorrespondence> out;
  out.reserve(local.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    PoseCorrespondence c;
    c.local = local[i];
    if (is_outlier[i]) {
      c.shared.world_from_camera.rotation = random_rotation(rng);
      c.shared.world_from_camera.translation =
          Vec3(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()), uniform(rng, lo.z(), hi.z()));
    } else {
      Mat3 r_local = local[i].rotation();
      if (config.rotation_noise_deg > 0.0) {
        Vec3 axis = normal_vec3(rng, 1.0);
        axis.normalize();
        const double angle = deg2rad(config.rotation_noise_deg) * angle_noise(rng);
        r_local = Eigen::AngleAxisd(angle, axis).toRotationMatrix() * r_local;
      }
      const Vec3 c_local = local[i].center() + normal_vec3(rng, config.translation_noise);
      c.shared.world_from_camera.rotation = shared_to_local.rotation.transpose() * r_local;
      c.shared.world_from_camera.translation = local_to_shared.apply(c_local);
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace fieldfuse
