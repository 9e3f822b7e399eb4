// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fieldfuse/geometry.hpp"

namespace fieldfuse {

/// One re-rendered view: its sampled pose in the field's own frame and the
/// pose recovered for it in the shared frame (arbitrary scale).
struct PoseCorrespondence {
  Pose local;
  Pose shared;
};

struct RegistrationResult {
  SimTransform transform;  // shared -> local
  std::size_t used = 0;    // finite correspondences
  std::size_t scale_candidates = 0;
  std::size_t rotation_candidates = 0;
  std::size_t translation_candidates = 0;
  // Median absolute deviations of the candidate sets around the aggregate.
  double scale_mad = 0.0;
  double rotation_mad_deg = 0.0;
  double translation_mad = 0.0;
  bool success = false;  // finite transform with positive scale
};

struct RenderQuality {
  Pose pose;
  double mean_distant_accumulation = 0.0;
};

/// Poses whose mean q_d reaches `threshold`, in input order. Throws
/// TooFewPoses when fewer than two survive.
std::vector<Pose> filter_poses_by_quality(std::span<const RenderQuality> renders, double threshold);

/// Scale: median over pairs of local/shared center distance ratios.
/// Rotation: the candidate R_L R_S^T with the least summed geodesic distance
/// to all candidates. Translation: per-component median of c_L - s R c_S,
/// with components taken along the axes of R.
///
/// Non-finite correspondences are skipped; if fewer than two remain the
/// result has success = false. Throws DegenerateBaseline when every shared
/// center coincides.
RegistrationResult solve_frame_transform(std::span<const PoseCorrespondence> data);

/// T_BA = T_A o T_B^-1, so that p_A = T_BA p_B.
SimTransform relative_field_transform(const RegistrationResult& a, const RegistrationResult& b);

/// Failure limits for a registration estimate.
struct RegistrationRubric {
  double max_rotation_deg = 5.0;
  double max_translation = 0.2;
  double max_scale = 0.1;
};

struct RegistrationErrors {
  double rotation_deg = 0.0;
  double translation = 0.0;  // target-frame units
  double scale = 0.0;        // |s_hat / s - 1|
  bool success = false;      // all finite and within the rubric
};

RegistrationErrors registration_errors(const SimTransform& estimate, const SimTransform& truth,
                                       const RegistrationRubric& rubric = {});

struct SyntheticRegistrationConfig {
  double rotation_noise_deg = 0.0;
  double translation_noise = 0.0;  // local-frame units
  double outlier_fraction = 0.0;
};

/// Shared-frame poses generated from `local` poses through the inverse of
/// `shared_to_local`, with optional noise and random-pose outliers.
std::vector<PoseCorrespondence> synthesize_pose_correspondences(const std::vector<Pose>& local,
                                                                const SimTransform& shared_to_local,
                                                                const SyntheticRegistrationConfig& config,
                                                                std::uint64_t seed);

}  // namespace fieldfuse
