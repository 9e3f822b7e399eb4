// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "fieldfuse/camera.hpp"
#include "fieldfuse/error.hpp"
#include "fieldfuse/geometry.hpp"

namespace fieldfuse {

/// A world point observed at `pixel` by a camera with pose `pose`.
struct Correspondence {
  Vec3 world_point = Vec3::Zero();
  Vec2 pixel = Vec2::Zero();
  Pose pose;
  int pose_id = 0;
};

/// Pixel error charged to a correspondence that no longer projects.
constexpr double kInvalidProjectionPenalty = 1000.0;

struct ReprojectionReport {
  double mre = 0.0;            // mean over all correspondences, penalties included
  double mre_valid = 0.0;      // mean over projecting correspondences only
  std::size_t valid = 0;
  std::size_t penalized = 0;
};

/// Throws AllInvalid when no correspondence projects.
ReprojectionReport reprojection_report(const CameraModel& model, std::span<const Correspondence> data);
double mean_reprojection_error(const CameraModel& model, std::span<const Correspondence> data);

struct SolverOptions {
  int max_iterations = 100;
  double lambda_initial = 1e-3;
  double lambda_factor = 10.0;
  double relative_cost_tolerance = 1e-10;
  double gradient_tolerance = 1e-8;
  bool huber = false;
  double huber_delta = 1.0;
  /// Leading iterations with all intrinsics frozen (warm start).
  int frozen_iterations = 0;
};

struct CalibResult {
  CameraModel model;
  double mre = 0.0;
  int iterations = 0;
  bool converged = false;
  ErrorCode status = ErrorCode::Ok;  // DivergedMaxIter when the budget ran out
  std::vector<Eigen::VectorXd> trace;  // parameters after each iteration, initial first
  std::vector<double> cost_trace;
  std::vector<double> mre_trace;
};

/// Levenberg-Marquardt over the intrinsics with poses held fixed. Throws
/// SingularNormalEquations for rank-deficient geometry and InvalidArgument
/// when there are fewer correspondences than parameters.
CalibResult solve_intrinsics(const CameraModel& initial, std::span<const Correspondence> data,
                             const SolverOptions& options = {});

/// Every parameter scaled by `factor`; alpha and xi re-clamped into range.
CameraModel perturb_params(const CameraModel& model, double factor);

/// solve_intrinsics with an optional warm start that freezes the intrinsics
/// for the first `frozen_fraction` of the iteration budget.
CalibResult recalibrate(const CameraModel& initial, std::span<const Correspondence> data, bool warm_start,
                        const SolverOptions& options = {}, double frozen_fraction = 0.1);

struct SyntheticCalibConfig {
  int count = 2000;
  int poses = 10;
  double pixel_noise = 0.0;
  double min_range = 1.0;
  double max_range = 4.0;
  /// Pixels are drawn this far inside the image border.
  double border = 2.0;
};

/// Correspondences generated by `truth`: uniform pixels inside the image and
/// its valid domain, random ranges, random camera poses, optional gaussian
/// pixel noise on the observations.
std::vector<Correspondence> synthesize_correspondences(const CameraModel& truth, const ImageGeometry& geom,
                                                       const SyntheticCalibConfig& config, std::uint64_t seed);

}  // namespace fieldfuse
