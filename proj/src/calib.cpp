// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/calib.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "fieldfuse/parallel.hpp"
#include "fieldfuse/random.hpp"

namespace fieldfuse {

namespace {

constexpr double kDegenerateProbe = 0.05;

Vec3 camera_point(const Correspondence& c) { return c.pose.world_from_camera.inverse().apply(c.world_point); }

// Keeps the optimizer inside the parameter domain (alpha < 1 keeps zeta finite).
Eigen::VectorXd clamp_params(CameraKind kind, Eigen::VectorXd p) {
  p[0] = std::max(p[0], 1e-6);
  p[1] = std::max(p[1], 1e-6);
  if (kind != CameraKind::Pinhole) p[4] = std::clamp(p[4], 0.0, 1.0 - 1e-6);
  if (kind == CameraKind::EUCM) p[5] = std::max(p[5], 1e-6);
  if (kind == CameraKind::DS) p[5] = std::clamp(p[5], -1.0 + 1e-6, 1.0 - 1e-6);
  return p;
}

struct NormalEquations {
  double cost = 0.0;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  bool all_valid = true;
};

NormalEquations assemble(const CameraModel& model, std::span<const Correspondence> data,
                         const std::vector<Vec3>& points, const SolverOptions& options, bool with_jacobians) {
  const int k = model.param_count();
  struct Row {
    Eigen::Vector2d residual;
    Eigen::MatrixXd jacobian;
    bool valid = false;
  };
  std::vector<Row> rows(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    const auto px = try_project(model, points[i]);
    if (!px) return;
    rows[i].valid = true;
    rows[i].residual = *px - data[i].pixel;
    if (with_jacobians) rows[i].jacobian = project_jacobians(model, points[i]).d_params;
  });

  NormalEquations ne;
  ne.hessian = Eigen::MatrixXd::Zero(k, k);
  ne.gradient = Eigen::VectorXd::Zero(k);
  for (const Row& row : rows) {
    if (!row.valid) {
      ne.all_valid = false;
      return ne;
    }
    const double e = row.residual.norm();
    double w = 1.0;
    if (options.huber && e > options.huber_delta) {
      w = options.huber_delta / e;
      ne.cost += options.huber_delta * (e - 0.5 * options.huber_delta);
    } else {
      ne.cost += 0.5 * e * e;
    }
    if (with_jacobians) {
      ne.hessian.noalias() += w * row.jacobian.transpose() * row.jacobian;
      ne.gradient.noalias() += w * row.jacobian.transpose() * row.residual;
    }
  }
  return ne;
}

// A parameter the residuals do not depend on at all.
bool has_unobservable_parameter(const Eigen::MatrixXd& hessian) {
  const Eigen::VectorXd diag = hessian.diagonal();
  return diag.minCoeff() <= std::numeric_limits<double>::min() * 1e10 * std::max(1.0, diag.maxCoeff());
}

bool is_singular(const Eigen::MatrixXd& hessian) {
  if (has_unobservable_parameter(hessian)) return true;
  const Eigen::VectorXd diag = hessian.diagonal();
  const Eigen::VectorXd scale = diag.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd normalized = scale.asDiagonal() * hessian * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() < 1e-12;
}

}  // namespace

ReprojectionReport reprojection_report(const CameraModel& model, std::span<const Correspondence> data) {
  if (data.empty()) throw Error(ErrorCode::InvalidArgument, "at least one correspondence is required");
  ReprojectionReport report;
  double valid_sum = 0.0;
  for (const auto& c : data) {
    if (auto px = try_project(model, camera_point(c))) {
      valid_sum += (*px - c.pixel).norm();
      ++report.valid;
    } else {
      ++report.penalized;
    }
  }
  if (report.valid == 0) throw Error(ErrorCode::AllInvalid, "no correspondence projects under the model");
  report.mre_valid = valid_sum / static_cast<double>(report.valid);
  report.mre = (valid_sum + kInvalidProjectionPenalty * static_cast<double>(report.penalized)) /
               static_cast<double>(data.size());
  return report;
}

double mean_reprojection_error(const CameraModel& model, std::span<const Correspondence> data) {
  return reprojection_report(model, data).mre;
}

namespace {

// Levenberg-Marquardt from the last entry of `result.trace`, appending to it.
// A parameter index in `held` stays fixed throughout.
struct Stage {
  CameraKind kind;
  std::span<const Correspondence> data;
  const std::vector<Vec3>& points;
  const SolverOptions& options;

  NormalEquations run(CalibResult& result, NormalEquations ne, int frozen, int budget, int held) const {
    Eigen::VectorXd params = result.trace.back();
    auto record = [&] {
      result.trace.push_back(params);
      result.cost_trace.push_back(ne.cost);
      result.mre_trace.push_back(mean_reprojection_error(CameraModel::from_params(kind, params), data));
    };
    result.converged = false;
    double lambda = options.lambda_initial;
    for (int it = 0; it < budget; ++it) {
      ++result.iterations;
      if (it < frozen) {
        record();
        continue;
      }
      Eigen::MatrixXd hessian = ne.hessian;
      Eigen::VectorXd gradient = ne.gradient;
      if (held >= 0) {
        hessian.row(held).setZero();
        hessian.col(held).setZero();
        hessian(held, held) = 1.0;
        gradient[held] = 0.0;
      }
      if (ne.cost == 0.0 || gradient.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
        --result.iterations;
        result.converged = true;
        break;
      }
      if (has_unobservable_parameter(ne.hessian))
        throw Error(ErrorCode::SingularNormalEquations, "normal equations are rank deficient");

      bool accepted = false;
      Eigen::VectorXd candidate;
      NormalEquations next;
      while (lambda <= 1e16) {
        Eigen::MatrixXd damped = hessian;
        damped.diagonal() += lambda * hessian.diagonal();
        const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
        if (step.allFinite()) {
          candidate = clamp_params(kind, params + step);
          next = assemble(CameraModel::from_params(kind, candidate), data, points, options, true);
          if (next.all_valid && next.cost < ne.cost) {
            accepted = true;
            lambda = std::max(lambda / options.lambda_factor, 1e-12);
            break;
          }
        }
        lambda *= options.lambda_factor;
      }
      if (!accepted) {
        // No damped step lowers the cost: numerically at the minimum.
        record();
        result.converged = true;
        break;
      }
      const double relative_decrease = (ne.cost - next.cost) / ne.cost;
      params = candidate;
      ne = std::move(next);
      record();
      if (relative_decrease < options.relative_cost_tolerance) {
        result.converged = true;
        break;
      }
    }
    return ne;
  }
};

// Unit-diagonal-scaled eigenvector of the smallest eigenvalue.
Eigen::VectorXd null_direction(const Eigen::MatrixXd& hessian) {
  const Eigen::VectorXd scale = hessian.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd normalized = scale.asDiagonal() * hessian * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized);
  return scale.asDiagonal() * eig.eigenvectors().col(0);
}

}  // namespace

CalibResult solve_intrinsics(const CameraModel& initial, std::span<const Correspondence> data,
                             const SolverOptions& options) {
  initial.validate();
  const CameraKind kind = initial.kind;
  const int k = initial.param_count();
  if (static_cast<int>(data.size()) < k)
    throw Error(ErrorCode::InvalidArgument, "fewer correspondences than camera parameters");

  std::vector<Vec3> points(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) points[i] = camera_point(data[i]);

  const Eigen::VectorXd start = clamp_params(kind, initial.params());
  NormalEquations ne = assemble(CameraModel::from_params(kind, start), data, points, options, true);
  if (!ne.all_valid)
    throw Error(ErrorCode::InvalidArgument, "initial model does not project every correspondence");
  if (has_unobservable_parameter(ne.hessian))
    throw Error(ErrorCode::SingularNormalEquations, "normal equations are rank deficient");

  CalibResult result;
  result.trace.push_back(start);
  result.cost_trace.push_back(ne.cost);
  result.mre_trace.push_back(mean_reprojection_error(CameraModel::from_params(kind, start), data));
  const Stage stage{kind, data, points, options};
  const int budget = options.max_iterations;

  if (k == 6 && is_singular(ne.hessian)) {
    // The start lies on a parametric degeneracy (DS at xi = 0 is UCM, and
    // there the xi column is a combination of the focal and alpha columns).
    // The reduced problem with the last parameter held is solved first; its
    // solution is stationary for the full problem, so both sides of the
    // degenerate direction are explored and the lower cost wins.
    ne = stage.run(result, std::move(ne), options.frozen_iterations, budget, 5);
    const Eigen::VectorXd base = result.trace.back();
    Eigen::VectorXd dir = null_direction(ne.hessian);
    if (std::abs(dir[5]) > 0.0) dir /= dir[5];
    const int used = result.iterations;
    std::optional<CalibResult> best;
    std::optional<NormalEquations> best_ne;
    for (const double side : {-1.0, 1.0}) {
      // The probe is profiled with the last parameter held at its probed
      // value and enters the trace as a single step only if it descends.
      const Eigen::VectorXd seed = clamp_params(kind, base + side * kDegenerateProbe * dir);
      NormalEquations seeded = assemble(CameraModel::from_params(kind, seed), data, points, options, true);
      if (!seeded.all_valid) continue;
      CalibResult probe;
      probe.trace.push_back(seed);
      seeded = stage.run(probe, std::move(seeded), 0, std::max(budget - used, 1), 5);
      if (!(seeded.cost < ne.cost)) continue;
      CalibResult branch = result;
      branch.trace.push_back(probe.trace.back());
      branch.cost_trace.push_back(seeded.cost);
      branch.mre_trace.push_back(mean_reprojection_error(CameraModel::from_params(kind, probe.trace.back()), data));
      ++branch.iterations;
      NormalEquations out = stage.run(branch, std::move(seeded), 0, std::max(budget - used - 1, 0), -1);
      if (!best || out.cost < best_ne->cost) {
        best = std::move(branch);
        best_ne = std::move(out);
      }
    }
    if (best) {
      result = std::move(*best);
      ne = std::move(*best_ne);
    }
  } else {
    ne = stage.run(result, std::move(ne), options.frozen_iterations, budget, -1);
  }

  if (result.iterations > options.frozen_iterations && is_singular(ne.hessian))
    throw Error(ErrorCode::SingularNormalEquations, "normal equations are rank deficient at the solution");
  result.model = CameraModel::from_params(kind, result.trace.back());
  result.mre = mean_reprojection_error(result.model, data);
  if (!result.converged) result.status = ErrorCode::DivergedMaxIter;
  return result;
}

CameraModel perturb_params(const CameraModel& model, double factor) {
  if (!(factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "perturbation factor must be positive");
  return CameraModel::from_params(model.kind, clamp_params(model.kind, model.params() * factor));
}

CalibResult recalibrate(const CameraModel& initial, std::span<const Correspondence> data, bool warm_start,
                        const SolverOptions& options, double frozen_fraction) {
  SolverOptions opts = options;
  opts.frozen_iterations =
      warm_start ? static_cast<int>(std::ceil(std::clamp(frozen_fraction, 0.0, 1.0) * options.max_iterations)) : 0;
  // Frozen iterations do not consume the optimization budget.
  opts.max_iterations = options.max_iterations + opts.frozen_iterations;
  return solve_intrinsics(initial, data, opts);
}

std::vector<Correspondence> synthesize_correspondences(const CameraModel& truth, const ImageGeometry& geom,
                                                       const SyntheticCalibConfig& config, std::uint64_t seed) {
  truth.validate();
  if (config.count < 1 || config.poses < 1)
    throw Error(ErrorCode::InvalidArgument, "need at least one correspondence and one pose");
  Rng rng(seed);
  std::vector<Pose> poses(static_cast<std::size_t>(config.poses));
  for (auto& pose : poses) {
    const Vec3 angles = normal_vec3(rng, 0.3);
    pose.world_from_camera.rotation = euler_xyz(angles);
    pose.world_from_camera.translation = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
  }
  std::normal_distribution<double> noise(0.0, config.pixel_noise > 0.0 ? config.pixel_noise : 1.0);
  std::vector<Correspondence> out;
  out.reserve(static_cast<std::size_t>(config.count));
  const double u_lo = config.border, u_hi = geom.width - 1 - config.border;
  const double v_lo = config.border, v_hi = geom.height - 1 - config.border;
  int attempts = 0;
  while (static_cast<int>(out.size()) < config.count) {
    if (++attempts > 1000 * config.count)
      throw Error(ErrorCode::InvalidArgument, "camera domain does not cover the image");
    const Vec2 pixel(uniform(rng, u_lo, u_hi), uniform(rng, v_lo, v_hi));
    const double range = uniform(rng, config.min_range, config.max_range);
    const int pose_id = static_cast<int>(out.size() % poses.size());
    const auto ray = try_unproject_ray(truth, pixel);
    if (!ray) continue;
    Correspondence c;
    c.pose = poses[static_cast<std::size_t>(pose_id)];
    c.pose_id = pose_id;
    c.world_point = c.pose.world_from_camera.apply(range * *ray);
    c.pixel = pixel;
    if (config.pixel_noise > 0.0) {
      const double nu = noise(rng);
      const double nv = noise(rng);
      c.pixel += Vec2(nu, nv);
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace fieldfuse
