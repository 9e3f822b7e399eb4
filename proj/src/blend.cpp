// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/blend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fieldfuse/error.hpp"
#include "fieldfuse/parallel.hpp"

namespace fieldfuse {

const char* blend_method_name(BlendMethod method) {
  switch (method) {
    case BlendMethod::Nearest: return "nearest";
    case BlendMethod::IDW2D: return "idw2d";
    case BlendMethod::IDW3D: return "idw3d";
    case BlendMethod::IDWSample: return "idw-sample";
  }
  return "unknown";
}

BlendMethod blend_method_from_name(const std::string& name) {
  if (name == "nearest") return BlendMethod::Nearest;
  if (name == "idw2d" || name == "idw-2d") return BlendMethod::IDW2D;
  if (name == "idw3d" || name == "idw-3d") return BlendMethod::IDW3D;
  if (name == "idw-sample" || name == "idwsample") return BlendMethod::IDWSample;
  throw Error(ErrorCode::InvalidArgument, "unknown blend method '" + name + "'");
}

void BlendConfig::validate() const {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "blending rate gamma must be positive");
  if (!(tau >= 1.0)) throw Error(ErrorCode::InvalidArgument, "proximity ratio tau must be at least 1");
}

std::vector<std::size_t> proximity_test(const Vec3& camera_center, std::span<const Vec3> field_centers, double tau) {
  if (field_centers.empty()) throw Error(ErrorCode::InvalidArgument, "proximity test needs at least one field");
  std::vector<double> dist(field_centers.size());
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = (field_centers[i] - camera_center).norm();
  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  const double closest = dist[order.front()];
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool keep = closest > 0.0 ? dist[i] / closest <= tau : dist[i] == 0.0;
    if (keep) kept.push_back(i);
  }
  return kept;
}

std::vector<double> idw_weights(std::span<const double> distances, double gamma) {
  const std::size_t n = distances.size();
  std::vector<double> w(n, 0.0);
  if (n == 0) return w;
  const std::size_t zeros = static_cast<std::size_t>(std::count(distances.begin(), distances.end(), 0.0));
  if (zeros > 0) {
    for (std::size_t i = 0; i < n; ++i) w[i] = distances[i] == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
    return w;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) top = std::max(top, -gamma * std::log(distances[i]));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(-gamma * std::log(distances[i]) - top);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

std::vector<MassSample> to_mass_samples(std::span<const RaySample> samples, std::span<const double> masses) {
  if (samples.size() != masses.size()) throw Error(ErrorCode::DimensionMismatch, "one mass per sample required");
  std::vector<MassSample> out(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) out[k] = {samples[k].t, samples[k].delta, masses[k], samples[k].color};
  return out;
}

std::vector<MergedSample> merge_samples(const std::vector<std::vector<MassSample>>& per_field) {
  const std::size_t n_fields = per_field.size();
  std::vector<double> bounds;
  for (const auto& list : per_field) {
    for (const auto& s : list) {
      bounds.push_back(s.t - 0.5 * s.delta);
      bounds.push_back(s.t + 0.5 * s.delta);
    }
  }
  std::sort(bounds.begin(), bounds.end());
  // Boundaries closer than round-off are the same boundary.
  std::vector<double> merged_bounds;
  for (double b : bounds) {
    if (merged_bounds.empty() || b - merged_bounds.back() > 1e-12 * std::max(1.0, std::abs(b))) merged_bounds.push_back(b);
  }
  if (merged_bounds.size() < 2) return {};

  const std::size_t pieces = merged_bounds.size() - 1;
  std::vector<MergedSample> all(pieces);
  for (std::size_t j = 0; j < pieces; ++j) {
    all[j].t = 0.5 * (merged_bounds[j] + merged_bounds[j + 1]);
    all[j].delta = merged_bounds[j + 1] - merged_bounds[j];
    all[j].mass.assign(n_fields, 0.0);
    all[j].color.assign(n_fields, Vec3::Zero());
    all[j].covered.assign(n_fields, 0);
  }

  for (std::size_t f = 0; f < n_fields; ++f) {
    for (const auto& s : per_field[f]) {
      const double lo = s.t - 0.5 * s.delta;
      const double hi = s.t + 0.5 * s.delta;
      // First piece whose upper bound exceeds lo.
      std::size_t j = static_cast<std::size_t>(std::upper_bound(merged_bounds.begin(), merged_bounds.end(), lo) -
                                               merged_bounds.begin());
      j = j > 0 ? j - 1 : 0;
      std::vector<std::pair<std::size_t, double>> overlaps;
      double total = 0.0;
      for (; j < pieces && merged_bounds[j] < hi; ++j) {
        const double overlap = std::min(hi, merged_bounds[j + 1]) - std::max(lo, merged_bounds[j]);
        if (overlap <= 0.0) continue;
        overlaps.emplace_back(j, overlap);
        total += overlap;
      }
      if (total <= 0.0) continue;
      // Normalizing by the summed overlap keeps the split exactly mass-conserving.
      for (const auto& [piece, overlap] : overlaps) {
        all[piece].mass[f] += s.mass * overlap / total;
        all[piece].color[f] = s.color;
        all[piece].covered[f] = 1;
      }
    }
  }

  std::vector<MergedSample> out;
  out.reserve(pieces);
  for (auto& m : all) {
    if (std::any_of(m.covered.begin(), m.covered.end(), [](unsigned char c) { return c != 0; })) out.push_back(std::move(m));
  }
  return out;
}

SampleBlend blend_ray_idw_sample(const std::vector<MergedSample>& merged, std::span<const Vec3> field_centers,
                                 const Ray& ray, double gamma, std::span<const Vec3> backgrounds) {
  const std::size_t n = field_centers.size();
  if (backgrounds.size() != n) throw Error(ErrorCode::DimensionMismatch, "one background per field required");
  SampleBlend out;
  out.weights.assign(merged.size() + 1, std::vector<double>(n, 0.0));

  // Step (i): weights over covering fields sum to one per sample.
  std::vector<double> dist;
  std::vector<std::size_t> idx;
  std::vector<double> accumulated(n, 0.0);
  for (std::size_t k = 0; k < merged.size(); ++k) {
    const MergedSample& m = merged[k];
    dist.clear();
    idx.clear();
    const Vec3 x = ray.origin + m.t * ray.direction;
    for (std::size_t i = 0; i < n; ++i) {
      accumulated[i] += m.mass[i];
      if (!m.covered[i]) continue;
      idx.push_back(i);
      dist.push_back((field_centers[i] - x).norm());
    }
    const std::vector<double> w = idw_weights(dist, gamma);
    for (std::size_t j = 0; j < idx.size(); ++j) out.weights[k][idx[j]] = w[j];
  }
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) {
    residual[i] = std::max(0.0, 1.0 - accumulated[i]);
    out.weights.back()[i] = 1.0 / static_cast<double>(n);
  }

  // Step (ii): global renormalization of the weighted mass.
  double total = 0.0;
  for (std::size_t k = 0; k < merged.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) total += out.weights[k][i] * merged[k].mass[i];
  for (std::size_t i = 0; i < n; ++i) total += out.weights.back()[i] * residual[i];

  if (!(total > 0.0)) {
    out.zero_mass = true;
    for (const auto& b : backgrounds) out.color += b / static_cast<double>(n);
    return out;
  }
  for (auto& row : out.weights)
    for (double& w : row) w /= total;

  for (std::size_t k = 0; k < merged.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double wp = out.weights[k][i] * merged[k].mass[i];
      out.weighted_mass += wp;
      out.color += wp * merged[k].color[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double wp = out.weights.back()[i] * residual[i];
    out.weighted_mass += wp;
    out.color += wp * backgrounds[i];
  }
  return out;
}

FieldRay render_field_ray(const RegisteredField& field, const Ray& global_ray, const RenderOptions& options) {
  const int n = options.n_samples;
  if (!(options.t_near > 0.0) || !(options.t_far > options.t_near) || n < 2)
    throw Error(ErrorCode::InvalidArgument, "render range needs 0 < t_near < t_far and n >= 2");
  const SimTransform to_local = inverse(field.to_global);
  // Density is per unit length, so it rescales with the frame.
  const double density_scale = to_local.scale;
  std::vector<RaySample> samples(static_cast<std::size_t>(n));
  const double span = options.t_far - options.t_near;
  for (int k = 0; k < n; ++k) {
    const double lo = options.t_near + span * k / n;
    const double hi = options.t_near + span * (k + 1) / n;
    RaySample& s = samples[k];
    s.t = 0.5 * (lo + hi);
    s.delta = hi - lo;
    const FieldValue v = field.field.eval(to_local.apply(global_ray.origin + s.t * global_ray.direction));
    s.sigma = v.sigma * density_scale;
    s.color = v.color;
  }
  FieldRay out;
  out.render = render_ray(samples, field.field.background);
  out.samples = to_mass_samples(samples, out.render.masses);
  return out;
}

std::vector<ImageD> render_fields(std::span<const RegisteredField> fields, const CameraModel& model, const Pose& pose,
                                  const ImageGeometry& geom, const RenderOptions& options) {
  const RayBundle rays = generate_rays(model, pose, geom, RayConvention::Conventional);
  std::vector<ImageD> out(fields.size(), ImageD(geom.width, geom.height, 3));
  parallel_for(rays.directions.size(), [&](std::size_t p) {
    for (std::size_t f = 0; f < fields.size(); ++f) {
      Vec3 color = fields[f].field.background;
      if (rays.valid[p]) color = render_field_ray(fields[f], {rays.origin, rays.directions[p]}, options).render.color;
      for (int c = 0; c < 3; ++c) out[f].data[3 * p + c] = color[c];
    }
  });
  return out;
}

BlendedImage blend_image(std::span<const RegisteredField> fields, const CameraModel& model, const Pose& pose,
                         const ImageGeometry& geom, const BlendConfig& config) {
  config.validate();
  std::vector<Vec3> centers(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) centers[i] = fields[i].center();
  BlendedImage out;
  out.fields_used = proximity_test(pose.center(), centers, config.tau);
  out.color = ImageD(geom.width, geom.height, 3);

  const std::size_t m = out.fields_used.size();
  std::vector<Vec3> used_centers(m), backgrounds(m);
  std::vector<double> camera_dist(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& f = fields[out.fields_used[j]];
    used_centers[j] = f.center();
    backgrounds[j] = f.field.background;
    camera_dist[j] = (used_centers[j] - pose.center()).norm();
  }
  const std::vector<double> image_weights = idw_weights(camera_dist, config.gamma);

  const RayBundle rays = generate_rays(model, pose, geom, RayConvention::Conventional);
  std::vector<unsigned char> zero_mass(rays.directions.size(), 0);
  parallel_for(rays.directions.size(), [&](std::size_t p) {
    Vec3 color = backgrounds.front();
    if (rays.valid[p]) {
      const Ray ray{rays.origin, rays.directions[p]};
      switch (config.method) {
        case BlendMethod::Nearest:
          color = render_field_ray(fields[out.fields_used.front()], ray, config.render).render.color;
          break;
        case BlendMethod::IDW2D: {
          color = Vec3::Zero();
          for (std::size_t j = 0; j < m; ++j)
            color += image_weights[j] * render_field_ray(fields[out.fields_used[j]], ray, config.render).render.color;
          break;
        }
        case BlendMethod::IDW3D: {
          std::vector<RenderResult> renders(m);
          std::vector<double> dist(m);
          for (std::size_t j = 0; j < m; ++j) {
            renders[j] = render_field_ray(fields[out.fields_used[j]], ray, config.render).render;
            // Each field's own expected termination point; the camera center
            // stands in when the field has no mass on this ray.
            const Vec3 x = renders[j].accumulation > 0.0 ? Vec3(ray.origin + renders[j].depth * ray.direction) : ray.origin;
            dist[j] = (used_centers[j] - x).norm();
          }
          const std::vector<double> w = idw_weights(dist, config.gamma);
          color = Vec3::Zero();
          for (std::size_t j = 0; j < m; ++j) color += w[j] * renders[j].color;
          break;
        }
        case BlendMethod::IDWSample: {
          std::vector<std::vector<MassSample>> per_field(m);
          for (std::size_t j = 0; j < m; ++j)
            per_field[j] = render_field_ray(fields[out.fields_used[j]], ray, config.render).samples;
          const SampleBlend b =
              blend_ray_idw_sample(merge_samples(per_field), used_centers, ray, config.gamma, backgrounds);
          color = b.color;
          zero_mass[p] = b.zero_mass ? 1 : 0;
          break;
        }
      }
    }
    for (int c = 0; c < 3; ++c) out.color.data[3 * p + c] = color[c];
  });
  out.zero_mass_pixels = static_cast<std::size_t>(std::count(zero_mass.begin(), zero_mass.end(), 1));
  return out;
}

}  // namespace fieldfuse
