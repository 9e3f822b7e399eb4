// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldfuse/error.hpp"

namespace fieldfuse {

const char* camera_kind_name(CameraKind kind) {
  switch (kind) {
    case CameraKind::Pinhole: return "pinhole";
    case CameraKind::UCM: return "ucm";
    case CameraKind::EUCM: return "eucm";
    case CameraKind::DS: return "ds";
  }
  return "unknown";
}

CameraKind camera_kind_from_name(const std::string& name) {
  if (name == "pinhole") return CameraKind::Pinhole;
  if (name == "ucm") return CameraKind::UCM;
  if (name == "eucm") return CameraKind::EUCM;
  if (name == "ds") return CameraKind::DS;
  throw Error(ErrorCode::InvalidArgument, "unknown camera kind '" + name + "'");
}

int param_count(CameraKind kind) {
  switch (kind) {
    case CameraKind::Pinhole: return 4;
    case CameraKind::UCM: return 5;
    case CameraKind::EUCM:
    case CameraKind::DS: return 6;
  }
  return 0;
}

CameraModel CameraModel::pinhole(double fx, double fy, double cx, double cy) {
  return {CameraKind::Pinhole, fx, fy, cx, cy, 0.0, 1.0, 0.0};
}

CameraModel CameraModel::ucm(double fx, double fy, double cx, double cy, double alpha) {
  return {CameraKind::UCM, fx, fy, cx, cy, alpha, 1.0, 0.0};
}

CameraModel CameraModel::eucm(double fx, double fy, double cx, double cy, double alpha, double beta) {
  return {CameraKind::EUCM, fx, fy, cx, cy, alpha, beta, 0.0};
}

CameraModel CameraModel::ds(double fx, double fy, double cx, double cy, double alpha, double xi) {
  return {CameraKind::DS, fx, fy, cx, cy, alpha, 1.0, xi};
}

CameraModel CameraModel::image_defaults(CameraKind kind, int width, int height) {
  CameraModel m;
  m.kind = kind;
  m.fx = m.fy = width;
  m.cx = 0.5 * (width - 1);
  m.cy = 0.5 * (height - 1);
  m.alpha = kind == CameraKind::Pinhole ? 0.0 : 0.5;
  m.beta = 1.0;
  m.xi = 0.0;
  return m;
}

int CameraModel::param_count() const { return fieldfuse::param_count(kind); }

Eigen::VectorXd CameraModel::params() const {
  Eigen::VectorXd p(param_count());
  p.head<4>() << fx, fy, cx, cy;
  if (kind != CameraKind::Pinhole) p[4] = alpha;
  if (kind == CameraKind::EUCM) p[5] = beta;
  if (kind == CameraKind::DS) p[5] = xi;
  return p;
}

CameraModel CameraModel::from_params(CameraKind kind, const Eigen::VectorXd& p) {
  if (p.size() != fieldfuse::param_count(kind))
    throw Error(ErrorCode::InvalidArgument, "parameter vector has the wrong length");
  CameraModel m;
  m.kind = kind;
  m.fx = p[0];
  m.fy = p[1];
  m.cx = p[2];
  m.cy = p[3];
  if (kind != CameraKind::Pinhole) m.alpha = p[4];
  if (kind == CameraKind::EUCM) m.beta = p[5];
  if (kind == CameraKind::DS) m.xi = p[5];
  return m;
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw Error(ErrorCode::InvalidArgument, "principal point must be finite");
  if (kind == CameraKind::Pinhole) return;
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1)");
  if (kind == CameraKind::EUCM && !(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  if (kind == CameraKind::DS && !(xi > -1.0 && xi < 1.0)) throw Error(ErrorCode::InvalidArgument, "xi must lie in (-1, 1)");
}

namespace {

// Every model projects as u = fx x / D + cx, v = fy y / D + cy; only D differs.
struct Denominator {
  double value = 0.0;
  Vec3 d_point = Vec3::Zero();
  double d_alpha = 0.0;
  double d_extra = 0.0;  // beta (EUCM) or xi (DS)
  bool in_domain = false;
};

// Fov limit shared by the sphere models: points must satisfy z > -w * radius.
double sphere_w(double alpha) { return alpha > 0.5 ? (1.0 - alpha) / alpha : alpha / (1.0 - alpha); }

Denominator denominator(const CameraModel& m, const Vec3& p) {
  const double x = p.x(), y = p.y(), z = p.z();
  Denominator den;
  switch (m.kind) {
    case CameraKind::Pinhole: {
      den.value = z;
      den.d_point = Vec3(0.0, 0.0, 1.0);
      den.in_domain = z > kDenomEps;
      break;
    }
    case CameraKind::UCM: {
      const double a = m.alpha;
      const double d = p.norm();
      den.value = a * d + (1.0 - a) * z;
      if (d > 0.0) den.d_point = Vec3(a * x / d, a * y / d, a * z / d + 1.0 - a);
      den.d_alpha = d - z;
      den.in_domain = den.value > kDenomEps && z > -sphere_w(a) * d;
      break;
    }
    case CameraKind::EUCM: {
      const double a = m.alpha, b = m.beta;
      const double r2 = x * x + y * y;
      const double rho = std::sqrt(b * r2 + z * z);
      den.value = a * rho + (1.0 - a) * z;
      if (rho > 0.0) {
        den.d_point = Vec3(a * b * x / rho, a * b * y / rho, a * z / rho + 1.0 - a);
        den.d_extra = a * r2 / (2.0 * rho);
      }
      den.d_alpha = rho - z;
      den.in_domain = den.value > kDenomEps && z > -sphere_w(a) * rho;
      break;
    }
    case CameraKind::DS: {
      const double a = m.alpha, s = m.xi;
      const double d1 = p.norm();
      const double k = s * d1 + z;
      const double d2 = std::sqrt(x * x + y * y + k * k);
      den.value = a * d2 + (1.0 - a) * k;
      if (d1 > 0.0 && d2 > 0.0) {
        const Vec3 dk(s * x / d1, s * y / d1, s * z / d1 + 1.0);
        const Vec3 dd2((x + k * dk.x()) / d2, (y + k * dk.y()) / d2, k * dk.z() / d2);
        den.d_point = a * dd2 + (1.0 - a) * dk;
        den.d_extra = a * k * d1 / d2 + (1.0 - a) * d1;
      }
      den.d_alpha = d2 - k;
      const double w1 = sphere_w(a);
      const double w2 = (w1 + s) / std::sqrt(2.0 * w1 * s + s * s + 1.0);
      den.in_domain = den.value > kDenomEps && z > -w2 * d1;
      break;
    }
  }
  if (!std::isfinite(den.value)) den.in_domain = false;
  return den;
}

}  // namespace

std::optional<Vec2> try_project(const CameraModel& m, const Vec3& p) {
  const Denominator den = denominator(m, p);
  if (!den.in_domain) return std::nullopt;
  return Vec2(m.fx * p.x() / den.value + m.cx, m.fy * p.y() / den.value + m.cy);
}

Vec2 project(const CameraModel& m, const Vec3& p) {
  if (auto px = try_project(m, p)) return *px;
  throw Error(ErrorCode::BehindCamera, "point lies outside the projection domain");
}

std::optional<Vec3> try_unproject_ray(const CameraModel& m, const Vec2& pixel) {
  const double nx = (pixel.x() - m.cx) / m.fx;
  const double ny = (pixel.y() - m.cy) / m.fy;
  Vec3 dir;
  switch (m.kind) {
    case CameraKind::Pinhole: {
      dir = Vec3(nx, ny, 1.0);
      break;
    }
    case CameraKind::UCM: {
      // Sphere-offset form with zeta = alpha / (1 - alpha).
      const double a = m.alpha;
      const double mx = nx * (1.0 - a);
      const double my = ny * (1.0 - a);
      const double r2 = mx * mx + my * my;
      const double zeta = a / (1.0 - a);
      const double disc = 1.0 + (1.0 - zeta * zeta) * r2;
      if (disc < 0.0) return std::nullopt;
      const double k = (zeta + std::sqrt(disc)) / (1.0 + r2);
      dir = Vec3(k * mx, k * my, k - zeta);
      break;
    }
    case CameraKind::EUCM: {
      const double a = m.alpha, b = m.beta;
      const double r2 = nx * nx + ny * ny;
      const double disc = 1.0 - (2.0 * a - 1.0) * b * r2;
      if (disc < 0.0) return std::nullopt;
      const double mz = (1.0 - b * a * a * r2) / (a * std::sqrt(disc) + 1.0 - a);
      dir = Vec3(nx, ny, mz);
      break;
    }
    case CameraKind::DS: {
      const double a = m.alpha, s = m.xi;
      const double r2 = nx * nx + ny * ny;
      const double disc = 1.0 - (2.0 * a - 1.0) * r2;
      if (disc < 0.0) return std::nullopt;
      const double mz = (1.0 - a * a * r2) / (a * std::sqrt(disc) + 1.0 - a);
      const double disc2 = mz * mz + (1.0 - s * s) * r2;
      if (disc2 < 0.0) return std::nullopt;
      const double k = (mz * s + std::sqrt(disc2)) / (mz * mz + r2);
      dir = Vec3(k * nx, k * ny, k * mz - s);
      break;
    }
  }
  const double n = dir.norm();
  if (!(n > 0.0) || !dir.allFinite()) return std::nullopt;
  return dir / n;
}

Vec3 unproject(const CameraModel& m, const Vec2& pixel, double range) {
  if (auto ray = try_unproject_ray(m, pixel)) return range * *ray;
  throw Error(ErrorCode::InvalidPixel, "pixel lies outside the unprojection domain");
}

ProjectionJacobians project_jacobians(const CameraModel& m, const Vec3& p) {
  const Denominator den = denominator(m, p);
  if (!den.in_domain) throw Error(ErrorCode::BehindCamera, "point lies outside the projection domain");
  const double inv = 1.0 / den.value;
  const double mx = p.x() * inv;
  const double my = p.y() * inv;

  ProjectionJacobians j;
  // d(x/D)/dP = e_x / D - x dD/dP / D^2
  j.d_point.row(0) = m.fx * (Vec3::UnitX() * inv - mx * inv * den.d_point).transpose();
  j.d_point.row(1) = m.fy * (Vec3::UnitY() * inv - my * inv * den.d_point).transpose();

  j.d_params = Eigen::MatrixXd::Zero(2, m.param_count());
  j.d_params(0, 0) = mx;
  j.d_params(1, 1) = my;
  j.d_params(0, 2) = 1.0;
  j.d_params(1, 3) = 1.0;
  if (m.kind != CameraKind::Pinhole) {
    j.d_params(0, 4) = -m.fx * mx * inv * den.d_alpha;
    j.d_params(1, 4) = -m.fy * my * inv * den.d_alpha;
  }
  if (m.kind == CameraKind::EUCM || m.kind == CameraKind::DS) {
    j.d_params(0, 5) = -m.fx * mx * inv * den.d_extra;
    j.d_params(1, 5) = -m.fy * my * inv * den.d_extra;
  }
  return j;
}

Vec2 warp_pixel(const Vec2& pixel, double range, const RigidTransform& target_to_context,
                const CameraModel& target, const CameraModel& context) {
  return project(context, target_to_context.apply(unproject(target, pixel, range)));
}

RayBundle generate_rays(const CameraModel& model, const Pose& pose, const ImageGeometry& geom,
                        RayConvention convention) {
  model.validate();
  RayBundle rays;
  rays.convention = convention;
  rays.width = geom.width;
  rays.height = geom.height;
  rays.directions.assign(static_cast<std::size_t>(geom.width) * geom.height, Vec3::Zero());
  rays.valid.assign(rays.directions.size(), 0);

  const Mat3& r_wc = pose.rotation();
  // Extrinsics R_j = R_wc^T, t_j = -R_wc^T c.
  const Mat3 r_ext = r_wc.transpose();
  const Vec3 t_ext = -(r_ext * pose.center());
  rays.origin = convention == RayConvention::Conventional ? pose.center() : Vec3(-(r_ext * t_ext));

  for (int v = 0; v < geom.height; ++v) {
    for (int u = 0; u < geom.width; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * geom.width + u;
      const auto ray = try_unproject_ray(model, Vec2(u, v));
      if (!ray) continue;
      // Pinhole keeps the K^-1 [u, v, 1] scaling; other models use the unit ray.
      const Vec3 cam = model.kind == CameraKind::Pinhole ? Vec3(*ray / ray->z()) : *ray;
      const Vec3 world = r_wc * cam;
      rays.directions[i] = convention == RayConvention::Conventional ? Vec3(world.normalized()) : Vec3(world + t_ext);
      rays.valid[i] = 1;
    }
  }
  return rays;
}

std::vector<double> fourier_frequencies(int count, double max_frequency) {
  if (count < 0) throw Error(ErrorCode::InvalidArgument, "frequency count must be non-negative");
  std::vector<double> f(static_cast<std::size_t>(count));
  const double hi = 0.5 * max_frequency;
  for (int k = 0; k < count; ++k) f[k] = count == 1 ? 1.0 : 1.0 + (hi - 1.0) * k / (count - 1);
  return f;
}

std::vector<double> fourier_encode(double x, const std::vector<double>& frequencies) {
  std::vector<double> out;
  out.reserve(2 * frequencies.size() + 1);
  out.push_back(x);
  for (double f : frequencies) {
    out.push_back(std::sin(f * kPi * x));
    out.push_back(std::cos(f * kPi * x));
  }
  return out;
}

RectifyMap rectify_map(const CameraModel& src, const CameraModel& dst, const ImageGeometry& geom) {
  if (dst.kind != CameraKind::Pinhole) throw Error(ErrorCode::InvalidArgument, "rectification target must be pinhole");
  RectifyMap map;
  map.width = geom.width;
  map.height = geom.height;
  const Vec2 nan(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
  map.source.assign(static_cast<std::size_t>(geom.width) * geom.height, nan);
  map.valid.assign(map.source.size(), 0);
  for (int v = 0; v < geom.height; ++v) {
    for (int u = 0; u < geom.width; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * geom.width + u;
      const auto ray = try_unproject_ray(dst, Vec2(u, v));
      if (!ray) continue;
      if (auto px = try_project(src, *ray)) {
        map.source[i] = *px;
        map.valid[i] = 1;
      }
    }
  }
  return map;
}

ImageD remap(const ImageD& src, const RectifyMap& map, double fill) {
  ImageD out(map.width, map.height, src.channels, fill);
  for (int v = 0; v < map.height; ++v) {
    for (int u = 0; u < map.width; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * map.width + u;
      if (!map.valid[i]) continue;
      // Round-off just outside the first row/column still samples the edge.
      double sx = map.source[i].x(), sy = map.source[i].y();
      if (sx < 0.0 && sx > -1e-9) sx = 0.0;
      if (sy < 0.0 && sy > -1e-9) sy = 0.0;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      if (x0 < 0 || y0 < 0 || x0 >= src.width || y0 >= src.height) continue;
      const int x1 = std::min(x0 + 1, src.width - 1);
      const int y1 = std::min(y0 + 1, src.height - 1);
      const double fx = sx - x0, fy = sy - y0;
      for (int c = 0; c < src.channels; ++c) {
        const double top = (1 - fx) * src.at(x0, y0, c) + fx * src.at(x1, y0, c);
        const double bot = (1 - fx) * src.at(x0, y1, c) + fx * src.at(x1, y1, c);
        out.at(u, v, c) = (1 - fy) * top + fy * bot;
      }
    }
  }
  return out;
}

}  // namespace fieldfuse
