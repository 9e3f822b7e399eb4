// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fieldfuse/blend.hpp"
#include "fieldfuse/error.hpp"
#include "fieldfuse/metrics.hpp"
#include "fieldfuse/random.hpp"
#include "fieldfuse/scenes.hpp"

using namespace fieldfuse;

namespace {

double max_diff(const ImageD& a, const ImageD& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

std::vector<MassSample> random_samples(Rng& rng, int count, double start) {
  std::vector<MassSample> out;
  double t = start;
  double remaining = 1.0;
  for (int k = 0; k < count; ++k) {
    const double delta = uniform(rng, 0.05, 0.4);
    const double gap = uniform(rng, 0.0, 1.0) < 0.3 ? uniform(rng, 0.0, 0.3) : 0.0;
    t += gap;
    const double mass = remaining * uniform(rng, 0.0, 0.3);
    remaining -= mass;
    out.push_back({t + 0.5 * delta, delta, mass, Vec3(uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1))});
    t += delta;
  }
  return out;
}

TwoFieldScene small_scene() {
  TwoFieldScene s = make_two_field_scene(12);
  s.render.n_samples = 64;
  return s;
}

}  // namespace

TEST_CASE("proximity test") {
  const std::vector<Vec3> one{Vec3(3, 0, 0)};
  CHECK(proximity_test(Vec3::Zero(), one, 1.2) == std::vector<std::size_t>{0});
  const std::vector<Vec3> three{Vec3(2.0, 0, 0), Vec3(0, 1.0, 0), Vec3(0, 0, 1.1)};
  CHECK(proximity_test(Vec3::Zero(), three, 1.2) == std::vector<std::size_t>{1, 2});
  CHECK(proximity_test(Vec3::Zero(), three, 1.0) == std::vector<std::size_t>{1});
  const std::vector<Vec3> tie{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 5)};
  CHECK(proximity_test(Vec3::Zero(), tie, 1.0) == std::vector<std::size_t>{0, 1});
  CHECK(proximity_test(Vec3::Zero(), three, 10.0).size() == 3);
}

TEST_CASE("inverse distance weights") {
  const std::vector<double> d{1.0, 2.0};
  const auto w = idw_weights(d, 1.0);
  CHECK(std::abs(w[0] - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(w[1] - 1.0 / 3.0) < 1e-15);

  const std::vector<double> spread{0.3, 1.0, 7.0, 2.5};
  for (double x : idw_weights(spread, 1e-12)) CHECK(std::abs(x - 0.25) < 1e-10);

  const std::vector<double> close{1.0, 1.1};
  const auto sharp = idw_weights(close, 1e6);
  CHECK(std::abs(sharp[0] - 1.0) < 1e-12);
  CHECK(sharp[1] < 1e-12);

  // Log space keeps huge exponents finite.
  const std::vector<double> far{1e5, 2e5, 4e5};
  const auto big = idw_weights(far, 100.0);
  CHECK(std::abs(big[0] + big[1] + big[2] - 1.0) < 1e-15);
  CHECK(std::abs(big[1] / big[0] - std::pow(0.5, 100.0)) < 1e-40);

  const std::vector<double> zero{0.0, 1.0, 0.0};
  const auto z = idw_weights(zero, 10.0);
  CHECK(z[0] == 0.5);
  CHECK(z[1] == 0.0);
  CHECK(z[2] == 0.5);
}

TEST_CASE("merge: proportional split hand example") {
  const std::vector<std::vector<MassSample>> per_field{
      {{1.0, 1.0, 0.8, Vec3(1, 0, 0)}},
      {{0.75, 0.5, 0.3, Vec3(0, 1, 0)}, {1.25, 0.5, 0.2, Vec3(0, 0, 1)}},
  };
  const auto merged = merge_samples(per_field);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].t == doctest::Approx(0.75));
  CHECK(merged[0].delta == doctest::Approx(0.5));
  CHECK(merged[1].t == doctest::Approx(1.25));
  CHECK(merged[1].delta == doctest::Approx(0.5));
  CHECK(std::abs(merged[0].mass[0] - 0.4) < 1e-15);
  CHECK(std::abs(merged[1].mass[0] - 0.4) < 1e-15);
  CHECK(merged[0].mass[1] == 0.3);
  CHECK(merged[1].mass[1] == 0.2);
  CHECK(merged[0].color[0] == Vec3(1, 0, 0));
  CHECK(merged[1].color[1] == Vec3(0, 0, 1));

  // A single field passes through unchanged.
  const auto single = merge_samples({per_field[1]});
  REQUIRE(single.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(single[k].t == doctest::Approx(per_field[1][k].t).epsilon(1e-15));
    CHECK(single[k].delta == doctest::Approx(per_field[1][k].delta).epsilon(1e-15));
    CHECK(single[k].mass[0] == per_field[1][k].mass);
  }
}

TEST_CASE("merge: partial coverage and mass conservation") {
  const auto partial = merge_samples({{{0.5, 1.0, 0.6, Vec3::Ones()}}, {{2.5, 1.0, 0.5, Vec3::Zero()}}});
  REQUIRE(partial.size() == 2);
  CHECK(partial[0].covered[0] == 1);
  CHECK(partial[0].covered[1] == 0);
  CHECK(partial[0].mass[1] == 0.0);
  CHECK(partial[1].covered[0] == 0);

  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int n_fields = 1 + trial % 4;
    std::vector<std::vector<MassSample>> per_field;
    for (int f = 0; f < n_fields; ++f)
      per_field.push_back(random_samples(rng, 5 + static_cast<int>(rng() % 40), uniform(rng, 0.0, 1.0)));
    const auto merged = merge_samples(per_field);
    for (std::size_t k = 1; k < merged.size(); ++k)
      CHECK(merged[k].t - 0.5 * merged[k].delta >= merged[k - 1].t + 0.5 * merged[k - 1].delta - 1e-12);
    for (int f = 0; f < n_fields; ++f) {
      double before = 0.0, after = 0.0;
      for (const auto& s : per_field[f]) before += s.mass;
      for (const auto& m : merged) {
        CHECK(m.mass[f] >= 0.0);
        after += m.mass[f];
      }
      CHECK(std::abs(before - after) <= 1e-12);
    }
  }
}

TEST_CASE("sample blend: normalization, convexity and limits") {
  Rng rng(8);
  const Ray ray{Vec3::Zero(), Vec3(0.6, 0.0, 0.8)};
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    std::vector<std::vector<MassSample>> per_field;
    std::vector<Vec3> centers, backgrounds;
    for (int f = 0; f < n; ++f) {
      per_field.push_back(random_samples(rng, 10 + static_cast<int>(rng() % 20), uniform(rng, 0.0, 0.5)));
      centers.push_back(Vec3(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, 0, 3)));
      backgrounds.push_back(Vec3(uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)));
    }
    const auto merged = merge_samples(per_field);
    const double gamma = trial % 2 ? 10.0 : 1.0;
    const SampleBlend b = blend_ray_idw_sample(merged, centers, ray, gamma, backgrounds);
    REQUIRE_FALSE(b.zero_mass);
    CHECK(std::abs(b.weighted_mass - 1.0) <= 1e-12);

    // Step (i) sums survive step (ii) as one common factor across samples.
    double bg_row = 0.0;
    for (double w : b.weights.back()) bg_row += w;
    for (std::size_t k = 0; k < merged.size(); ++k) {
      double row = 0.0;
      for (double w : b.weights[k]) row += w;
      CHECK(std::abs(row / bg_row - 1.0) <= 1e-12);
    }

    Vec3 lo = Vec3::Constant(1e9), hi = Vec3::Constant(-1e9);
    for (std::size_t k = 0; k < merged.size(); ++k) {
      for (int f = 0; f < n; ++f) {
        if (!merged[k].covered[f]) continue;
        lo = lo.cwiseMin(merged[k].color[f]);
        hi = hi.cwiseMax(merged[k].color[f]);
      }
    }
    for (const auto& c : backgrounds) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
    for (int c = 0; c < 3; ++c) {
      CHECK(b.color[c] >= lo[c] - 1e-12);
      CHECK(b.color[c] <= hi[c] + 1e-12);
    }

    // Very large gamma: each sample takes its nearest covering field.
    const SampleBlend sharp = blend_ray_idw_sample(merged, centers, ray, 1e6, backgrounds);
    Vec3 num = Vec3::Zero();
    double den = 0.0;
    for (const auto& m : merged) {
      const Vec3 x = ray.origin + m.t * ray.direction;
      int best = -1;
      for (int f = 0; f < n; ++f) {
        if (!m.covered[f]) continue;
        if (best < 0 || (centers[f] - x).norm() < (centers[best] - x).norm()) best = f;
      }
      num += m.mass[best] * m.color[best];
      den += m.mass[best];
    }
    for (int f = 0; f < n; ++f) {
      double acc = 0.0;
      for (const auto& m : merged) acc += m.mass[f];
      const double residual = std::max(0.0, 1.0 - acc) / n;
      num += residual * backgrounds[f];
      den += residual;
    }
    CHECK((sharp.color - num / den).cwiseAbs().maxCoeff() < 1e-9);
  }

  // No mass anywhere returns the background.
  std::vector<MergedSample> empty;
  const std::vector<Vec3> c1{Vec3(1, 0, 0)}, bg{Vec3(0.2, 0.3, 0.4)};
  const SampleBlend none = blend_ray_idw_sample(empty, c1, ray, 10.0, bg);
  CHECK_FALSE(none.zero_mass);
  CHECK((none.color - bg[0]).norm() < 1e-15);
}

TEST_CASE("sample blend: one field reproduces its render") {
  const TwoFieldScene s = small_scene();
  const Pose view = s.views[0];
  const RayBundle rays = generate_rays(s.camera, view, s.geom, RayConvention::Conventional);
  const RegisteredField& f = s.fields[0];
  const std::vector<Vec3> centers{f.center(), f.center()};
  const std::vector<Vec3> bgs{f.field.background, f.field.background};
  for (std::size_t p = 0; p < rays.directions.size(); p += 7) {
    const Ray ray{rays.origin, rays.directions[p]};
    const FieldRay r = render_field_ray(f, ray, s.render);
    const std::vector<Vec3> one_center{f.center()}, one_bg{f.field.background};
    const SampleBlend solo = blend_ray_idw_sample(merge_samples({r.samples}), one_center, ray, 10.0, one_bg);
    CHECK((solo.color - r.render.color).cwiseAbs().maxCoeff() < 1e-12);
    const SampleBlend twin = blend_ray_idw_sample(merge_samples({r.samples, r.samples}), centers, ray, 10.0, bgs);
    CHECK((twin.color - r.render.color).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("image blending laws") {
  const TwoFieldScene s = small_scene();
  const Pose view = s.views[1];

  SUBCASE("single field: all methods equal the direct render") {
    const std::span<const RegisteredField> one(s.fields.data(), 1);
    const ImageD direct = render_fields(one, s.camera, view, s.geom, s.render)[0];
    for (BlendMethod m : {BlendMethod::Nearest, BlendMethod::IDW2D, BlendMethod::IDW3D, BlendMethod::IDWSample}) {
      BlendConfig cfg;
      cfg.method = m;
      cfg.render = s.render;
      CHECK(max_diff(blend_image(one, s.camera, view, s.geom, cfg).color, direct) <= 1e-9);
    }
  }

  SUBCASE("vanishing gamma gives the mean image") {
    const auto solo = render_fields(s.fields, s.camera, view, s.geom, s.render);
    ImageD mean = solo[0];
    for (std::size_t i = 0; i < mean.data.size(); ++i) mean.data[i] = 0.5 * (solo[0].data[i] + solo[1].data[i]);
    for (BlendMethod m : {BlendMethod::IDW2D, BlendMethod::IDW3D, BlendMethod::IDWSample}) {
      BlendConfig cfg;
      cfg.method = m;
      cfg.gamma = 1e-9;
      cfg.tau = 100.0;
      cfg.render = s.render;
      CHECK(max_diff(blend_image(s.fields, s.camera, view, s.geom, cfg).color, mean) <= 1e-6);
    }
  }

  SUBCASE("huge gamma: IDW-2D equals Nearest") {
    const Pose off = look_at_pose(Vec3(0.4, -3, 0.2), Vec3::Zero());
    BlendConfig cfg;
    cfg.tau = 100.0;
    cfg.render = s.render;
    cfg.method = BlendMethod::Nearest;
    const BlendedImage nearest = blend_image(s.fields, s.camera, off, s.geom, cfg);
    cfg.method = BlendMethod::IDW2D;
    cfg.gamma = 1e6;
    const BlendedImage idw = blend_image(s.fields, s.camera, off, s.geom, cfg);
    CHECK(idw.fields_used.size() == 2);
    CHECK(max_diff(idw.color, nearest.color) <= 1e-9);
  }

  SUBCASE("identical fields: blend equals solo render") {
    const std::vector<RegisteredField> twins{s.fields[1], s.fields[1]};
    const ImageD solo = render_fields(twins, s.camera, view, s.geom, s.render)[0];
    for (BlendMethod m : {BlendMethod::Nearest, BlendMethod::IDW2D, BlendMethod::IDW3D, BlendMethod::IDWSample}) {
      BlendConfig cfg;
      cfg.method = m;
      cfg.render = s.render;
      CHECK(max_diff(blend_image(twins, s.camera, view, s.geom, cfg).color, solo) <= 1e-6);
    }
  }
}

TEST_CASE("blend configuration") {
  BlendConfig cfg;
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.gamma = 1.0;
  cfg.tau = 0.9;
  CHECK_THROWS_AS(cfg.validate(), Error);
  for (BlendMethod m : {BlendMethod::Nearest, BlendMethod::IDW2D, BlendMethod::IDW3D, BlendMethod::IDWSample})
    CHECK(blend_method_from_name(blend_method_name(m)) == m);
  CHECK_THROWS_AS(blend_method_from_name("median"), Error);
}
