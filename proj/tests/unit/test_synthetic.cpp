#include <cmath>
#include <random>

#include <doctest.h>

#include "errors.hpp"
#include "metrics.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace depthfuse;
using namespace depthfuse::testing;

TEST_CASE("fronto-parallel plane renders constant depth") {
  const DepthImage d = render_depth(plane_scene(4.0), small_camera(), CameraPose::identity());
  for (double v : d.values()) CHECK(v == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("on-axis sphere depth") {
  CameraIntrinsics k = small_camera(41, 31);  // odd size puts a pixel on the axis
  const SyntheticScene scene({Primitive::sphere({0, 0, 5}, 1.0, Texture::sinusoid_bank(1))}, 20);
  const DepthImage d = render_depth(scene, k, CameraPose::identity());
  CHECK(d(20, 15) == doctest::Approx(4.0).epsilon(1e-14));
  const Grid<int> ids = render_primitive_ids(scene, k, CameraPose::identity());
  CHECK(ids(20, 15) == 0);
  CHECK(ids(0, 0) == -1);
  CHECK(d(0, 0) == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("tilted plane depth matches the closed form") {
  const double tilt = 0.6;
  const SyntheticScene scene({textured_plane(3.0, 2, tilt)}, 30.0);
  const CameraIntrinsics k = small_camera(80, 60);
  const DepthImage d = render_depth(scene, k, CameraPose::identity());
  // Plane through (0,0,3) with normal n = R_y(tilt) e_z; ray r = (x', y', 1).
  const Eigen::Vector3d n = rotation_y(tilt) * Eigen::Vector3d::UnitZ();
  double worst = 0.0;
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 80; ++x) {
      const Eigen::Vector3d r((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const double expected = 3.0 * n.z() / n.dot(r);
      if (expected <= 0 || expected > 30) continue;
      worst = std::max(worst, std::abs(d(x, y) - expected));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("rendered depths satisfy the surface equations") {
  Placement box_at;
  box_at.rotation = rotation_y(0.4);
  box_at.origin = {0.5, 0.1, 2.5};
  const SyntheticScene scene(
      {Primitive::sphere({-0.4, 0, 2.0}, 0.4, Texture::sinusoid_bank(1)),
       Primitive::box(box_at, {0.3, 0.25, 0.2}, Texture::sinusoid_bank(2)),
       textured_plane(3.5, 3, 0.3)},
      9.0);
  const CameraIntrinsics k = small_camera(80, 60);
  const CameraPose pose = CameraPose(rotation_y(0.05), {0.02, -0.01, 0.1});
  const DepthImage d = render_depth(scene, k, pose);
  const Grid<int> ids = render_primitive_ids(scene, k, pose);
  int counted[4] = {0, 0, 0, 0};
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 80; ++x) {
      const Eigen::Vector3d world = pose.inverse().apply(back_project(x, y, d(x, y), k));
      const int id = ids(x, y);
      ++counted[id + 1];
      const Primitive& p = scene.primitive(id);
      const Eigen::Vector3d local = p.placement.to_local(world);
      double residual = 0.0;
      switch (id < 0 ? PrimitiveKind::plane : p.kind) {
        case PrimitiveKind::plane: residual = local.z(); break;
        case PrimitiveKind::sphere: residual = local.norm() - p.extent.x(); break;
        case PrimitiveKind::box:
          residual = (local.cwiseAbs() - p.extent).maxCoeff();  // on the boundary: 0
          break;
      }
      CHECK(std::abs(residual) < 1e-9);
    }
  }
  for (int c : {counted[1], counted[2], counted[3]}) CHECK(c > 0);
}

TEST_CASE("features are view independent and unit length") {
  Placement box_at;
  box_at.rotation = rotation_y(0.3);
  box_at.origin = {0.3, 0.0, 2.2};
  const SyntheticScene scene({Primitive::box(box_at, {0.3, 0.3, 0.3}, Texture::sinusoid_bank(5)),
                              Primitive::sphere({-0.5, 0.2, 2.5}, 0.4, Texture::sinusoid_bank(6))},
                             6.0, 9);
  const CameraIntrinsics k = small_camera(160, 120);
  const CameraPose a = CameraPose::identity();
  const CameraPose b(rotation_y(-0.05), {-0.25, 0.03, 0.02});
  const DepthImage da = render_depth(scene, k, a);
  const FeatureMap fa = render_features(scene, k, a);

  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> ux(0, 159), vy(0, 119);
  int tested = 0;
  double worst = 0.0;
  for (int attempt = 0; tested < 10000 && attempt < 200000; ++attempt) {
    const int x = ux(rng), y = vy(rng);
    const Eigen::Vector3d world = a.inverse().apply(back_project(x, y, da(x, y), k));
    // Render the same surface point in view b through a one-pixel camera
    // whose principal point sits on its projection.
    const PixelProjection p = project_to_view(world, b, k);
    if (!p.in_frustum) continue;
    CameraIntrinsics spot = k;
    spot.cx = k.cx - p.u;
    spot.cy = k.cy - p.v;
    spot.width = spot.height = 1;
    // The point must be the first hit in view b too.
    const DepthImage depth_b = render_depth(scene, spot, b);
    if (std::abs(depth_b(0, 0) - p.depth) > 1e-9) continue;
    const FeatureMap fb = render_features(scene, spot, b);
    double dist = 0.0, norm = 0.0;
    for (int c = 0; c < fa.channels(); ++c) {
      const double e = fa.data.at(x, y)[c] - fb.data.at(0, 0)[c];
      dist += e * e;
      norm += fa.data.at(x, y)[c] * fa.data.at(x, y)[c];
    }
    worst = std::max(worst, std::sqrt(dist));
    CHECK(std::abs(norm - 1.0) < 1e-12);
    ++tested;
  }
  CHECK(tested == 10000);
  CHECK(worst < 1e-6);
}

TEST_CASE("texture-less corruption gives one descriptor over the region") {
  Placement at;
  at.origin = {0, 0, 2.5};
  const SyntheticScene scene({Primitive::box(at, {0.4, 0.3, 0.1}, Texture::sinusoid_bank(1))}, 4.0, 2);
  const CorruptionSpec spec{CorruptionKind::texture_less, 0, Eigen::Vector3d::Zero()};
  const auto poses = lateral_trajectory(3, 1, 0.1);
  const SyntheticWindow w = make_window(scene, small_camera(), poses, 1, spec, exact_prior());
  const FeatureMap& f = w.window.reference_frame().features;
  std::vector<double> first;
  int inside = 0;
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 40; ++x) {
      if (!w.region(x, y)) continue;
      const auto v = f.data.at(x, y);
      if (first.empty()) first.assign(v.begin(), v.end());
      CHECK(std::equal(v.begin(), v.end(), first.begin()));
      ++inside;
    }
  }
  CHECK(inside > 0);
  CHECK(inside < 40 * 30);
}

TEST_CASE("mirror descriptors come from the reflected hit") {
  // Mirror facing the camera at z = 2, textured wall behind the camera at z = -1.
  Placement mirror_at;
  mirror_at.origin = {0, 0, 2};
  Placement wall_at;
  wall_at.origin = {0, 0, -1};
  const SyntheticScene scene({Primitive::plane(mirror_at, 0.5, 0.5, Texture::sinusoid_bank(1)),
                              Primitive::plane(wall_at, 0.0, 0.0, Texture::sinusoid_bank(2))},
                             8.0);
  const CorruptionSpec spec{CorruptionKind::reflective, 0, Eigen::Vector3d::Zero()};
  const CameraIntrinsics k = small_camera();
  const auto poses = lateral_trajectory(2, 0, 0.1);
  const SyntheticWindow w = make_window(scene, k, poses, 0, spec, exact_prior());

  // Follow one ray by hand: off the mirror, then back onto the wall.
  const int cx = 20, cy = 15;
  REQUIRE(w.region(cx, cy) == 255);
  CHECK(w.ground_truth(cx, cy) == doctest::Approx(2.0).epsilon(1e-12));
  const Eigen::Vector3d ray = back_project(cx, cy, 1.0, k);
  const double t = 2.0;  // reach the mirror
  const Eigen::Vector3d hit = ray * t;
  Eigen::Vector3d dir = ray.normalized();
  dir.z() = -dir.z();
  const Eigen::Vector3d wall_point = hit + dir * ((-1.0 - hit.z()) / dir.z());
  std::vector<double> expected(16);
  scene.primitive(1).texture.evaluate(wall_at.to_local(wall_point), expected);
  const auto got = w.window.reference_frame().features.data.at(cx, cy);
  for (int c = 0; c < 16; ++c) CHECK(got[c] == doctest::Approx(expected[c]).epsilon(1e-9));
}

TEST_CASE("moving object keeps its reference-time position in the ground truth") {
  Placement at;
  at.origin = {0, 0, 2};
  const SyntheticScene scene({Primitive::box(at, {0.2, 0.2, 0.1}, Texture::sinusoid_bank(1))}, 10.0, 3);
  const CorruptionSpec spec{CorruptionKind::moving_object, 0, {0.0, 0.3, 0.0}};
  const CameraIntrinsics k = small_camera();
  const auto poses = lateral_trajectory(5, 2, 0.1);
  const SyntheticWindow moving = make_window(scene, k, poses, 2, spec, exact_prior());
  const SyntheticWindow still = make_window(scene, k, poses, 2, std::nullopt, exact_prior());
  CHECK(moving.ground_truth == still.ground_truth);
  CHECK(moving.window.frames[2].features.data == still.window.frames[2].features.data);
  // The object moved in every other frame.
  for (int i : {0, 1, 3, 4}) {
    CHECK_FALSE(moving.window.frames[i].prior.mu == still.window.frames[i].prior.mu);
  }
}

TEST_CASE("region mask and its complement partition the image") {
  Placement at;
  at.origin = {0.1, 0, 2.5};
  const SyntheticScene scene({Primitive::box(at, {0.4, 0.3, 0.1}, Texture::sinusoid_bank(1))}, 4.0, 2);
  const CorruptionSpec spec{CorruptionKind::texture_less, 0, Eigen::Vector3d::Zero()};
  PriorModel noisy;
  noisy.seed = 5;
  const SyntheticWindow w =
      make_window(scene, small_camera(), lateral_trajectory(3, 1, 0.1), 1, spec, noisy);
  Mask complement(40, 30);
  for (std::size_t i = 0; i < complement.size(); ++i) {
    complement.values()[i] = w.region.values()[i] ? 0 : 255;
  }
  const GaussianDepthMap& pred = w.window.reference_frame().prior;
  MetricsOptions in, out;
  in.mask = &w.region;
  out.mask = &complement;
  const MetricsReport all = compute_metrics(pred, w.ground_truth);
  const MetricsReport a = compute_metrics(pred, w.ground_truth, in);
  const MetricsReport b = compute_metrics(pred, w.ground_truth, out);
  CHECK(a.pixel_count + b.pixel_count == all.pixel_count);
  CHECK(all.pixel_count == 40 * 30);
}

TEST_CASE("make_prior") {
  DepthImage gt(100, 100);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> depth(0.5, 9.0);
  for (double& v : gt.values()) v = depth(rng);

  PriorModel exact = exact_prior();
  const GaussianDepthMap clean = make_prior(gt, exact, 0);
  CHECK(clean.mu == gt);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    CHECK(clean.sigma.values()[i] == doctest::Approx(0.15 * gt.values()[i]).epsilon(1e-15));
  }

  PriorModel noisy;
  noisy.seed = 77;
  const GaussianDepthMap a = make_prior(gt, noisy, 3);
  CHECK(a == make_prior(gt, noisy, 3));
  CHECK_FALSE(a == make_prior(gt, noisy, 4));
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double e = a.mu.values()[i] / gt.values()[i] - 1.0;
    sum += e;
    sq += e * e;
  }
  const double n = static_cast<double>(gt.size());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std::abs(sd - 0.1) < 0.005);

  PriorModel floored = exact_prior(0.0);
  const GaussianDepthMap f = make_prior(gt, floored, 0, 0.01);
  for (double s : f.sigma.values()) CHECK(s == 0.01);
}

TEST_CASE("window construction errors") {
  const SyntheticScene scene = plane_scene();
  const CameraIntrinsics k = small_camera();
  const auto poses = lateral_trajectory(3, 1, 0.1);
  CHECK_THROWS_AS(make_window(scene, k, std::span(poses).first(1), 0, std::nullopt, {}),
                  ConfigError);
  CHECK_THROWS_AS(make_window(scene, k, poses, 3, std::nullopt, {}), ConfigError);
  const CorruptionSpec missing{CorruptionKind::texture_less, 4, Eigen::Vector3d::Zero()};
  CHECK_THROWS_AS(make_window(scene, k, poses, 1, missing, {}), ConfigError);
  // Primitive behind the camera: nothing to corrupt in the reference view.
  Placement behind;
  behind.origin = {0, 0, -2};
  const SyntheticScene hidden({Primitive::plane(behind, 0.5, 0.5, Texture::sinusoid_bank(1))}, 5.0);
  const CorruptionSpec invisible{CorruptionKind::texture_less, 0, Eigen::Vector3d::Zero()};
  CHECK_THROWS_AS(make_window(hidden, k, poses, 1, invisible, {}), ConfigError);
}

TEST_CASE("window rendering is independent of thread count") {
  PriorModel noisy;
  noisy.seed = 3;
  const SyntheticScene scene({textured_plane(3.0, 1, 0.3)}, 8.0, 2);
  const auto poses = lateral_trajectory(5, 2, 0.1);
  const SyntheticWindow a = make_window(scene, small_camera(), poses, 2, std::nullopt, noisy, 1e-3, 1);
  const SyntheticWindow b = make_window(scene, small_camera(), poses, 2, std::nullopt, noisy, 1e-3, 6);
  CHECK(a.ground_truth == b.ground_truth);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(a.window.frames[i].features.data == b.window.frames[i].features.data);
    CHECK(a.window.frames[i].prior == b.window.frames[i].prior);
  }
}

TEST_CASE("lateral trajectory places camera centers along x") {
  const auto poses = lateral_trajectory(5, 2, 0.1);
  REQUIRE(poses.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(poses[i].center().x() == doctest::Approx((i - 2) * 0.1).epsilon(1e-15));
    CHECK(poses[i].center().y() == 0.0);
    CHECK(poses[i].rotation() == Eigen::Matrix3d::Identity());
  }
}

TEST_CASE("texture validation") {
  CHECK_THROWS_AS(Texture::sinusoid_bank(1, 15), ConfigError);
  CHECK_THROWS_AS(Texture::sinusoid_bank(1, 16, 0.0, 1.0), ConfigError);
  CHECK(Texture::constant().is_constant());
  std::vector<double> v(16);
  Texture::constant().evaluate({1, 2, 3}, v);
  double n = 0;
  for (double x : v) n += x * x;
  CHECK(n == doctest::Approx(1.0).epsilon(1e-15));
}
