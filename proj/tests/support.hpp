// Shared fixtures for the unit suites.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "geometry.hpp"
#include "synthetic.hpp"

namespace depthfuse::testing {

inline CameraIntrinsics small_camera(int width = 40, int height = 30) {
  CameraIntrinsics k;
  k.fx = k.fy = 32.8125;  // 525 / 16
  k.cx = (width - 1) / 2.0;
  k.cy = (height - 1) / 2.0;
  k.width = width;
  k.height = height;
  return k;
}

inline CameraPose random_pose(std::mt19937_64& rng, double translation_scale = 2.0) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  std::uniform_real_distribution<double> t(-translation_scale, translation_scale);
  return {q.toRotationMatrix(), Eigen::Vector3d(t(rng), t(rng), t(rng))};
}

inline Eigen::Matrix3d rotation_y(double radians) {
  return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

// A pixel of the small camera spans about 0.1 m at 3 m; periods of five
// pixels or more keep bilinear feature sampling well-behaved.
inline Primitive textured_plane(double z, std::uint64_t seed, double tilt = 0.0) {
  Placement p;
  p.rotation = rotation_y(tilt);
  p.origin = {0.0, 0.0, z};
  return Primitive::plane(p, 0.0, 0.0,
                          Texture::sinusoid_bank(seed, kDefaultFeatureChannels, 0.5, 2.0));
}

inline SyntheticScene plane_scene(double z = 3.0) {
  return SyntheticScene({textured_plane(z, 11)}, 8.0, 5);
}

inline SyntheticWindow plane_window(double z, const PriorModel& prior, int width = 40,
                                    int height = 30) {
  // 0.4 m steps give this camera the per-step disparity (about 4 px at 3 m)
  // of the full-size configs.
  const auto poses = lateral_trajectory(5, 2, 0.4);
  return make_window(plane_scene(z), small_camera(width, height), poses, 2, std::nullopt,
                     prior);
}

inline PriorModel exact_prior(double sigma_b = 0.15) {
  PriorModel m;
  m.mu_noise = 0.0;
  m.sigma_b = sigma_b;
  return m;
}

}  // namespace depthfuse::testing
