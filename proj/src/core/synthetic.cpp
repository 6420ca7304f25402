#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "errors.hpp"
#include "parallel.hpp"

namespace depthfuse {

namespace {

constexpr int kMaxMirrorBounces = 4;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::Vector3d pixel_ray(const CameraIntrinsics& k, double u, double v) {
  return {(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
}

std::optional<RayHit> intersect(const Primitive& prim, const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& direction, double t_min) {
  const Eigen::Vector3d o = prim.placement.to_local(origin);
  const Eigen::Vector3d d = prim.placement.rotation.transpose() * direction;
  double t = std::numeric_limits<double>::infinity();
  Eigen::Vector3d local_normal = Eigen::Vector3d::Zero();

  switch (prim.kind) {
    case PrimitiveKind::plane: {
      if (std::abs(d.z()) < 1e-15) return std::nullopt;
      t = -o.z() / d.z();
      if (!(t > t_min)) return std::nullopt;
      const Eigen::Vector3d p = o + t * d;
      if (prim.extent.x() > 0.0 && std::abs(p.x()) > prim.extent.x()) return std::nullopt;
      if (prim.extent.y() > 0.0 && std::abs(p.y()) > prim.extent.y()) return std::nullopt;
      local_normal = Eigen::Vector3d::UnitZ();
      break;
    }
    case PrimitiveKind::sphere: {
      const double r = prim.extent.x();
      const double a = d.squaredNorm();
      const double half_b = o.dot(d);
      const double c = o.squaredNorm() - r * r;
      const double disc = half_b * half_b - a * c;
      if (disc < 0.0) return std::nullopt;
      const double root = std::sqrt(disc);
      // Numerically stable pair of roots.
      const double q = half_b >= 0.0 ? -(half_b + root) : -(half_b - root);
      double t0 = q / a;
      double t1 = q != 0.0 ? c / q : t0;
      if (t0 > t1) std::swap(t0, t1);
      if (t0 > t_min) {
        t = t0;
      } else if (t1 > t_min) {
        t = t1;
      } else {
        return std::nullopt;
      }
      local_normal = (o + t * d).normalized();
      break;
    }
    case PrimitiveKind::box: {
      double t_near = -std::numeric_limits<double>::infinity();
      double t_far = std::numeric_limits<double>::infinity();
      int near_axis = 0, far_axis = 0;
      for (int axis = 0; axis < 3; ++axis) {
        const double h = prim.extent(axis);
        if (std::abs(d(axis)) < 1e-15) {
          if (std::abs(o(axis)) > h) return std::nullopt;
          continue;
        }
        double ta = (-h - o(axis)) / d(axis);
        double tb = (h - o(axis)) / d(axis);
        if (ta > tb) std::swap(ta, tb);
        if (ta > t_near) {
          t_near = ta;
          near_axis = axis;
        }
        if (tb < t_far) {
          t_far = tb;
          far_axis = axis;
        }
      }
      if (t_near > t_far) return std::nullopt;
      int axis = near_axis;
      if (t_near > t_min) {
        t = t_near;
      } else if (t_far > t_min) {
        t = t_far;
        axis = far_axis;
      } else {
        return std::nullopt;
      }
      local_normal = Eigen::Vector3d::Zero();
      local_normal(axis) = (o(axis) + t * d(axis)) > 0.0 ? 1.0 : -1.0;
      break;
    }
  }

  RayHit hit;
  hit.t = t;
  hit.point = origin + t * direction;
  hit.normal = prim.placement.rotation * local_normal;
  if (hit.normal.dot(direction) > 0.0) hit.normal = -hit.normal;
  return hit;
}

void surface_descriptor(const SyntheticScene& scene, const Eigen::Vector3d& origin,
                        const Eigen::Vector3d& direction, std::span<double> out) {
  Eigen::Vector3d o = origin;
  Eigen::Vector3d d = direction;
  int skip = -2;
  for (int bounce = 0; bounce <= kMaxMirrorBounces; ++bounce) {
    const auto hit = scene.trace(o, d, 1e-9, skip);
    if (!hit) break;
    const Primitive& prim = scene.primitive(hit->primitive);
    if (!prim.mirror || bounce == kMaxMirrorBounces) {
      prim.texture.evaluate(prim.placement.to_local(hit->point), out);
      return;
    }
    d = d - 2.0 * d.dot(hit->normal) * hit->normal;
    o = hit->point;
    skip = hit->primitive;
  }
  std::ranges::fill(out, 0.0);
  out[0] = 1.0;
}

}  // namespace

Texture Texture::sinusoid_bank(std::uint64_t seed, int channels, double min_wavelength,
                               double max_wavelength) {
  if (channels < 2 || channels % 2 != 0) throw ConfigError("channels", "must be even and >= 2");
  if (!(min_wavelength > 0.0) || !(max_wavelength >= min_wavelength)) {
    throw ConfigError("wavelength", "need 0 < min_wavelength <= max_wavelength");
  }
  Texture t;
  t.channels_ = channels;
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_lo = std::log(min_wavelength);
  const double log_hi = std::log(max_wavelength);
  for (int j = 0; j < channels / 2; ++j) {
    Eigen::Vector3d dir(gauss(rng), gauss(rng), gauss(rng));
    dir.normalize();
    const double wavelength = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
    t.frequencies_.push_back(dir * (2.0 * std::numbers::pi / wavelength));
    t.phases_.push_back(2.0 * std::numbers::pi * unit(rng));
  }
  return t;
}

Texture Texture::constant(int channels) {
  if (channels < 1) throw ConfigError("channels", "must be >= 1");
  Texture t;
  t.channels_ = channels;
  return t;
}

void Texture::evaluate(const Eigen::Vector3d& local_point, std::span<double> out) const {
  if (is_constant()) {
    const double v = 1.0 / std::sqrt(static_cast<double>(channels_));
    std::ranges::fill(out, v);
    return;
  }
  double norm2 = 0.0;
  for (std::size_t j = 0; j < frequencies_.size(); ++j) {
    const double phase = frequencies_[j].dot(local_point) + phases_[j];
    out[2 * j] = std::cos(phase);
    out[2 * j + 1] = std::sin(phase);
    norm2 += out[2 * j] * out[2 * j] + out[2 * j + 1] * out[2 * j + 1];
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= inv;
}

Primitive Primitive::plane(const Placement& placement, double half_width, double half_height,
                           Texture texture) {
  Primitive p;
  p.kind = PrimitiveKind::plane;
  p.placement = placement;
  p.extent = {half_width, half_height, 0.0};
  p.texture = std::move(texture);
  return p;
}

Primitive Primitive::sphere(const Eigen::Vector3d& center, double radius, Texture texture) {
  if (!(radius > 0.0)) throw ConfigError("radius", "must be positive");
  Primitive p;
  p.kind = PrimitiveKind::sphere;
  p.placement.origin = center;
  p.extent = {radius, 0.0, 0.0};
  p.texture = std::move(texture);
  return p;
}

Primitive Primitive::box(const Placement& placement, const Eigen::Vector3d& half_extent,
                         Texture texture) {
  if (!(half_extent.minCoeff() > 0.0)) throw ConfigError("half_extent", "must be positive");
  Primitive p;
  p.kind = PrimitiveKind::box;
  p.placement = placement;
  p.extent = half_extent;
  p.texture = std::move(texture);
  return p;
}

SyntheticScene::SyntheticScene(std::vector<Primitive> primitives, double background_depth,
                               std::uint64_t background_seed)
    : primitives_(std::move(primitives)), background_depth_(background_depth) {
  if (!(background_depth > 0.0)) throw ConfigError("background_depth", "must be positive");
  const int channels =
      primitives_.empty() ? kDefaultFeatureChannels : primitives_.front().texture.channels();
  for (const Primitive& p : primitives_) {
    if (p.texture.channels() != channels) {
      throw ConfigError("primitives", "all textures must share a channel count");
    }
  }
  Placement far;
  far.origin = {0.0, 0.0, background_depth};
  // Background wavelengths scale with distance so its image-space frequency
  // stays comparable to nearer surfaces.
  const double scale = std::max(1.0, background_depth / 3.0);
  background_ = Primitive::plane(
      far, 0.0, 0.0, Texture::sinusoid_bank(background_seed ^ 0xb6u, channels, 0.1 * scale, 0.5 * scale));
}

std::optional<RayHit> SyntheticScene::trace(const Eigen::Vector3d& origin,
                                            const Eigen::Vector3d& direction, double t_min,
                                            int skip) const {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    if (static_cast<int>(i) == skip) continue;
    auto hit = intersect(primitives_[i], origin, direction, t_min);
    if (hit && (!best || hit->t < best->t)) {
      hit->primitive = static_cast<int>(i);
      best = hit;
    }
  }
  if (skip != -1) {
    auto hit = intersect(background_, origin, direction, t_min);
    if (hit && (!best || hit->t < best->t)) {
      hit->primitive = -1;
      best = hit;
    }
  }
  return best;
}

SyntheticScene SyntheticScene::transformed(const CameraPose& g) const {
  SyntheticScene out = *this;
  auto apply = [&](Primitive& p) {
    p.placement.rotation = g.rotation() * p.placement.rotation;
    p.placement.origin = g.apply(p.placement.origin);
  };
  for (Primitive& p : out.primitives_) apply(p);
  apply(out.background_);
  return out;
}

SyntheticScene SyntheticScene::with_translated(int index, const Eigen::Vector3d& offset) const {
  SyntheticScene out = *this;
  if (index < 0) {
    out.background_.placement.origin += offset;
  } else {
    out.primitives_.at(static_cast<std::size_t>(index)).placement.origin += offset;
  }
  return out;
}

namespace {

template <typename PerPixel>
void for_each_pixel_ray(const CameraIntrinsics& k, const CameraPose& pose, int threads,
                        PerPixel&& fn) {
  k.validate();
  const Eigen::Vector3d center = pose.center();
  const Eigen::Matrix3d cam_to_world = pose.rotation().transpose();
  parallel_for(k.height, threads, [&](int y) {
    for (int x = 0; x < k.width; ++x) {
      fn(x, y, center, Eigen::Vector3d(cam_to_world * pixel_ray(k, x, y)));
    }
  });
}

DepthImage render_depth_impl(const SyntheticScene& scene, const CameraIntrinsics& k,
                             const CameraPose& pose, int threads) {
  DepthImage depth(k.width, k.height);
  for_each_pixel_ray(k, pose, threads,
                     [&](int x, int y, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
                       const auto hit = scene.trace(o, d);
                       // Rays never reaching the background report its nominal depth.
                       depth(x, y) = hit ? hit->t : scene.background_depth();
                     });
  return depth;
}

FeatureMap render_features_impl(const SyntheticScene& scene, const CameraIntrinsics& k,
                                 const CameraPose& pose, int threads) {
  FeatureMap features{VectorGrid(k.width, k.height, scene.background().texture.channels())};
  for_each_pixel_ray(k, pose, threads,
                     [&](int x, int y, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
                       surface_descriptor(scene, o, d, features.data.at(x, y));
                     });
  return features;
}

Grid<int> render_ids_impl(const SyntheticScene& scene, const CameraIntrinsics& k,
                          const CameraPose& pose, int threads) {
  Grid<int> ids(k.width, k.height, -1);
  for_each_pixel_ray(k, pose, threads,
                     [&](int x, int y, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
                       const auto hit = scene.trace(o, d);
                       ids(x, y) = hit ? hit->primitive : -1;
                     });
  return ids;
}

}  // namespace

DepthImage render_depth(const SyntheticScene& scene, const CameraIntrinsics& k,
                        const CameraPose& pose) {
  return render_depth_impl(scene, k, pose, 1);
}

Grid<int> render_primitive_ids(const SyntheticScene& scene, const CameraIntrinsics& k,
                               const CameraPose& pose) {
  return render_ids_impl(scene, k, pose, 1);
}

FeatureMap render_features(const SyntheticScene& scene, const CameraIntrinsics& k,
                           const CameraPose& pose) {
  return render_features_impl(scene, k, pose, 1);
}

GaussianDepthMap make_prior(const DepthImage& gt, const PriorModel& model, std::uint64_t stream,
                            double sigma_min) {
  if (!(model.mu_noise >= 0.0)) throw ConfigError("prior.mu_noise", "must be non-negative");
  GaussianDepthMap prior(gt.width(), gt.height());
  const std::uint64_t base = splitmix64(splitmix64(model.seed) ^ (stream * 0x2545f4914f6cdd1dULL));
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      const double g = gt(x, y);
      if (!(g > 0.0)) throw DataError("make_prior needs positive ground truth");
      double mu = g;
      if (model.mu_noise > 0.0) {
        const auto pixel = static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(gt.width()) +
                           static_cast<std::uint64_t>(x);
        std::mt19937_64 rng(splitmix64(base + pixel));
        std::normal_distribution<double> noise(0.0, model.mu_noise);
        mu = g * (1.0 + noise(rng));
      }
      prior.mu(x, y) = std::max(mu, sigma_min);
      prior.sigma(x, y) = std::max(model.sigma_a + model.sigma_b * g, sigma_min);
    }
  }
  return prior;
}

std::vector<CameraPose> lateral_trajectory(int n_frames, int reference, double step) {
  if (n_frames < 2) throw ConfigError("trajectory.n_frames", "must be >= 2");
  if (reference < 0 || reference >= n_frames) {
    throw ConfigError("trajectory.reference", "out of range");
  }
  std::vector<CameraPose> poses;
  for (int i = 0; i < n_frames; ++i) {
    poses.emplace_back(Eigen::Matrix3d::Identity(), Eigen::Vector3d(-(i - reference) * step, 0, 0));
  }
  return poses;
}

SyntheticWindow make_window(const SyntheticScene& scene, const CameraIntrinsics& intrinsics,
                            std::span<const CameraPose> trajectory, int reference,
                            const std::optional<CorruptionSpec>& corruption,
                            const PriorModel& prior_model, double sigma_min, int threads) {
  if (trajectory.size() < 2) throw ConfigError("trajectory", "at least two poses are required");
  if (reference < 0 || reference >= static_cast<int>(trajectory.size())) {
    throw ConfigError("trajectory.reference", "out of range");
  }
  intrinsics.validate();

  SyntheticScene base = scene;
  if (corruption) {
    const int id = corruption->primitive;
    if (id < -1 || id >= static_cast<int>(scene.primitives().size())) {
      throw ConfigError("corruption.primitive", "no primitive with index " + std::to_string(id));
    }
    if (id >= 0) {
      Primitive& p = base.primitives()[static_cast<std::size_t>(id)];
      if (corruption->kind == CorruptionKind::texture_less) {
        p.texture = Texture::constant(p.texture.channels());
      } else if (corruption->kind == CorruptionKind::reflective) {
        p.mirror = true;
      }
    } else if (corruption->kind != CorruptionKind::moving_object) {
      throw ConfigError("corruption.primitive", "the background can only be moved");
    }
  }

  SyntheticWindow out;
  out.window.reference = reference;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const int offset_steps = static_cast<int>(i) - reference;
    const SyntheticScene& frame_scene =
        corruption && corruption->kind == CorruptionKind::moving_object && offset_steps != 0
            ? base.with_translated(corruption->primitive,
                                   static_cast<double>(offset_steps) * corruption->motion)
            : base;
    Frame frame;
    frame.id = static_cast<int>(i);
    frame.intrinsics = intrinsics;
    frame.pose = trajectory[i];
    const DepthImage depth = render_depth_impl(frame_scene, intrinsics, frame.pose, threads);
    frame.features = render_features_impl(frame_scene, intrinsics, frame.pose, threads);
    frame.prior = make_prior(depth, prior_model, static_cast<std::uint64_t>(i), sigma_min);
    if (static_cast<int>(i) == reference) {
      out.ground_truth = depth;
      if (corruption) {
        const Grid<int> ids = render_ids_impl(base, intrinsics, frame.pose, threads);
        out.region = Mask(intrinsics.width, intrinsics.height);
        for (int y = 0; y < intrinsics.height; ++y) {
          for (int x = 0; x < intrinsics.width; ++x) {
            out.region(x, y) = ids(x, y) == corruption->primitive ? 255 : 0;
          }
        }
      }
    }
    out.window.frames.push_back(std::move(frame));
  }
  if (corruption) {
    const auto& v = out.region.values();
    if (std::ranges::none_of(v, [](unsigned char m) { return m != 0; })) {
      throw ConfigError("corruption.primitive", "corrupted primitive is not visible in the reference view");
    }
  }
  return out;
}

}  // namespace depthfuse
