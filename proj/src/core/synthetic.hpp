#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "geometry.hpp"
#include "grid.hpp"
#include "matching.hpp"
#include "probability.hpp"

namespace depthfuse {

inline constexpr int kDefaultFeatureChannels = 16;

/// Band-limited procedural texture: channel pairs (cos, sin) of
/// omega_j . x + phi_j over primitive-local coordinates, scaled so every
/// descriptor has unit norm. A constant texture returns the same unit vector
/// everywhere.
class Texture {
 public:
  /// `channels` must be even. Wavelengths (meters) are drawn log-uniformly.
  static Texture sinusoid_bank(std::uint64_t seed, int channels = kDefaultFeatureChannels,
                               double min_wavelength = 0.1, double max_wavelength = 0.5);
  static Texture constant(int channels = kDefaultFeatureChannels);

  int channels() const noexcept { return channels_; }
  bool is_constant() const noexcept { return frequencies_.empty(); }

  void evaluate(const Eigen::Vector3d& local_point, std::span<double> out) const;

 private:
  int channels_ = kDefaultFeatureChannels;
  std::vector<Eigen::Vector3d> frequencies_;  // radians per meter
  std::vector<double> phases_;
};

/// Rigid placement of a primitive: world = rotation * local + origin.
struct Placement {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();

  Eigen::Vector3d to_local(const Eigen::Vector3d& world) const {
    return rotation.transpose() * (world - origin);
  }
  Eigen::Vector3d to_world(const Eigen::Vector3d& local) const {
    return rotation * local + origin;
  }
};

enum class PrimitiveKind { plane, sphere, box };

/// Plane: local z = 0, bounded by |x| <= extent.x, |y| <= extent.y (unbounded
/// when an extent is <= 0). Sphere: radius extent.x about the local origin.
/// Box: axis-aligned in local frame with half sizes extent.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::plane;
  Placement placement;
  Eigen::Vector3d extent = Eigen::Vector3d::Zero();
  Texture texture;
  bool mirror = false;  // features come from the reflected ray's hit

  static Primitive plane(const Placement& placement, double half_width, double half_height,
                         Texture texture);
  static Primitive sphere(const Eigen::Vector3d& center, double radius, Texture texture);
  static Primitive box(const Placement& placement, const Eigen::Vector3d& half_extent,
                       Texture texture);
};

struct RayHit {
  double t = 0.0;           // ray parameter (world units of the direction vector)
  int primitive = -1;       // index into SyntheticScene::primitives, -1 = background
  Eigen::Vector3d point = Eigen::Vector3d::Zero();   // world
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // world, unit
};

/// Primitives in front of a textured background plane z = background_depth
/// (world). Nearest hit wins.
class SyntheticScene {
 public:
  SyntheticScene(std::vector<Primitive> primitives, double background_depth,
                 std::uint64_t background_seed = 0);

  const std::vector<Primitive>& primitives() const noexcept { return primitives_; }
  std::vector<Primitive>& primitives() noexcept { return primitives_; }
  double background_depth() const noexcept { return background_depth_; }
  const Primitive& background() const noexcept { return background_; }

  /// Nearest intersection with t > t_min, skipping primitive `skip` (-2 = none).
  std::optional<RayHit> trace(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                              double t_min = 1e-9, int skip = -2) const;

  const Primitive& primitive(int index) const {
    return index < 0 ? background_ : primitives_.at(static_cast<std::size_t>(index));
  }

  /// Applies a world-to-world rigid transform to every primitive and the background.
  SyntheticScene transformed(const CameraPose& world_to_new) const;

  /// Copy with primitive `index` shifted by `offset` (world).
  SyntheticScene with_translated(int index, const Eigen::Vector3d& offset) const;

 private:
  std::vector<Primitive> primitives_;
  double background_depth_;
  Primitive background_;
};

/// Per-pixel camera depth (z in the camera frame) of the nearest surface.
DepthImage render_depth(const SyntheticScene& scene, const CameraIntrinsics& intrinsics,
                        const CameraPose& pose);

/// Index of the primitive hit first at every pixel (-1 = background).
Grid<int> render_primitive_ids(const SyntheticScene& scene, const CameraIntrinsics& intrinsics,
                               const CameraPose& pose);

/// Unit descriptors of the surface seen at every pixel. Mirror primitives
/// report the descriptor of whatever their reflected ray hits.
FeatureMap render_features(const SyntheticScene& scene, const CameraIntrinsics& intrinsics,
                           const CameraPose& pose);

/// Stand-in for a single-view depth network.
struct PriorModel {
  double mu_noise = 0.1;   // std of the multiplicative error on mu
  double sigma_a = 0.0;    // sigma = sigma_a + sigma_b * gt
  double sigma_b = 0.15;
  std::uint64_t seed = 0;
};

/// mu = gt (1 + eps), eps ~ N(0, mu_noise^2) from a generator seeded per
/// (seed, stream, pixel); sigma = max(sigma_a + sigma_b gt, sigma_min).
/// Output is independent of evaluation order.
GaussianDepthMap make_prior(const DepthImage& gt, const PriorModel& model, std::uint64_t stream,
                            double sigma_min = kDefaultSigmaMin);

enum class CorruptionKind { texture_less, reflective, moving_object };

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::texture_less;
  int primitive = 0;
  Eigen::Vector3d motion = Eigen::Vector3d::Zero();  // per frame step, moving_object only
};

struct SyntheticWindow {
  FrameWindow window;
  DepthImage ground_truth;  // reference frame
  Mask region;              // corrupted pixels of the reference frame; empty without corruption
};

/// Renders every pose of the trajectory and attaches per-frame priors built
/// from each frame's own ground truth. Throws ConfigError on an invalid
/// trajectory, reference index, or corruption target.
SyntheticWindow make_window(const SyntheticScene& scene, const CameraIntrinsics& intrinsics,
                            std::span<const CameraPose> trajectory, int reference,
                            const std::optional<CorruptionSpec>& corruption,
                            const PriorModel& prior_model, double sigma_min = kDefaultSigmaMin,
                            int threads = 1);

/// Poses of cameras with identity orientation whose centers step along world
/// +x by `step`, with the reference at the origin.
std::vector<CameraPose> lateral_trajectory(int n_frames, int reference, double step);

}  // namespace depthfuse
