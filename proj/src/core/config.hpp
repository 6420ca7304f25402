#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusion.hpp"
#include "geometry.hpp"
#include "synthetic.hpp"

namespace depthfuse {

/// Which parts of the pipeline are active.
///   US    - uniform candidates in [d_min, d_max], no consistency gate
///   PS    - probabilistic candidates, no consistency gate
///   PS+CW - probabilistic candidates with consistency weighting
enum class AblationArm { uniform, probabilistic, probabilistic_weighted };

std::string to_string(AblationArm arm);
AblationArm parse_arm(const std::string& text);  // throws ConfigError("arm", ...)

struct TextureConfig {
  std::uint64_t seed = 0;
  double min_wavelength = 0.1;
  double max_wavelength = 0.5;
  bool constant = false;
};

struct PrimitiveConfig {
  PrimitiveKind kind = PrimitiveKind::plane;
  std::array<double, 12> pose{1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0};  // R row-major, origin
  std::array<double, 3> size{0, 0, 0};  // plane: half w/h; sphere: radius; box: half extents
  TextureConfig texture;
};

struct SceneConfig {
  double background_depth = 8.0;
  std::uint64_t background_seed = 1;
  std::vector<PrimitiveConfig> primitives;
};

struct CameraConfig {
  CameraIntrinsics full;  // full-resolution intrinsics
  int downsample = 4;     // matching grid = full / downsample

  CameraIntrinsics matching() const { return full.scaled(1.0 / downsample); }
};

struct TrajectoryConfig {
  enum class Kind { lateral, explicit_poses } kind = Kind::lateral;
  int n_frames = 5;
  int reference = 2;
  double step = 0.1;
  std::vector<std::array<double, 12>> poses;

  std::vector<CameraPose> build() const;
};

struct ExperimentConfig {
  SceneConfig scene;
  CameraConfig camera;
  TrajectoryConfig trajectory;
  PriorModel prior;  // prior.seed is overwritten by `seed`
  std::optional<CorruptionSpec> corruption;
  FusionConfig fusion;
  AblationArm arm = AblationArm::probabilistic_weighted;
  std::uint64_t seed = 0;
  std::optional<double> depth_cap;
  std::string output_dir = "depthfuse_out";

  /// Parses and validates. Unknown keys and ill-typed values are ConfigError
  /// naming the JSON path of the offending field.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_json_text(const std::string& text);

  /// Fully resolved config, accepted back by from_json.
  nlohmann::json to_json() const;

  /// Fusion settings with the arm's sampling mode and weighting applied.
  FusionConfig effective_fusion() const;

  SyntheticScene build_scene() const;

  void validate() const;

  /// Sets a numeric sweep axis: n_samples, n_iter, beta, kappa, temperature.
  void set_axis(const std::string& axis, double value);
};

}  // namespace depthfuse
