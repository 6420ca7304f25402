#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "geometry.hpp"
#include "grid.hpp"
#include "probability.hpp"

namespace depthfuse {

/// Per-pixel descriptors, unit L2 norm.
struct FeatureMap {
  VectorGrid data;

  int width() const noexcept { return data.width(); }
  int height() const noexcept { return data.height(); }
  int channels() const noexcept { return data.channels(); }
};

/// One image of the local window, already at matching resolution.
struct Frame {
  int id = 0;
  CameraIntrinsics intrinsics;
  CameraPose pose;
  FeatureMap features;
  GaussianDepthMap prior;
};

/// Ordered frames plus the index of the reference frame.
struct FrameWindow {
  std::vector<Frame> frames;
  int reference = 0;

  const Frame& reference_frame() const { return frames.at(static_cast<std::size_t>(reference)); }

  /// Throws ConfigError unless there are >= 2 frames, the reference index is
  /// valid, and every frame's features/prior match its intrinsics.
  void validate() const;
};

/// Normalized matching scores and the number of views behind each one.
struct CostVolume {
  VectorGrid scores;
  BasicVectorGrid<std::uint16_t> view_counts;

  int width() const noexcept { return scores.width(); }
  int height() const noexcept { return scores.height(); }
  int n_samples() const noexcept { return scores.channels(); }

  friend bool operator==(const CostVolume&, const CostVolume&) = default;
};

double match_score(std::span<const double> f_ref, std::span<const double> f_nbr);

/// 1 if the projected depth is inside the kappa-sigma band of the neighbor
/// prior interpolated at the projection, else 0. Requires in_frustum.
int consistency_weight(const PixelProjection& projection, const GaussianDepthMap& nbr_prior,
                       double kappa);

struct MatchingOptions {
  double kappa = 5.0;
  bool weighting_enabled = true;
  int threads = 1;
};

/// Scores every candidate of the reference frame against all other frames.
/// Views whose projection leaves the frustum are skipped. With weighting
/// enabled, a view failing the consistency gate contributes zero. The stored
/// score is the weighted sum divided by the number of in-frustum views, and
/// view_counts holds the number of views that actually contributed.
CostVolume build_cost_volume(const FrameWindow& window, const DepthCandidateGrid& candidates,
                             const MatchingOptions& options);

/// Same N_s depths at every pixel, evenly spaced on [d_min, d_max]
/// (the midpoint when N_s = 1). Throws ConfigError on invalid limits.
DepthCandidateGrid uniform_candidates(double d_min, double d_max, int n_samples, int width,
                                      int height);

}  // namespace depthfuse
