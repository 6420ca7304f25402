#include "matching.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"
#include "parallel.hpp"

namespace depthfuse {

void FrameWindow::validate() const {
  if (frames.size() < 2) throw ConfigError("window", "at least two frames are required");
  if (reference < 0 || reference >= static_cast<int>(frames.size())) {
    throw ConfigError("window.reference", "reference index out of range");
  }
  const int channels = frames.front().features.channels();
  for (const Frame& f : frames) {
    f.intrinsics.validate();
    const int w = f.intrinsics.width;
    const int h = f.intrinsics.height;
    if (f.features.width() != w || f.features.height() != h || f.prior.width() != w ||
        f.prior.height() != h) {
      throw ConfigError("window", "frame " + std::to_string(f.id) +
                                      " features/prior do not match its intrinsics");
    }
    if (f.features.channels() != channels) {
      throw ConfigError("window", "feature channel counts differ between frames");
    }
  }
}

double match_score(std::span<const double> f_ref, std::span<const double> f_nbr) {
  if (f_ref.size() != f_nbr.size()) throw DomainError("feature channel mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < f_ref.size(); ++c) s += f_ref[c] * f_nbr[c];
  return s;
}

int consistency_weight(const PixelProjection& projection, const GaussianDepthMap& nbr_prior,
                       double kappa) {
  if (!projection.in_frustum) throw DomainError("consistency_weight needs an in-frustum projection");
  const double mu = bilinear_sample(nbr_prior.mu, projection.u, projection.v);
  const double sigma = bilinear_sample(nbr_prior.sigma, projection.u, projection.v);
  return within_consistency_band(projection.depth, mu, sigma, kappa) ? 1 : 0;
}

CostVolume build_cost_volume(const FrameWindow& window, const DepthCandidateGrid& candidates,
                             const MatchingOptions& options) {
  window.validate();
  const Frame& ref = window.reference_frame();
  const int width = ref.intrinsics.width;
  const int height = ref.intrinsics.height;
  if (candidates.width() != width || candidates.height() != height) {
    throw ConfigError("candidates", "candidate grid does not match the reference frame");
  }
  const int n_samples = candidates.n_samples();
  const int channels = ref.features.channels();

  // Reference camera -> neighbor camera transforms, one per neighbor.
  struct Neighbor {
    const Frame* frame;
    CameraPose ref_to_nbr;
  };
  std::vector<Neighbor> neighbors;
  const CameraPose ref_to_world = ref.pose.inverse();
  for (std::size_t i = 0; i < window.frames.size(); ++i) {
    if (static_cast<int>(i) == window.reference) continue;
    const Frame& f = window.frames[i];
    neighbors.push_back({&f, f.pose.compose(ref_to_world)});
  }

  CostVolume volume{VectorGrid(width, height, n_samples),
                    BasicVectorGrid<std::uint16_t>(width, height, n_samples)};

  parallel_for(height, options.threads, [&](int y) {
    std::vector<double> sampled(static_cast<std::size_t>(channels));
    for (int x = 0; x < width; ++x) {
      const auto f_ref = ref.features.data.at(x, y);
      const auto depths = candidates.depths.at(x, y);
      auto scores = volume.scores.at(x, y);
      auto counts = volume.view_counts.at(x, y);
      for (int k = 0; k < n_samples; ++k) {
        const Eigen::Vector3d point_ref = back_project(x, y, depths[k], ref.intrinsics);
        double sum = 0.0;
        int count = 0;
        int visible = 0;
        for (const Neighbor& nbr : neighbors) {
          const PixelProjection p =
              project_to_view(point_ref, nbr.ref_to_nbr, nbr.frame->intrinsics);
          if (!p.in_frustum) continue;
          ++visible;
          if (options.weighting_enabled &&
              consistency_weight(p, nbr.frame->prior, options.kappa) == 0) {
            continue;
          }
          bilinear_sample(nbr.frame->features.data, p.u, p.v, sampled);
          // Blending unit vectors shortens them, which would favor candidates
          // that land on pixel centers. Restore unit length.
          const double norm = std::sqrt(match_score(sampled, sampled));
          if (norm > 0.0) {
            for (double& c : sampled) c /= norm;
          }
          sum += match_score(f_ref, sampled);
          ++count;
        }
        // Gated views stay in the denominator: a rejected view counts as a zero
        // contribution rather than as missing evidence.
        scores[k] = count > 0 ? sum / visible : 0.0;
        counts[k] = static_cast<std::uint16_t>(count);
      }
    }
  });
  return volume;
}

DepthCandidateGrid uniform_candidates(double d_min, double d_max, int n_samples, int width,
                                      int height) {
  if (!(d_min > 0.0)) throw ConfigError("d_min", "must be positive");
  if (!(d_max > d_min)) throw ConfigError("d_max", "must exceed d_min");
  if (n_samples < 1) throw ConfigError("n_samples", "must be >= 1");
  std::vector<double> ladder(static_cast<std::size_t>(n_samples));
  if (n_samples == 1) {
    ladder[0] = 0.5 * (d_min + d_max);
  } else {
    const double step = (d_max - d_min) / (n_samples - 1);
    for (int k = 0; k < n_samples; ++k) ladder[static_cast<std::size_t>(k)] = d_min + k * step;
    ladder.back() = d_max;
  }
  DepthCandidateGrid out{VectorGrid(width, height, n_samples)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) std::ranges::copy(ladder, out.depths.at(x, y).begin());
  }
  return out;
}

}  // namespace depthfuse
