#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "matching.hpp"
#include "metrics.hpp"
#include "probability.hpp"

namespace depthfuse {

enum class SamplingMode { probabilistic, uniform };

inline constexpr double kDefaultTemperature = 0.1;

struct FusionConfig {
  int n_samples = 5;
  int n_iter = 3;
  double beta = 3.0;
  double kappa = 5.0;
  double gamma = 0.8;  // training-loss weight; carried for config fidelity only
  double temperature = kDefaultTemperature;
  double sigma_min = kDefaultSigmaMin;
  double d_floor = 0.1;
  bool weighting_enabled = true;
  SamplingMode sampling_mode = SamplingMode::probabilistic;
  double d_min = 0.5;
  double d_max = 10.0;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// softmax_k(s_k / temperature), stabilized by subtracting the maximum.
std::vector<double> softmax_weights(std::span<const double> scores, double temperature);

double expected_depth(std::span<const double> weights, std::span<const double> candidates);

/// Replaces the score of every candidate no view could evaluate by the
/// lowest observed score minus one temperature unit. Returns false (and
/// leaves `scores` untouched) when no candidate was observed.
bool penalize_unobserved(std::span<double> scores, std::span<const std::uint16_t> view_counts,
                         double temperature);

/// Softmax moment matching. `offsets` are the candidate depths minus
/// prior_mu. The new mean is the expected candidate depth and the new variance
/// the weighted spread around it, floored at sigma_min^2. Pixels with no
/// observed candidate keep (prior_mu, prior_sigma).
std::pair<double, double> moment_update(std::span<const double> scores,
                                        std::span<const std::uint16_t> view_counts,
                                        std::span<const double> offsets, double prior_mu,
                                        double prior_sigma, double temperature, double sigma_min);

/// Moment update on the candidates mu + b_k sigma drawn from `coeffs`.
/// Without clamping this is mu_new = mu + sigma * sum_k p_k b_k and
/// sigma_new^2 = sigma^2 * sum_k p_k (b_k - r)^2.
std::pair<double, double> analytic_update(std::span<const double> scores,
                                          std::span<const std::uint16_t> view_counts,
                                          double prior_mu, double prior_sigma,
                                          const BinCoefficients& coeffs,
                                          const FusionConfig& config);

struct CostVolumeSummary {
  double mean_score = 0.0;          // over observed candidates
  double unobserved_fraction = 0.0; // candidates with view count 0
  double fallback_fraction = 0.0;   // pixels with no observed candidate

  friend bool operator==(const CostVolumeSummary&, const CostVolumeSummary&) = default;
};

CostVolumeSummary summarize(const CostVolume& volume);

struct IterationSnapshot {
  GaussianDepthMap map;
  CostVolumeSummary volume;
  std::optional<MetricsReport> metrics;

  friend bool operator==(const IterationSnapshot&, const IterationSnapshot&) = default;
};

struct IterationTrace {
  std::vector<IterationSnapshot> iterations;

  friend bool operator==(const IterationTrace&, const IterationTrace&) = default;
};

struct RefineOptions {
  int threads = 1;
  const DepthImage* ground_truth = nullptr;  // enables per-iteration metrics
};

/// Runs `iterations` rounds of sample -> match -> update starting from
/// `initial` as the reference distribution. Neighbor priors in `window` are
/// used for consistency gating and are never modified.
std::pair<GaussianDepthMap, IterationTrace> refine_from(const FrameWindow& window,
                                                        const GaussianDepthMap& initial,
                                                        int iterations, const FusionConfig& config,
                                                        const BinCoefficients& coeffs,
                                                        const RefineOptions& options = {});

/// refine_from starting at the reference frame's own prior for config.n_iter rounds.
std::pair<GaussianDepthMap, IterationTrace> refine(const FrameWindow& window,
                                                   const FusionConfig& config,
                                                   const BinCoefficients& coeffs,
                                                   const RefineOptions& options = {});

/// Bilinear (corner-aligned) upsampling of mu and sigma by an integer factor;
/// the sigma floor is re-applied.
GaussianDepthMap upsample_bilinear(const GaussianDepthMap& map, int factor,
                                   double sigma_min = kDefaultSigmaMin);

}  // namespace depthfuse
