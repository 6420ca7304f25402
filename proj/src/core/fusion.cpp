#include "fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "parallel.hpp"

namespace depthfuse {

void FusionConfig::validate() const {
  if (n_samples < 1) throw ConfigError("n_samples", "must be >= 1");
  if (n_samples > 4096) throw ConfigError("n_samples", "must be <= 4096");
  if (n_iter < 1) throw ConfigError("n_iter", "must be >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta", "must be positive");
  if (!(kappa > 0.0)) throw ConfigError("kappa", "must be positive");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature", "must be positive");
  }
  if (!(sigma_min > 0.0)) throw ConfigError("sigma_min", "must be positive");
  if (!(d_floor > 0.0)) throw ConfigError("d_floor", "must be positive");
  if (sampling_mode == SamplingMode::uniform) {
    if (!(d_min > 0.0)) throw ConfigError("d_min", "must be positive");
    if (!(d_max > d_min)) throw ConfigError("d_max", "must exceed d_min");
  }
}

std::vector<double> softmax_weights(std::span<const double> scores, double temperature) {
  std::vector<double> w(scores.size());
  if (scores.empty()) return w;
  const double top = *std::ranges::max_element(scores);
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    w[k] = std::exp((scores[k] - top) / temperature);
    total += w[k];
  }
  for (double& v : w) v /= total;
  return w;
}

double expected_depth(std::span<const double> weights, std::span<const double> candidates) {
  double d = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) d += weights[k] * candidates[k];
  return d;
}

bool penalize_unobserved(std::span<double> scores, std::span<const std::uint16_t> view_counts,
                         double temperature) {
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (view_counts[k] > 0) lowest = std::min(lowest, scores[k]);
  }
  if (!std::isfinite(lowest)) return false;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (view_counts[k] == 0) scores[k] = lowest - temperature;
  }
  return true;
}

std::pair<double, double> moment_update(std::span<const double> scores,
                                        std::span<const std::uint16_t> view_counts,
                                        std::span<const double> offsets, double prior_mu,
                                        double prior_sigma, double temperature, double sigma_min) {
  std::vector<double> adjusted(scores.begin(), scores.end());
  if (!penalize_unobserved(adjusted, view_counts, temperature)) return {prior_mu, prior_sigma};

  const std::vector<double> p = softmax_weights(adjusted, temperature);
  double residual = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) residual += p[k] * offsets[k];
  double variance = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double e = offsets[k] - residual;
    variance += p[k] * e * e;
  }
  const double sigma = std::sqrt(std::max(variance, sigma_min * sigma_min));
  return {prior_mu + residual, sigma};
}

std::pair<double, double> analytic_update(std::span<const double> scores,
                                          std::span<const std::uint16_t> view_counts,
                                          double prior_mu, double prior_sigma,
                                          const BinCoefficients& coeffs,
                                          const FusionConfig& config) {
  std::vector<double> offsets(coeffs.b.size());
  candidate_offsets(prior_mu, prior_sigma, coeffs, config.d_floor, offsets);
  return moment_update(scores, view_counts, offsets, prior_mu, prior_sigma,
                       config.temperature, config.sigma_min);
}

CostVolumeSummary summarize(const CostVolume& volume) {
  CostVolumeSummary s;
  double score_sum = 0.0;
  long long observed = 0, unobserved = 0, fallback = 0;
  const int n = volume.n_samples();
  for (int y = 0; y < volume.height(); ++y) {
    for (int x = 0; x < volume.width(); ++x) {
      const auto scores = volume.scores.at(x, y);
      const auto counts = volume.view_counts.at(x, y);
      bool any = false;
      for (int k = 0; k < n; ++k) {
        if (counts[k] > 0) {
          score_sum += scores[k];
          ++observed;
          any = true;
        } else {
          ++unobserved;
        }
      }
      fallback += any ? 0 : 1;
    }
  }
  const double cells = static_cast<double>(observed + unobserved);
  const double pixels = static_cast<double>(volume.width()) * volume.height();
  s.mean_score = observed > 0 ? score_sum / static_cast<double>(observed) : 0.0;
  s.unobserved_fraction = cells > 0 ? static_cast<double>(unobserved) / cells : 0.0;
  s.fallback_fraction = pixels > 0 ? static_cast<double>(fallback) / pixels : 0.0;
  return s;
}

std::pair<GaussianDepthMap, IterationTrace> refine_from(const FrameWindow& window,
                                                        const GaussianDepthMap& initial,
                                                        int iterations, const FusionConfig& config,
                                                        const BinCoefficients& coeffs,
                                                        const RefineOptions& options) {
  config.validate();
  window.validate();
  if (iterations < 0) throw ConfigError("n_iter", "must be non-negative");
  const Frame& ref = window.reference_frame();
  if (initial.width() != ref.intrinsics.width || initial.height() != ref.intrinsics.height) {
    throw ConfigError("prior", "initial map does not match the reference frame");
  }
  if (config.sampling_mode == SamplingMode::probabilistic &&
      coeffs.n_samples != config.n_samples) {
    throw ConfigError("n_samples", "bin coefficients were built for a different N_s");
  }

  const MatchingOptions matching{config.kappa, config.weighting_enabled, options.threads};
  GaussianDepthMap current = initial;
  IterationTrace trace;
  trace.iterations.reserve(static_cast<std::size_t>(iterations));

  for (int it = 0; it < iterations; ++it) {
    const DepthCandidateGrid candidates =
        config.sampling_mode == SamplingMode::probabilistic
            ? sample_candidates(current, coeffs, config.d_floor)
            : uniform_candidates(config.d_min, config.d_max, config.n_samples, current.width(),
                                 current.height());
    const CostVolume volume = build_cost_volume(window, candidates, matching);

    GaussianDepthMap next = current;
    parallel_for(current.height(), options.threads, [&](int y) {
      std::vector<double> offsets(static_cast<std::size_t>(candidates.n_samples()));
      for (int x = 0; x < current.width(); ++x) {
        const double mu0 = current.mu(x, y);
        if (config.sampling_mode == SamplingMode::probabilistic) {
          candidate_offsets(mu0, current.sigma(x, y), coeffs, config.d_floor, offsets);
        } else {
          const auto depths = candidates.depths.at(x, y);
          for (std::size_t k = 0; k < offsets.size(); ++k) offsets[k] = depths[k] - mu0;
        }
        const auto [mu, sigma] =
            moment_update(volume.scores.at(x, y), volume.view_counts.at(x, y), offsets, mu0,
                          current.sigma(x, y), config.temperature, config.sigma_min);
        next.mu(x, y) = mu;
        next.sigma(x, y) = sigma;
      }
    });
    current = std::move(next);

    IterationSnapshot snap{current, summarize(volume), std::nullopt};
    if (options.ground_truth != nullptr) {
      MetricsOptions mo;
      mo.region_label = "iter" + std::to_string(it + 1);
      snap.metrics = compute_metrics(current, *options.ground_truth, mo);
    }
    trace.iterations.push_back(std::move(snap));
  }
  return {std::move(current), std::move(trace)};
}

std::pair<GaussianDepthMap, IterationTrace> refine(const FrameWindow& window,
                                                   const FusionConfig& config,
                                                   const BinCoefficients& coeffs,
                                                   const RefineOptions& options) {
  window.validate();
  return refine_from(window, window.reference_frame().prior, config.n_iter, config, coeffs,
                     options);
}

GaussianDepthMap upsample_bilinear(const GaussianDepthMap& map, int factor, double sigma_min) {
  if (factor < 1) throw DomainError("upsampling factor must be >= 1");
  if (factor == 1) return map;
  const int w = map.width() * factor;
  const int h = map.height() * factor;
  const double sx = map.width() > 1 ? static_cast<double>(map.width() - 1) / (w - 1) : 0.0;
  const double sy = map.height() > 1 ? static_cast<double>(map.height() - 1) / (h - 1) : 0.0;
  GaussianDepthMap out(w, h);
  for (int y = 0; y < h; ++y) {
    // Clamp guards against the last sample landing a rounding step past the border.
    const double v = std::min(y * sy, static_cast<double>(map.height() - 1));
    for (int x = 0; x < w; ++x) {
      const double u = std::min(x * sx, static_cast<double>(map.width() - 1));
      out.mu(x, y) = bilinear_sample(map.mu, u, v);
      out.sigma(x, y) = bilinear_sample(map.sigma, u, v);
    }
  }
  out.apply_sigma_floor(sigma_min);
  return out;
}

}  // namespace depthfuse
