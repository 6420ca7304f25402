#pragma once

#include <vector>

#include "grid.hpp"

namespace depthfuse {

inline constexpr double kDefaultSigmaMin = 1e-3;

/// Per-pixel Gaussian depth distribution N(mu, sigma^2).
struct GaussianDepthMap {
  DepthImage mu;
  DepthImage sigma;

  GaussianDepthMap() = default;
  GaussianDepthMap(int width, int height, double mu_fill = 1.0, double sigma_fill = 1.0)
      : mu(width, height, mu_fill), sigma(width, height, sigma_fill) {}
  GaussianDepthMap(DepthImage mu_in, DepthImage sigma_in);

  int width() const noexcept { return mu.width(); }
  int height() const noexcept { return mu.height(); }

  /// Raises every sigma below `sigma_min` to `sigma_min`.
  void apply_sigma_floor(double sigma_min);

  /// Throws DataError if shapes differ, any mu <= 0, or any sigma < sigma_min.
  void validate(double sigma_min) const;

  friend bool operator==(const GaussianDepthMap&, const GaussianDepthMap&) = default;
};

double erf(double x);

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF. Throws DomainError unless 0 < p < 1.
double probit(double p);

/// Offsets {b_k}, in sigmas, of the mid-points of N_s equal-mass bins
/// covering [-beta, beta].
struct BinCoefficients {
  std::vector<double> b;
  int n_samples = 0;
  double beta = 0.0;
  double p_star = 0.0;

  /// Probability-space edges of bin k (0-based): [lo, hi].
  double lower_edge_probability(int k) const;
  double upper_edge_probability(int k) const;
};

/// Throws DomainError unless n_samples >= 1 and beta > 0.
BinCoefficients bin_coefficients(int n_samples, double beta);

/// Process-wide memoized bin_coefficients; the returned reference stays valid
/// for the lifetime of the program.
const BinCoefficients& cached_bin_coefficients(int n_samples, double beta);

/// Candidate depths, [height][width][N_s], strictly increasing per pixel.
struct DepthCandidateGrid {
  VectorGrid depths;

  int width() const noexcept { return depths.width(); }
  int height() const noexcept { return depths.height(); }
  int n_samples() const noexcept { return depths.channels(); }
};

/// mu + b_k * sigma for every k, clamped below by the ladder
/// d_floor * (1 + k * 1e-6) so that the result stays positive and strictly
/// increasing. `out` must have coeffs.n_samples entries.
void candidate_depths(double mu, double sigma, const BinCoefficients& coeffs, double d_floor,
                      std::span<double> out);

/// candidate_depths minus mu, with unclamped entries computed as b_k * sigma
/// directly so that mu + offset reproduces the candidate bit-for-bit.
void candidate_offsets(double mu, double sigma, const BinCoefficients& coeffs, double d_floor,
                       std::span<double> out);

DepthCandidateGrid sample_candidates(const GaussianDepthMap& prior, const BinCoefficients& coeffs,
                                     double d_floor);

double gaussian_pdf(double d, double mu, double sigma);

/// Density of N(mu, sigma^2) at the kappa-sigma boundary. A depth lies
/// strictly inside the kappa-sigma interval iff its density exceeds this.
double consistency_threshold(double sigma, double kappa);

/// Same predicate as gaussian_pdf(d, mu, sigma) > consistency_threshold(sigma, kappa),
/// evaluated on log densities so it does not underflow for far-off depths or
/// kappa = +inf.
bool within_consistency_band(double d, double mu, double sigma, double kappa);

/// 0.5 log sigma^2 + (d_gt - mu)^2 / (2 sigma^2), without the 0.5 log(2 pi) constant.
double nll(double d_gt, double mu, double sigma);

}  // namespace depthfuse
