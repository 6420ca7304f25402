#include "probability.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

#include "errors.hpp"

namespace depthfuse {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)
constexpr double kLadderStep = 1e-6;

// Acklam's rational approximation to the normal quantile, |rel err| < 1.15e-9.
double probit_initial_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

GaussianDepthMap::GaussianDepthMap(DepthImage mu_in, DepthImage sigma_in)
    : mu(std::move(mu_in)), sigma(std::move(sigma_in)) {
  if (!mu.same_shape(sigma)) throw DataError("mu and sigma maps differ in shape");
}

void GaussianDepthMap::apply_sigma_floor(double sigma_min) {
  for (double& s : sigma.values()) s = std::max(s, sigma_min);
}

void GaussianDepthMap::validate(double sigma_min) const {
  if (!mu.same_shape(sigma)) throw DataError("mu and sigma maps differ in shape");
  for (double m : mu.values()) {
    if (!(m > 0.0)) throw DataError("non-positive mean depth in map");
  }
  for (double s : sigma.values()) {
    if (!(s >= sigma_min)) throw DataError("sigma below floor in map");
  }
}

double erf(double x) { return std::erf(x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double probit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("probit requires 0 < p < 1");
  // 1 - p is exact for p >= 0.5, so reflect into the lower half where the
  // CDF residual keeps full relative precision.
  if (p > 0.5) return -probit(1.0 - p);
  double x = probit_initial_guess(p);
  for (int i = 0; i < 2; ++i) {
    const double density = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    x -= (normal_cdf(x) - p) / density;
  }
  return x;
}

double BinCoefficients::lower_edge_probability(int k) const {
  return static_cast<double>(k) / n_samples * p_star + 0.5 * (1.0 - p_star);
}

double BinCoefficients::upper_edge_probability(int k) const {
  return static_cast<double>(k + 1) / n_samples * p_star + 0.5 * (1.0 - p_star);
}

BinCoefficients bin_coefficients(int n_samples, double beta) {
  if (n_samples < 1) throw DomainError("n_samples must be >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");

  BinCoefficients out;
  out.n_samples = n_samples;
  out.beta = beta;
  out.p_star = erf(beta / std::numbers::sqrt2);
  out.b.resize(static_cast<std::size_t>(n_samples));

  // Only the lower half is evaluated; the upper half mirrors it so the
  // offsets are exactly antisymmetric.
  for (int k = 0; k < n_samples / 2; ++k) {
    const double lo = probit(out.lower_edge_probability(k));
    const double hi = probit(out.upper_edge_probability(k));
    out.b[static_cast<std::size_t>(k)] = 0.5 * (lo + hi);
    out.b[static_cast<std::size_t>(n_samples - 1 - k)] = -0.5 * (lo + hi);
  }
  if (n_samples % 2 == 1) out.b[static_cast<std::size_t>(n_samples / 2)] = 0.0;
  return out;
}

const BinCoefficients& cached_bin_coefficients(int n_samples, double beta) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::unique_ptr<const BinCoefficients>> cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{n_samples, beta}];
  if (!slot) slot = std::make_unique<const BinCoefficients>(bin_coefficients(n_samples, beta));
  return *slot;
}

void candidate_depths(double mu, double sigma, const BinCoefficients& coeffs, double d_floor,
                      std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double ladder = d_floor * (1.0 + static_cast<double>(k) * kLadderStep);
    out[k] = std::max(mu + coeffs.b[k] * sigma, ladder);
  }
}

void candidate_offsets(double mu, double sigma, const BinCoefficients& coeffs, double d_floor,
                       std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double ladder = d_floor * (1.0 + static_cast<double>(k) * kLadderStep);
    const double offset = coeffs.b[k] * sigma;
    out[k] = mu + offset >= ladder ? offset : ladder - mu;
  }
}

DepthCandidateGrid sample_candidates(const GaussianDepthMap& prior, const BinCoefficients& coeffs,
                                     double d_floor) {
  if (!(d_floor > 0.0)) throw DomainError("d_floor must be positive");
  DepthCandidateGrid out{VectorGrid(prior.width(), prior.height(), coeffs.n_samples)};
  for (int y = 0; y < prior.height(); ++y) {
    for (int x = 0; x < prior.width(); ++x) {
      candidate_depths(prior.mu(x, y), prior.sigma(x, y), coeffs, d_floor, out.depths.at(x, y));
    }
  }
  return out;
}

double gaussian_pdf(double d, double mu, double sigma) {
  const double z = (d - mu) / sigma;
  return kInvSqrt2Pi / sigma * std::exp(-0.5 * z * z);
}

double consistency_threshold(double sigma, double kappa) {
  return kInvSqrt2Pi / sigma * std::exp(-0.5 * kappa * kappa);
}

bool within_consistency_band(double d, double mu, double sigma, double kappa) {
  // log pdf - log threshold = 0.5 (kappa^2 - z^2); the shared normalizer cancels.
  const double z = (d - mu) / sigma;
  return -0.5 * z * z > -0.5 * kappa * kappa;
}

double nll(double d_gt, double mu, double sigma) {
  const double r = d_gt - mu;
  return 0.5 * std::log(sigma * sigma) + r * r / (2.0 * sigma * sigma);
}

}  // namespace depthfuse
