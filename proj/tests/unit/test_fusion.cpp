#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <doctest.h>

#include "errors.hpp"
#include "fusion.hpp"
#include "support.hpp"

using namespace depthfuse;
using namespace depthfuse::testing;

namespace {

const std::vector<std::uint16_t> kObserved5(5, 1);

FusionConfig test_config() {
  FusionConfig c;
  c.temperature = 0.1;
  return c;
}

// Scores whose softmax at temperature tau equals `weights`.
std::vector<double> scores_for(const std::vector<double>& weights, double tau) {
  std::vector<double> s;
  for (double w : weights) s.push_back(tau * std::log(w));
  return s;
}

double rmse(const GaussianDepthMap& m, const DepthImage& gt) {
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double e = m.mu.values()[i] - gt.values()[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(gt.size()));
}

}  // namespace

TEST_CASE("softmax weights") {
  const double equal[] = {0.3, 0.3, 0.3, 0.3};
  for (double w : softmax_weights(equal, 0.1)) CHECK(w == doctest::Approx(0.25).epsilon(1e-15));

  const double two[] = {std::log(3.0), 0.0};
  const auto p = softmax_weights(two, 1.0);
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-15));

  const double huge[] = {1000.0, 0.0, 0.0};
  const auto q = softmax_weights(huge, 1.0);
  CHECK(q[0] == 1.0);
  CHECK(q[1] == 0.0);
  CHECK(std::isfinite(q[2]));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> s(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(9);
    for (double& x : v) x = s(rng);
    const auto w = softmax_weights(v, 0.05);
    CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-12);
  }
}

TEST_CASE("expected depth") {
  const double d[] = {1.0, 3.0};
  const double uniform[] = {0.5, 0.5};
  const double skewed[] = {0.75, 0.25};
  CHECK(expected_depth(uniform, d) == 2.0);
  CHECK(expected_depth(skewed, d) == 1.5);
  const double d3[] = {1.0, 2.0, 4.0};
  const double hot[] = {0.0, 0.0, 1.0};
  CHECK(expected_depth(hot, d3) == 4.0);
}

TEST_CASE("unobserved candidates are penalized below every observed score") {
  double scores[] = {0.4, 0.0, 0.9, 0.0};
  const std::uint16_t counts[] = {2, 0, 1, 0};
  CHECK(penalize_unobserved(scores, counts, 0.1));
  CHECK(scores[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(scores[3] == scores[1]);
  CHECK(scores[0] == 0.4);

  double none[] = {0.0, 0.0};
  const std::uint16_t zero[] = {0, 0};
  CHECK_FALSE(penalize_unobserved(none, zero, 0.1));
}

TEST_CASE("one-hot matching moves the mean onto that candidate") {
  const FusionConfig cfg = test_config();
  const BinCoefficients& c = cached_bin_coefficients(5, 3.0);
  for (int k = 0; k < 5; ++k) {
    std::vector<double> s(5, 0.0);
    s[k] = 1000.0;
    const auto [mu, sigma] = analytic_update(s, kObserved5, 2.0, 0.3, c, cfg);
    CHECK(mu == 2.0 + c.b[k] * 0.3);
    CHECK(sigma == cfg.sigma_min);
  }
}

TEST_CASE("flat matching keeps the mean and widens the search") {
  const FusionConfig cfg = test_config();
  const BinCoefficients& c = cached_bin_coefficients(5, 3.0);
  const std::vector<double> s(5, 0.42);
  const auto [mu, sigma] = analytic_update(s, kObserved5, 2.0, 0.3, c, cfg);
  CHECK(std::abs(mu - 2.0) < 1e-15);
  CHECK(std::abs(sigma / 0.3 - 1.26202106271026) < 1e-9);

  // The ratio depends on the coefficients alone.
  for (int n : {2, 3, 7, 16}) {
    const BinCoefficients& cn = cached_bin_coefficients(n, 3.0);
    double sq = 0.0;
    for (double b : cn.b) sq += b * b;
    const std::vector<double> flat(static_cast<std::size_t>(n), 0.0);
    const std::vector<std::uint16_t> seen(static_cast<std::size_t>(n), 3);
    const auto [m, s2] = analytic_update(flat, seen, 5.0, 0.5, cn, cfg);
    CHECK(std::abs(m - 5.0) < 1e-14);
    CHECK(std::abs(s2 / 0.5 - std::sqrt(sq / n)) < 1e-9);
  }
}

TEST_CASE("peaked matching narrows the search") {
  const FusionConfig cfg = test_config();
  const BinCoefficients& c = cached_bin_coefficients(5, 3.0);
  const auto s = scores_for({0.1, 0.1, 0.6, 0.1, 0.1}, cfg.temperature);
  const auto [mu, sigma] = analytic_update(s, kObserved5, 2.0, 0.3, c, cfg);
  CHECK(std::abs(mu - 2.0) < 1e-14);
  CHECK(std::abs(sigma / 0.3 - 0.89238365144268) < 1e-9);
}

TEST_CASE("sharper symmetric score profiles never widen the search") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> step(0.0, 1.0);
  const BinCoefficients& c = cached_bin_coefficients(9, 3.0);
  const FusionConfig cfg = test_config();
  const std::vector<std::uint16_t> seen(9, 4);
  for (int trial = 0; trial < 500; ++trial) {
    // Penalty increasing in |b|, mirrored so the weights stay symmetric.
    std::vector<double> g(5);
    g[0] = 0.0;
    for (int i = 1; i < 5; ++i) g[i] = g[i - 1] + step(rng);
    double previous = INFINITY;
    for (double a = 0.0; a <= 2.0; a += 0.05) {
      std::vector<double> s(9);
      for (int k = 0; k < 9; ++k) s[k] = -a * g[std::abs(k - 4)];
      const double sigma = analytic_update(s, seen, 3.0, 0.4, c, cfg).second;
      CHECK(sigma <= previous * (1 + 1e-12));
      previous = sigma;
    }
  }
}

TEST_CASE("updated mean stays inside the candidate span") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> s(-1, 1), mu(0.5, 8), sigma(0.01, 2);
  const BinCoefficients& c = cached_bin_coefficients(5, 3.0);
  const FusionConfig cfg = test_config();
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> v(5);
    for (double& x : v) x = s(rng);
    const double m = mu(rng), sd = sigma(rng);
    const auto [m2, s2] = analytic_update(v, kObserved5, m, sd, c, cfg);
    std::vector<double> d(5);
    candidate_depths(m, sd, c, cfg.d_floor, d);
    CHECK(m2 >= d.front() - 1e-12);
    CHECK(m2 <= d.back() + 1e-12);
    CHECK(s2 >= cfg.sigma_min);
  }
}

TEST_CASE("pixels without observations keep their distribution") {
  const FusionConfig cfg = test_config();
  const std::vector<double> s(5, 0.0);
  const std::vector<std::uint16_t> none(5, 0);
  const auto [mu, sigma] = analytic_update(s, none, 2.5, 0.375, cached_bin_coefficients(5, 3.0), cfg);
  CHECK(mu == 2.5);
  CHECK(sigma == 0.375);
}

TEST_CASE("unobservable window returns the prior bit for bit") {
  PriorModel noisy;
  noisy.seed = 2;
  SyntheticWindow data = plane_window(3.0, noisy);
  for (std::size_t i = 0; i < data.window.frames.size(); ++i) {
    if (static_cast<int>(i) != data.window.reference) {
      data.window.frames[i].pose = CameraPose(Eigen::Matrix3d::Identity(), {0, 0, -50});
    }
  }
  const FusionConfig cfg = test_config();
  const auto [map, trace] = refine(data.window, cfg, cached_bin_coefficients(5, 3.0));
  CHECK(map == data.window.reference_frame().prior);
  for (const auto& snap : trace.iterations) CHECK(snap.volume.fallback_fraction == 1.0);
}

TEST_CASE("partially visible window only updates observed pixels") {
  PriorModel noisy;
  noisy.seed = 3;
  const SyntheticScene scene = plane_scene(3.0);
  const CameraIntrinsics k = small_camera();
  // A single neighbor far to the side shares only part of the field of view.
  const std::vector<CameraPose> poses = {CameraPose::identity(),
                                         CameraPose(Eigen::Matrix3d::Identity(), {-2.0, 0, 0})};
  const SyntheticWindow data = make_window(scene, k, poses, 0, std::nullopt, noisy);
  const FusionConfig cfg = test_config();
  const BinCoefficients& c = cached_bin_coefficients(5, 3.0);

  GaussianDepthMap current = data.window.reference_frame().prior;
  std::vector<char> ever_observed(current.mu.size(), 0);
  for (int it = 0; it < cfg.n_iter; ++it) {
    const CostVolume v = build_cost_volume(data.window, sample_candidates(current, c, cfg.d_floor), {});
    for (int y = 0; y < 30; ++y) {
      for (int x = 0; x < 40; ++x) {
        const auto n = v.view_counts.at(x, y);
        if (std::any_of(n.begin(), n.end(), [](auto q) { return q > 0; })) {
          ever_observed[static_cast<std::size_t>(y * 40 + x)] = 1;
        }
      }
    }
    current = refine_from(data.window, current, 1, cfg, c).first;
  }
  const GaussianDepthMap& prior = data.window.reference_frame().prior;
  int blind = 0, seen = 0;
  for (std::size_t i = 0; i < ever_observed.size(); ++i) {
    if (ever_observed[i]) {
      ++seen;
      continue;
    }
    ++blind;
    CHECK(current.mu.values()[i] == prior.mu.values()[i]);
    CHECK(current.sigma.values()[i] == prior.sigma.values()[i]);
  }
  CHECK(blind > 0);
  CHECK(seen > 0);
}

TEST_CASE("single iteration equals one manual pass") {
  PriorModel noisy;
  noisy.seed = 6;
  const SyntheticWindow data = plane_window(3.0, noisy);
  FusionConfig cfg = test_config();
  cfg.n_iter = 1;
  const BinCoefficients& c = cached_bin_coefficients(5, 3.0);
  const auto [map, trace] = refine(data.window, cfg, c);
  REQUIRE(trace.iterations.size() == 1);
  CHECK(trace.iterations[0].map == map);

  const GaussianDepthMap& prior = data.window.reference_frame().prior;
  const DepthCandidateGrid cand = sample_candidates(prior, c, cfg.d_floor);
  const CostVolume v = build_cost_volume(data.window, cand, {cfg.kappa, true, 1});
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 40; ++x) {
      const auto [mu, sigma] = analytic_update(v.scores.at(x, y), v.view_counts.at(x, y),
                                               prior.mu(x, y), prior.sigma(x, y), c, cfg);
      CHECK(map.mu(x, y) == mu);
      CHECK(map.sigma(x, y) == sigma);
    }
  }
}

TEST_CASE("refinement can be continued without changing the result") {
  PriorModel noisy;
  noisy.seed = 9;
  const SyntheticWindow data = plane_window(3.0, noisy);
  FusionConfig cfg = test_config();
  const BinCoefficients& c = cached_bin_coefficients(5, 3.0);
  RefineOptions opts;
  opts.ground_truth = &data.ground_truth;
  const GaussianDepthMap& prior = data.window.reference_frame().prior;

  const auto whole = refine_from(data.window, prior, 4, cfg, c, opts);
  const auto first = refine_from(data.window, prior, 1, cfg, c, opts);
  const auto rest = refine_from(data.window, first.first, 3, cfg, c, opts);
  CHECK(rest.first == whole.first);
  REQUIRE(whole.second.iterations.size() == 4);
  CHECK(first.second.iterations[0].map == whole.second.iterations[0].map);
  for (int i = 0; i < 3; ++i) {
    CHECK(rest.second.iterations[i].map == whole.second.iterations[i + 1].map);
    CHECK(rest.second.iterations[i].volume == whole.second.iterations[i + 1].volume);
  }
  cfg.n_iter = 4;
  CHECK(refine(data.window, cfg, c).first == whole.first);
}

TEST_CASE("exact priors survive refinement") {
  const SyntheticWindow data = plane_window(3.0, exact_prior(0.05));
  const auto [map, trace] = refine(data.window, test_config(), cached_bin_coefficients(5, 3.0));
  const GaussianDepthMap& prior = data.window.reference_frame().prior;
  for (std::size_t i = 0; i < map.mu.size(); ++i) {
    CHECK(std::abs(map.mu.values()[i] - prior.mu.values()[i]) < prior.sigma.values()[i]);
  }
}

TEST_CASE("noisy priors improve monotonically") {
  PriorModel noisy;
  noisy.seed = 12;
  const SyntheticWindow data = plane_window(3.0, noisy, 80, 60);
  FusionConfig cfg = test_config();
  cfg.n_iter = 4;
  const auto [map, trace] = refine(data.window, cfg, cached_bin_coefficients(5, 3.0));
  double previous = rmse(data.window.reference_frame().prior, data.ground_truth);
  for (const auto& snap : trace.iterations) {
    const double r = rmse(snap.map, data.ground_truth);
    CHECK(r <= previous);
    previous = r;
  }
}

TEST_CASE("refinement is independent of thread count") {
  PriorModel noisy;
  noisy.seed = 13;
  const SyntheticWindow data = plane_window(3.0, noisy);
  const FusionConfig cfg = test_config();
  RefineOptions many;
  many.threads = 5;
  CHECK(refine(data.window, cfg, cached_bin_coefficients(5, 3.0)) ==
        refine(data.window, cfg, cached_bin_coefficients(5, 3.0), many));
}

TEST_CASE("uniform sampling uses the fixed ladder") {
  PriorModel noisy;
  noisy.seed = 14;
  const SyntheticWindow data = plane_window(3.0, noisy);
  FusionConfig cfg = test_config();
  cfg.sampling_mode = SamplingMode::uniform;
  cfg.weighting_enabled = false;
  cfg.n_iter = 1;
  const auto [map, trace] = refine(data.window, cfg, cached_bin_coefficients(5, 3.0));
  const CostVolume v = build_cost_volume(
      data.window, uniform_candidates(cfg.d_min, cfg.d_max, 5, 40, 30), {cfg.kappa, false, 1});
  const DepthCandidateGrid ladder = uniform_candidates(cfg.d_min, cfg.d_max, 5, 40, 30);
  for (int y = 0; y < 30; y += 7) {
    for (int x = 0; x < 40; x += 7) {
      std::vector<double> s(v.scores.at(x, y).begin(), v.scores.at(x, y).end());
      REQUIRE(penalize_unobserved(s, v.view_counts.at(x, y), cfg.temperature));
      const auto w = softmax_weights(s, cfg.temperature);
      CHECK(map.mu(x, y) == doctest::Approx(expected_depth(w, ladder.depths.at(x, y))).epsilon(1e-12));
    }
  }
}

TEST_CASE("fusion config validation") {
  FusionConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_samples = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.n_iter = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.temperature = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.sampling_mode = SamplingMode::uniform;
  c.d_min = 4;
  c.d_max = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  CHECK(c.beta == 3.0);
  CHECK(c.kappa == 5.0);
  CHECK(c.n_samples == 5);
  CHECK(c.n_iter == 3);
  CHECK(c.gamma == 0.8);
}

TEST_CASE("bilinear upsampling") {
  GaussianDepthMap m(2, 2);
  m.mu(0, 0) = 1;
  m.mu(1, 0) = 2;
  m.mu(0, 1) = 3;
  m.mu(1, 1) = 4;
  CHECK(upsample_bilinear(m, 1) == m);

  const GaussianDepthMap up = upsample_bilinear(m, 2);
  CHECK(up.width() == 4);
  CHECK(up.height() == 4);
  CHECK(up.mu(0, 0) == 1);
  CHECK(up.mu(3, 0) == 2);
  CHECK(up.mu(0, 3) == 3);
  CHECK(up.mu(3, 3) == 4);
  CHECK(up.mu(1, 0) == doctest::Approx(1 + 1.0 / 3).epsilon(1e-15));
  CHECK(up.mu(1, 1) == doctest::Approx(1 + 1.0 / 3 + 2.0 / 3).epsilon(1e-15));

  const GaussianDepthMap flat(3, 2, 2.5, 1e-5);
  const GaussianDepthMap flat_up = upsample_bilinear(flat, 3);
  for (double v : flat_up.mu.values()) CHECK(v == 2.5);
  for (double v : flat_up.sigma.values()) CHECK(v == kDefaultSigmaMin);

  CHECK_THROWS_AS(upsample_bilinear(m, 0), DomainError);
}
