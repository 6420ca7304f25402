#include "metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "errors.hpp"

namespace depthfuse {

namespace {

bool selected(const MetricsOptions& options, const DepthImage& gt, int x, int y) {
  if (options.mask != nullptr && (*options.mask)(x, y) == 0) return false;
  if (options.depth_cap && gt(x, y) > *options.depth_cap) return false;
  return true;
}

void check_shapes(const GaussianDepthMap& pred, const DepthImage& gt, const Mask* mask) {
  if (!pred.mu.same_shape(gt) || !pred.sigma.same_shape(gt)) {
    throw DataError("prediction and ground truth differ in shape");
  }
  if (mask != nullptr && (mask->width() != gt.width() || mask->height() != gt.height())) {
    throw DataError("mask and ground truth differ in shape");
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MetricsReport compute_metrics(const GaussianDepthMap& pred, const DepthImage& gt,
                              const MetricsOptions& options) {
  check_shapes(pred, gt, options.mask);

  double sum_abs_rel = 0.0, sum_sq_rel = 0.0, sum_abs = 0.0, sum_sq = 0.0, sum_sq_log = 0.0;
  double sum_nll = 0.0;
  long long n = 0, d1 = 0, d2 = 0, d3 = 0;
  constexpr double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;

  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!selected(options, gt, x, y)) continue;
      const double g = gt(x, y);
      const double p = pred.mu(x, y);
      if (!(g > 0.0)) throw DataError("non-positive ground-truth depth inside evaluation region");
      if (!(p > 0.0)) throw DataError("non-positive predicted depth inside evaluation region");
      const double diff = p - g;
      sum_abs_rel += std::abs(diff) / g;
      sum_sq_rel += diff * diff / g;
      sum_abs += std::abs(diff);
      sum_sq += diff * diff;
      const double log_diff = std::log(p / g);
      sum_sq_log += log_diff * log_diff;
      const double ratio = std::max(p / g, g / p);
      d1 += ratio < t1;
      d2 += ratio < t2;
      d3 += ratio < t3;
      sum_nll += nll(g, p, pred.sigma(x, y));
      ++n;
    }
  }

  MetricsReport r;
  r.region_label = options.region_label;
  r.pixel_count = n;
  if (n == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.abs_rel = r.sq_rel = r.abs_diff = r.rmse = r.rmse_log = nan;
    r.delta_1 = r.delta_2 = r.delta_3 = r.nll = nan;
    return r;
  }
  const double inv = 1.0 / static_cast<double>(n);
  r.abs_rel = sum_abs_rel * inv;
  r.sq_rel = sum_sq_rel * inv;
  r.abs_diff = sum_abs * inv;
  r.rmse = std::sqrt(sum_sq * inv);
  r.rmse_log = std::sqrt(sum_sq_log * inv);
  r.delta_1 = 100.0 * static_cast<double>(d1) * inv;
  r.delta_2 = 100.0 * static_cast<double>(d2) * inv;
  r.delta_3 = 100.0 * static_cast<double>(d3) * inv;
  r.nll = sum_nll * inv;
  return r;
}

NllResult nll_map(const GaussianDepthMap& pred, const DepthImage& gt, const Mask* mask) {
  check_shapes(pred, gt, mask);
  NllResult out{0.0, DepthImage(gt.width(), gt.height(), std::numeric_limits<double>::quiet_NaN())};
  double sum = 0.0;
  long long n = 0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (mask != nullptr && (*mask)(x, y) == 0) continue;
      if (!(gt(x, y) > 0.0)) throw DataError("non-positive ground-truth depth inside evaluation region");
      const double v = nll(gt(x, y), pred.mu(x, y), pred.sigma(x, y));
      out.per_pixel(x, y) = v;
      sum += v;
      ++n;
    }
  }
  out.mean = n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::string metrics_csv_header() {
  return "abs_rel,sq_rel,abs_diff,rmse,rmse_log,delta_1,delta_2,delta_3,nll,pixel_count,"
         "region_label";
}

std::string metrics_csv_row(const MetricsReport& r) {
  std::string row;
  for (double v : {r.abs_rel, r.sq_rel, r.abs_diff, r.rmse, r.rmse_log, r.delta_1, r.delta_2,
                   r.delta_3, r.nll}) {
    row += format_double(v);
    row += ',';
  }
  row += std::to_string(r.pixel_count);
  row += ',';
  row += r.region_label;
  return row;
}

std::string format_report(const MetricsReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "[%s] pixels=%lld\n"
                "  abs_rel  %.4f   sq_rel   %.4f   abs_diff %.4f\n"
                "  rmse     %.4f   rmse_log %.4f   nll      %.4f\n"
                "  d<1.25   %.2f%%  d<1.25^2 %.2f%%  d<1.25^3 %.2f%%\n",
                r.region_label.c_str(), r.pixel_count, r.abs_rel, r.sq_rel, r.abs_diff, r.rmse,
                r.rmse_log, r.nll, r.delta_1, r.delta_2, r.delta_3);
  return buf;
}

}  // namespace depthfuse
