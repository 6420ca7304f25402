#pragma once

#include <optional>
#include <string>

#include "grid.hpp"
#include "probability.hpp"

namespace depthfuse {

/// Depth accuracy summary. Field order is the CSV column order.
struct MetricsReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double abs_diff = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta_1 = 0.0;  // percent
  double delta_2 = 0.0;
  double delta_3 = 0.0;
  double nll = 0.0;
  long long pixel_count = 0;
  std::string region_label = "all";

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

struct MetricsOptions {
  const Mask* mask = nullptr;           // nonzero = evaluated
  std::optional<double> depth_cap;      // gt above the cap is excluded
  std::string region_label = "all";
};

/// Evaluates pred.mu (and pred.sigma for NLL) against gt over the selected
/// pixels. Throws DataError on shape mismatch or non-positive gt/pred inside
/// the selection. Reductions run serially in row-major order.
MetricsReport compute_metrics(const GaussianDepthMap& pred, const DepthImage& gt,
                              const MetricsOptions& options = {});

struct NllResult {
  double mean = 0.0;
  DepthImage per_pixel;  // NaN outside the selection
};

NllResult nll_map(const GaussianDepthMap& pred, const DepthImage& gt, const Mask* mask = nullptr);

/// Header line matching the CSV row layout, without trailing newline.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);

/// Multi-line human-readable rendering.
std::string format_report(const MetricsReport& report);

}  // namespace depthfuse
