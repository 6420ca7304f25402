#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "fusion.hpp"
#include "metrics.hpp"
#include "synthetic.hpp"

namespace depthfuse {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentResult {
  SyntheticWindow data;
  GaussianDepthMap final_map;
  IterationTrace trace;
  std::vector<MetricsReport> prior_reports;  // "all", then "corrupted"/"clean" when masked
  std::vector<MetricsReport> final_reports;

  const MetricsReport& final_report(const std::string& label) const;
  const MetricsReport& prior_report(const std::string& label) const;
};

/// Builds the synthetic window and runs the selected ablation arm, in memory.
/// Results do not depend on `threads`.
ExperimentResult execute(const ExperimentConfig& config, int threads = 1);

/// CSV with a header row and one row per report.
std::string metrics_csv(const std::vector<MetricsReport>& reports);

/// Per-iteration metrics, prefixed by an `iteration` column.
std::string trace_csv(const IterationTrace& trace);

struct RunOptions {
  int threads = 1;
  bool png = false;
  nlohmann::json overrides = nlohmann::json::object();  // echoed into the manifest
  bool print_reports = true;  // final region reports to stdout
};

/// execute() plus artifacts in config.output_dir:
///   final_{mu,sigma}.pfm, prior_{mu,sigma}.pfm, gt.pfm, error.pfm,
///   metrics.csv, prior_metrics.csv, trace/iter_NN_{mu,sigma}.pfm,
///   trace/metrics.csv, region_mask.pgm (corrupted runs), manifest.json,
///   and with `png` depth/sigma/error PNGs.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// One run per value of `axis` (into <output_dir>/<axis>_<index>), aggregated
/// into <output_dir>/sweep.csv. Returns the aggregated CSV text.
std::string run_sweep(const ExperimentConfig& base, const std::string& axis,
                      const std::vector<double>& values, const RunOptions& options = {});

nlohmann::json make_manifest(const ExperimentConfig& config, const nlohmann::json& overrides);

}  // namespace depthfuse
