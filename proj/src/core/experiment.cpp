#include "experiment.hpp"

#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "image_io.hpp"

namespace depthfuse {

namespace fs = std::filesystem;

namespace {

std::vector<MetricsReport> evaluate(const GaussianDepthMap& map, const SyntheticWindow& data,
                                    const std::optional<double>& cap) {
  std::vector<MetricsReport> reports;
  MetricsOptions all;
  all.depth_cap = cap;
  all.region_label = "all";
  reports.push_back(compute_metrics(map, data.ground_truth, all));
  if (!data.region.empty()) {
    Mask clean(data.region.width(), data.region.height());
    for (int y = 0; y < clean.height(); ++y) {
      for (int x = 0; x < clean.width(); ++x) clean(x, y) = data.region(x, y) ? 0 : 255;
    }
    MetricsOptions corrupted = all;
    corrupted.mask = &data.region;
    corrupted.region_label = "corrupted";
    reports.push_back(compute_metrics(map, data.ground_truth, corrupted));
    MetricsOptions rest = all;
    rest.mask = &clean;
    rest.region_label = "clean";
    reports.push_back(compute_metrics(map, data.ground_truth, rest));
  }
  return reports;
}

const MetricsReport& find_report(const std::vector<MetricsReport>& reports,
                                 const std::string& label) {
  for (const MetricsReport& r : reports) {
    if (r.region_label == label) return r;
  }
  throw DataError("no metrics for region '" + label + "'");
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const MetricsReport& ExperimentResult::final_report(const std::string& label) const {
  return find_report(final_reports, label);
}

const MetricsReport& ExperimentResult::prior_report(const std::string& label) const {
  return find_report(prior_reports, label);
}

ExperimentResult execute(const ExperimentConfig& config, int threads) {
  config.validate();
  PriorModel prior = config.prior;
  prior.seed = config.seed;
  const FusionConfig fusion = config.effective_fusion();
  const std::vector<CameraPose> poses = config.trajectory.build();

  ExperimentResult result;
  result.data = make_window(config.build_scene(), config.camera.matching(), poses,
                            config.trajectory.reference, config.corruption, prior,
                            fusion.sigma_min, threads);

  const BinCoefficients& coeffs = cached_bin_coefficients(fusion.n_samples, fusion.beta);
  RefineOptions ro;
  ro.threads = threads;
  ro.ground_truth = &result.data.ground_truth;
  auto [final_map, trace] = refine(result.data.window, fusion, coeffs, ro);
  result.final_map = std::move(final_map);
  result.trace = std::move(trace);
  result.prior_reports =
      evaluate(result.data.window.reference_frame().prior, result.data, config.depth_cap);
  result.final_reports = evaluate(result.final_map, result.data, config.depth_cap);
  return result;
}

std::string metrics_csv(const std::vector<MetricsReport>& reports) {
  std::string out = metrics_csv_header() + "\n";
  for (const MetricsReport& r : reports) out += metrics_csv_row(r) + "\n";
  return out;
}

std::string trace_csv(const IterationTrace& trace) {
  std::string out = "iteration," + metrics_csv_header() +
                    ",mean_score,unobserved_fraction,fallback_fraction\n";
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const IterationSnapshot& s = trace.iterations[i];
    const MetricsReport r = s.metrics.value_or(MetricsReport{});
    out += std::to_string(i + 1) + "," + metrics_csv_row(r) + "," +
           format_value(s.volume.mean_score) + "," + format_value(s.volume.unobserved_fraction) +
           "," + format_value(s.volume.fallback_fraction) + "\n";
  }
  return out;
}

nlohmann::json make_manifest(const ExperimentConfig& config, const nlohmann::json& overrides) {
  return {{"tool", "depthfuse"},
          {"version", kVersion},
          {"seed", config.seed},
          {"arm", to_string(config.arm)},
          {"overrides", overrides},
          {"config", config.to_json()}};
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentResult result = execute(config, options.threads);
  const fs::path out = config.output_dir;
  try {
    fs::create_directories(out);
  } catch (const fs::filesystem_error& e) {
    throw IoError(std::string("cannot create output directory: ") + e.what());
  }

  const GaussianDepthMap& prior = result.data.window.reference_frame().prior;
  const DepthImage& gt = result.data.ground_truth;
  DepthImage error(gt.width(), gt.height());
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) error(x, y) = std::abs(result.final_map.mu(x, y) - gt(x, y));
  }

  write_depth_map(out / "final", result.final_map);
  write_depth_map(out / "prior", prior);
  write_pfm(out / "gt.pfm", gt);
  write_pfm(out / "error.pfm", error);
  if (!result.data.region.empty()) write_pgm(out / "region_mask.pgm", result.data.region);
  write_text_file(out / "metrics.csv", metrics_csv(result.final_reports));
  write_text_file(out / "prior_metrics.csv", metrics_csv(result.prior_reports));
  for (std::size_t i = 0; i < result.trace.iterations.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "iter_%02zu", i + 1);
    write_depth_map(out / "trace" / stem, result.trace.iterations[i].map);
  }
  write_text_file(out / "trace" / "metrics.csv", trace_csv(result.trace));
  write_text_file(out / "manifest.json", make_manifest(config, options.overrides).dump(2) + "\n");

  if (options.png) {
    double lo = gt.values()[0], hi = lo;
    for (double v : gt.values()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    write_colormap_png(out / "final_depth.png", result.final_map.mu, lo, hi);
    write_colormap_png(out / "gt_depth.png", gt, lo, hi);
    double s_hi = 0.0, e_hi = 0.0;
    for (double v : result.final_map.sigma.values()) s_hi = std::max(s_hi, v);
    for (double v : error.values()) e_hi = std::max(e_hi, v);
    write_colormap_png(out / "final_sigma.png", result.final_map.sigma, 0.0, s_hi);
    write_colormap_png(out / "error.png", error, 0.0, e_hi);
  }

  if (options.print_reports) {
    for (const MetricsReport& r : result.final_reports) std::fputs(format_report(r).c_str(), stdout);
  }
  return result;
}

std::string run_sweep(const ExperimentConfig& base, const std::string& axis,
                      const std::vector<double>& values, const RunOptions& options) {
  if (values.empty()) throw ConfigError("values", "at least one value is required");
  std::string csv = "axis,value," + metrics_csv_header() + "\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig config = base;
    config.set_axis(axis, values[i]);
    config.output_dir = (fs::path(base.output_dir) / (axis + "_" + std::to_string(i))).string();
    RunOptions run = options;
    run.overrides[axis] = values[i];
    const ExperimentResult result = run_experiment(config, run);
    csv += axis + "," + format_value(values[i]) + "," +
           metrics_csv_row(result.final_report("all")) + "\n";
  }
  write_text_file(fs::path(base.output_dir) / "sweep.csv", csv);
  return csv;
}

}  // namespace depthfuse
