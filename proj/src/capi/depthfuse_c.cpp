#include "depthfuse/depthfuse.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "fusion.hpp"
#include "geometry.hpp"
#include "image_io.hpp"
#include "metrics.hpp"
#include "probability.hpp"

namespace df = depthfuse;

struct df_depth_map {
  df::GaussianDepthMap map;
};

struct df_experiment {
  df::ExperimentConfig config;
  nlohmann::json overrides = nlohmann::json::object();
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_field;

df_status fail(df_status status, const std::string& message, const std::string& field = {}) {
  last_error = message;
  last_error_field = field;
  return status;
}

// Maps exceptions escaping `body` onto status codes.
template <typename Body>
df_status guarded(Body&& body) {
  try {
    last_error.clear();
    last_error_field.clear();
    body();
    return DF_OK;
  } catch (const df::ConfigError& e) {
    return fail(DF_ERROR_CONFIG, e.what(), e.field());
  } catch (const df::IoError& e) {
    return fail(DF_ERROR_IO, e.what());
  } catch (const df::DomainError& e) {
    return fail(DF_ERROR_DOMAIN, e.what());
  } catch (const df::DataError& e) {
    return fail(DF_ERROR_DATA, e.what());
  } catch (const std::length_error& e) {
    return fail(DF_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DF_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DF_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(DF_ERROR_INTERNAL, "unknown error");
  }
}

df::CameraIntrinsics to_core(const df_intrinsics& k) {
  df::CameraIntrinsics out{k.fx, k.fy, k.cx, k.cy, k.width, k.height};
  out.validate();
  return out;
}

df::CameraPose to_core(const df_pose& p) { return df::CameraPose::from_array(p.values); }

df_projection to_c(const df::PixelProjection& p) {
  return {p.u, p.v, p.depth, p.in_frustum ? 1 : 0};
}

df_metrics to_c(const df::MetricsReport& r) {
  return {r.abs_rel, r.sq_rel, r.abs_diff, r.rmse, r.rmse_log, r.delta_1,
          r.delta_2, r.delta_3, r.nll,     r.pixel_count};
}

df_status invalid(const char* what) { return fail(DF_ERROR_INVALID_ARGUMENT, what); }

}  // namespace

extern "C" {

const char* df_version(void) { return df::kVersion; }
const char* df_last_error(void) { return last_error.c_str(); }
const char* df_last_error_field(void) { return last_error_field.c_str(); }

df_status df_erf(double x, double* out) {
  if (out == nullptr) return invalid("out is null");
  return guarded([&] { *out = df::erf(x); });
}

df_status df_probit(double p, double* out) {
  if (out == nullptr) return invalid("out is null");
  return guarded([&] { *out = df::probit(p); });
}

df_status df_gaussian_pdf(double d, double mu, double sigma, double* out) {
  if (out == nullptr) return invalid("out is null");
  return guarded([&] {
    if (!(sigma > 0.0)) throw df::DomainError("sigma must be positive");
    *out = df::gaussian_pdf(d, mu, sigma);
  });
}

df_status df_consistency_threshold(double sigma, double kappa, double* out) {
  if (out == nullptr) return invalid("out is null");
  return guarded([&] {
    if (!(sigma > 0.0) || !(kappa > 0.0)) throw df::DomainError("sigma and kappa must be positive");
    *out = df::consistency_threshold(sigma, kappa);
  });
}

df_status df_nll(double d_gt, double mu, double sigma, double* out) {
  if (out == nullptr) return invalid("out is null");
  return guarded([&] {
    if (!(sigma > 0.0)) throw df::DomainError("sigma must be positive");
    *out = df::nll(d_gt, mu, sigma);
  });
}

df_status df_bin_coefficients(int n_samples, double beta, double* out_b, double* out_p_star) {
  if (out_b == nullptr) return invalid("out_b is null");
  return guarded([&] {
    const df::BinCoefficients& c = df::cached_bin_coefficients(n_samples, beta);
    std::memcpy(out_b, c.b.data(), c.b.size() * sizeof(double));
    if (out_p_star != nullptr) *out_p_star = c.p_star;
  });
}

df_status df_back_project(double u, double v, double d, const df_intrinsics* intrinsics,
                          double out_point[3]) {
  if (intrinsics == nullptr || out_point == nullptr) return invalid("null argument");
  return guarded([&] {
    const Eigen::Vector3d p = df::back_project(u, v, d, to_core(*intrinsics));
    for (int i = 0; i < 3; ++i) out_point[i] = p(i);
  });
}

df_status df_project_to_view(const double point_world[3], const df_pose* pose,
                             const df_intrinsics* intrinsics, df_projection* out) {
  if (point_world == nullptr || pose == nullptr || intrinsics == nullptr || out == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] {
    const Eigen::Vector3d x(point_world[0], point_world[1], point_world[2]);
    *out = to_c(df::project_to_view(x, to_core(*pose), to_core(*intrinsics)));
  });
}

df_status df_roundtrip_candidate(double u, double v, double d, const df_pose* ref_pose,
                                 const df_intrinsics* ref_intrinsics, const df_pose* nbr_pose,
                                 const df_intrinsics* nbr_intrinsics, df_projection* out) {
  if (ref_pose == nullptr || ref_intrinsics == nullptr || nbr_pose == nullptr ||
      nbr_intrinsics == nullptr || out == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] {
    *out = to_c(df::roundtrip_candidate(u, v, d, to_core(*ref_pose), to_core(*ref_intrinsics),
                                        to_core(*nbr_pose), to_core(*nbr_intrinsics)));
  });
}

df_status df_depth_map_create(int width, int height, df_depth_map** out) {
  if (out == nullptr) return invalid("out is null");
  if (width < 1 || height < 1) return invalid("dimensions must be >= 1");
  return guarded([&] { *out = new df_depth_map{df::GaussianDepthMap(width, height)}; });
}

void df_depth_map_destroy(df_depth_map* map) { delete map; }

df_status df_depth_map_size(const df_depth_map* map, int* width, int* height) {
  if (map == nullptr) return invalid("map is null");
  if (width != nullptr) *width = map->map.width();
  if (height != nullptr) *height = map->map.height();
  return DF_OK;
}

df_status df_depth_map_set(df_depth_map* map, const double* mu, const double* sigma,
                           size_t count) {
  if (map == nullptr) return invalid("map is null");
  if (count != map->map.mu.size()) return invalid("count does not match width*height");
  if (mu != nullptr) std::memcpy(map->map.mu.values().data(), mu, count * sizeof(double));
  if (sigma != nullptr) std::memcpy(map->map.sigma.values().data(), sigma, count * sizeof(double));
  return DF_OK;
}

df_status df_depth_map_get(const df_depth_map* map, double* mu, double* sigma, size_t count) {
  if (map == nullptr) return invalid("map is null");
  if (count != map->map.mu.size()) return invalid("count does not match width*height");
  if (mu != nullptr) std::memcpy(mu, map->map.mu.values().data(), count * sizeof(double));
  if (sigma != nullptr) std::memcpy(sigma, map->map.sigma.values().data(), count * sizeof(double));
  return DF_OK;
}

df_status df_depth_map_load(const char* stem, df_depth_map** out) {
  if (stem == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new df_depth_map{df::read_depth_map(stem)}; });
}

df_status df_depth_map_save(const df_depth_map* map, const char* stem) {
  if (map == nullptr || stem == nullptr) return invalid("null argument");
  return guarded([&] { df::write_depth_map(stem, map->map); });
}

df_status df_depth_map_upsample(const df_depth_map* map, int factor, double sigma_min,
                                df_depth_map** out) {
  if (map == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    *out = new df_depth_map{df::upsample_bilinear(map->map, factor, sigma_min)};
  });
}

df_status df_compute_metrics(const df_depth_map* pred, const double* gt,
                             const unsigned char* mask, size_t count, double depth_cap,
                             df_metrics* out) {
  if (pred == nullptr || gt == nullptr || out == nullptr) return invalid("null argument");
  if (count != pred->map.mu.size()) return invalid("count does not match width*height");
  return guarded([&] {
    const int w = pred->map.width();
    const int h = pred->map.height();
    df::DepthImage truth(w, h);
    std::memcpy(truth.values().data(), gt, count * sizeof(double));
    df::Mask m;
    df::MetricsOptions options;
    if (mask != nullptr) {
      m = df::Mask(w, h);
      std::memcpy(m.values().data(), mask, count);
      options.mask = &m;
    }
    if (depth_cap > 0.0) options.depth_cap = depth_cap;
    *out = to_c(df::compute_metrics(pred->map, truth, options));
  });
}

df_status df_experiment_from_json(const char* json_text, df_experiment** out) {
  if (json_text == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    *out = new df_experiment{df::ExperimentConfig::from_json_text(json_text)};
  });
}

df_status df_experiment_from_file(const char* path, df_experiment** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    *out = new df_experiment{df::ExperimentConfig::from_json_text(df::read_text_file(path))};
  });
}

void df_experiment_destroy(df_experiment* experiment) { delete experiment; }

df_status df_experiment_set_seed(df_experiment* e, uint64_t seed) {
  if (e == nullptr) return invalid("experiment is null");
  e->config.seed = seed;
  e->overrides["seed"] = seed;
  return DF_OK;
}

df_status df_experiment_set_arm(df_experiment* e, const char* arm) {
  if (e == nullptr || arm == nullptr) return invalid("null argument");
  return guarded([&] {
    e->config.arm = df::parse_arm(arm);
    e->overrides["arm"] = arm;
  });
}

df_status df_experiment_set_output_dir(df_experiment* e, const char* dir) {
  if (e == nullptr || dir == nullptr) return invalid("null argument");
  return guarded([&] {
    if (*dir == '\0') throw df::ConfigError("output_dir", "must not be empty");
    e->config.output_dir = dir;
    e->overrides["output_dir"] = dir;
  });
}

df_status df_experiment_set_axis(df_experiment* e, const char* axis, double value) {
  if (e == nullptr || axis == nullptr) return invalid("null argument");
  return guarded([&] {
    df::ExperimentConfig updated = e->config;
    updated.set_axis(axis, value);
    e->config = std::move(updated);
    e->overrides[axis] = value;
  });
}

df_status df_experiment_config_json(const df_experiment* e, char* buf, size_t size,
                                     size_t* needed) {
  if (e == nullptr) return invalid("experiment is null");
  return guarded([&] {
    const std::string text = e->config.to_json().dump(2);
    if (needed != nullptr) *needed = text.size() + 1;
    if (buf == nullptr) return;
    if (size < text.size() + 1) throw std::length_error("buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

df_status df_experiment_run(df_experiment* e, int threads, int write_png, df_metrics* out_all) {
  if (e == nullptr) return invalid("experiment is null");
  if (threads < 1) return invalid("threads must be >= 1");
  return guarded([&] {
    df::RunOptions options{threads, write_png != 0, e->overrides};
    const df::ExperimentResult result = df::run_experiment(e->config, options);
    if (out_all != nullptr) *out_all = to_c(result.final_report("all"));
  });
}

df_status df_experiment_sweep(df_experiment* e, const char* axis, const double* values,
                              size_t count, int threads, int write_png) {
  if (e == nullptr || axis == nullptr || (values == nullptr && count > 0)) {
    return invalid("null argument");
  }
  if (threads < 1) return invalid("threads must be >= 1");
  return guarded([&] {
    df::RunOptions options{threads, write_png != 0, e->overrides};
    df::run_sweep(e->config, axis, std::vector<double>(values, values + count), options);
  });
}

}  // extern "C"
