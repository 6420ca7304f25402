#include "config.hpp"

#include <cmath>
#include <set>

#include "errors.hpp"

namespace depthfuse {

using nlohmann::json;

namespace {

// Strict view over one JSON object: every key must be consumed, otherwise
// finish() reports the first unknown one.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void skip(const std::string& key) { seen_.insert(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) throw ConfigError(field(key), "is required");
    return j_.at(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& target) {
    seen_.insert(key);
    if (!has(key)) return;
    try {
      target = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key), "has the wrong type");
    }
  }

  template <typename T>
  void require(const std::string& key, T& target) {
    if (!has(key)) throw ConfigError(field(key), "is required");
    read(key, target);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

PrimitiveKind parse_kind(const std::string& s, const std::string& field) {
  if (s == "plane") return PrimitiveKind::plane;
  if (s == "sphere") return PrimitiveKind::sphere;
  if (s == "box") return PrimitiveKind::box;
  throw ConfigError(field, "expected plane, sphere or box");
}

std::string kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::plane: return "plane";
    case PrimitiveKind::sphere: return "sphere";
    case PrimitiveKind::box: return "box";
  }
  return "plane";
}

CorruptionKind parse_corruption(const std::string& s, const std::string& field) {
  if (s == "texture_less") return CorruptionKind::texture_less;
  if (s == "reflective") return CorruptionKind::reflective;
  if (s == "moving_object") return CorruptionKind::moving_object;
  throw ConfigError(field, "expected texture_less, reflective or moving_object");
}

std::string corruption_name(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::texture_less: return "texture_less";
    case CorruptionKind::reflective: return "reflective";
    case CorruptionKind::moving_object: return "moving_object";
  }
  return "texture_less";
}

Placement placement_from(const std::array<double, 12>& v, const std::string& field) {
  try {
    const CameraPose p = CameraPose::from_array(v);  // validates the rotation
    return {p.rotation(), p.translation()};
  } catch (const DomainError& e) {
    throw ConfigError(field, e.what());
  }
}

TextureConfig parse_texture(const json& j, const std::string& path) {
  TextureConfig t;
  ObjectReader r(j, path);
  r.read("seed", t.seed);
  r.read("min_wavelength", t.min_wavelength);
  r.read("max_wavelength", t.max_wavelength);
  r.read("constant", t.constant);
  r.finish();
  if (!(t.min_wavelength > 0.0) || !(t.max_wavelength >= t.min_wavelength)) {
    throw ConfigError(path, "need 0 < min_wavelength <= max_wavelength");
  }
  return t;
}

json texture_json(const TextureConfig& t) {
  return {{"seed", t.seed},
          {"min_wavelength", t.min_wavelength},
          {"max_wavelength", t.max_wavelength},
          {"constant", t.constant}};
}

}  // namespace

std::string to_string(AblationArm arm) {
  switch (arm) {
    case AblationArm::uniform: return "US";
    case AblationArm::probabilistic: return "PS";
    case AblationArm::probabilistic_weighted: return "PS+CW";
  }
  return "PS+CW";
}

AblationArm parse_arm(const std::string& text) {
  if (text == "US") return AblationArm::uniform;
  if (text == "PS") return AblationArm::probabilistic;
  if (text == "PS+CW") return AblationArm::probabilistic_weighted;
  throw ConfigError("arm", "expected US, PS or PS+CW, got '" + text + "'");
}

std::vector<CameraPose> TrajectoryConfig::build() const {
  if (kind == Kind::lateral) return lateral_trajectory(n_frames, reference, step);
  if (poses.size() < 2) throw ConfigError("trajectory.poses", "at least two poses are required");
  if (reference < 0 || reference >= static_cast<int>(poses.size())) {
    throw ConfigError("trajectory.reference", "out of range");
  }
  std::vector<CameraPose> out;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    try {
      out.push_back(CameraPose::from_array(poses[i]));
    } catch (const DomainError& e) {
      throw ConfigError("trajectory.poses[" + std::to_string(i) + "]", e.what());
    }
  }
  return out;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  ObjectReader root(j, "");

  {
    ObjectReader r(root.raw("scene"), "scene");
    r.read("background_depth", c.scene.background_depth);
    r.read("background_seed", c.scene.background_seed);
    if (r.has("primitives")) {
      const json& list = r.raw("primitives");
      if (!list.is_array()) throw ConfigError("scene.primitives", "expected an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "scene.primitives[" + std::to_string(i) + "]";
        ObjectReader p(list[i], path);
        PrimitiveConfig prim;
        std::string type;
        p.require("type", type);
        prim.kind = parse_kind(type, p.field("type"));
        p.read("pose", prim.pose);
        p.read("size", prim.size);
        if (p.has("texture")) prim.texture = parse_texture(p.raw("texture"), p.field("texture"));
        p.finish();
        c.scene.primitives.push_back(prim);
      }
    } else {
      r.skip("primitives");
    }
    r.finish();
  }

  {
    ObjectReader r(root.raw("camera"), "camera");
    r.require("fx", c.camera.full.fx);
    r.require("fy", c.camera.full.fy);
    r.require("cx", c.camera.full.cx);
    r.require("cy", c.camera.full.cy);
    r.require("width", c.camera.full.width);
    r.require("height", c.camera.full.height);
    r.read("downsample", c.camera.downsample);
    r.finish();
  }

  {
    ObjectReader r(root.raw("trajectory"), "trajectory");
    std::string type = "lateral";
    r.read("type", type);
    if (type == "lateral") {
      c.trajectory.kind = TrajectoryConfig::Kind::lateral;
    } else if (type == "poses") {
      c.trajectory.kind = TrajectoryConfig::Kind::explicit_poses;
    } else {
      throw ConfigError("trajectory.type", "expected lateral or poses");
    }
    r.read("n_frames", c.trajectory.n_frames);
    r.read("reference", c.trajectory.reference);
    r.read("step", c.trajectory.step);
    r.read("poses", c.trajectory.poses);
    r.finish();
  }

  if (root.has("prior")) {
    ObjectReader r(root.raw("prior"), "prior");
    r.read("mu_noise", c.prior.mu_noise);
    r.read("sigma_a", c.prior.sigma_a);
    r.read("sigma_b", c.prior.sigma_b);
    r.finish();
  } else {
    root.skip("prior");
  }

  if (root.has("corruption")) {
    ObjectReader r(root.raw("corruption"), "corruption");
    CorruptionSpec spec;
    std::string kind;
    r.require("kind", kind);
    spec.kind = parse_corruption(kind, "corruption.kind");
    r.require("primitive", spec.primitive);
    std::array<double, 3> motion{0, 0, 0};
    r.read("motion", motion);
    spec.motion = {motion[0], motion[1], motion[2]};
    r.finish();
    c.corruption = spec;
  } else {
    root.skip("corruption");
  }

  if (root.has("fusion")) {
    ObjectReader r(root.raw("fusion"), "fusion");
    FusionConfig& f = c.fusion;
    r.read("n_samples", f.n_samples);
    r.read("n_iter", f.n_iter);
    r.read("beta", f.beta);
    r.read("kappa", f.kappa);
    r.read("gamma", f.gamma);
    r.read("temperature", f.temperature);
    r.read("sigma_min", f.sigma_min);
    r.read("d_floor", f.d_floor);
    r.read("d_min", f.d_min);
    r.read("d_max", f.d_max);
    r.finish();
  } else {
    root.skip("fusion");
  }

  std::string arm = to_string(c.arm);
  root.read("arm", arm);
  c.arm = parse_arm(arm);
  root.read("seed", c.seed);
  if (root.has("depth_cap")) {
    double cap = 0.0;
    root.read("depth_cap", cap);
    c.depth_cap = cap;
  } else {
    root.skip("depth_cap");
  }
  root.read("output_dir", c.output_dir);
  root.finish();

  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json prims = json::array();
  for (const PrimitiveConfig& p : scene.primitives) {
    prims.push_back({{"type", kind_name(p.kind)},
                     {"pose", p.pose},
                     {"size", p.size},
                     {"texture", texture_json(p.texture)}});
  }
  json traj = {{"type", trajectory.kind == TrajectoryConfig::Kind::lateral ? "lateral" : "poses"},
               {"n_frames", trajectory.n_frames},
               {"reference", trajectory.reference},
               {"step", trajectory.step},
               {"poses", trajectory.poses}};
  json out = {
      {"scene",
       {{"background_depth", scene.background_depth},
        {"background_seed", scene.background_seed},
        {"primitives", prims}}},
      {"camera",
       {{"fx", camera.full.fx},
        {"fy", camera.full.fy},
        {"cx", camera.full.cx},
        {"cy", camera.full.cy},
        {"width", camera.full.width},
        {"height", camera.full.height},
        {"downsample", camera.downsample}}},
      {"trajectory", traj},
      {"prior",
       {{"mu_noise", prior.mu_noise}, {"sigma_a", prior.sigma_a}, {"sigma_b", prior.sigma_b}}},
      {"fusion",
       {{"n_samples", fusion.n_samples},
        {"n_iter", fusion.n_iter},
        {"beta", fusion.beta},
        {"kappa", fusion.kappa},
        {"gamma", fusion.gamma},
        {"temperature", fusion.temperature},
        {"sigma_min", fusion.sigma_min},
        {"d_floor", fusion.d_floor},
        {"d_min", fusion.d_min},
        {"d_max", fusion.d_max}}},
      {"arm", to_string(arm)},
      {"seed", seed},
      {"depth_cap", depth_cap ? json(*depth_cap) : json(nullptr)},
      {"output_dir", output_dir},
  };
  if (corruption) {
    out["corruption"] = {{"kind", corruption_name(corruption->kind)},
                         {"primitive", corruption->primitive},
                         {"motion", {corruption->motion.x(), corruption->motion.y(),
                                     corruption->motion.z()}}};
  } else {
    out["corruption"] = nullptr;
  }
  return out;
}

FusionConfig ExperimentConfig::effective_fusion() const {
  FusionConfig f = fusion;
  f.sampling_mode =
      arm == AblationArm::uniform ? SamplingMode::uniform : SamplingMode::probabilistic;
  f.weighting_enabled = arm == AblationArm::probabilistic_weighted;
  return f;
}

SyntheticScene ExperimentConfig::build_scene() const {
  std::vector<Primitive> prims;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const PrimitiveConfig& p = scene.primitives[i];
    const std::string path = "scene.primitives[" + std::to_string(i) + "]";
    Texture tex = p.texture.constant
                      ? Texture::constant()
                      : Texture::sinusoid_bank(p.texture.seed, kDefaultFeatureChannels,
                                               p.texture.min_wavelength, p.texture.max_wavelength);
    const Placement placement = placement_from(p.pose, path + ".pose");
    try {
      switch (p.kind) {
        case PrimitiveKind::plane:
          prims.push_back(Primitive::plane(placement, p.size[0], p.size[1], std::move(tex)));
          break;
        case PrimitiveKind::sphere:
          prims.push_back(Primitive::sphere(placement.origin, p.size[0], std::move(tex)));
          break;
        case PrimitiveKind::box:
          prims.push_back(Primitive::box(placement, {p.size[0], p.size[1], p.size[2]},
                                         std::move(tex)));
          break;
      }
    } catch (const ConfigError& e) {
      throw ConfigError(path + ".size", e.message());
    }
  }
  return SyntheticScene(std::move(prims), scene.background_depth, scene.background_seed);
}

void ExperimentConfig::validate() const {
  if (!(scene.background_depth > 0.0)) {
    throw ConfigError("scene.background_depth", "must be positive");
  }
  try {
    camera.full.validate();
  } catch (const DomainError& e) {
    throw ConfigError("camera", e.what());
  }
  if (camera.downsample < 1) throw ConfigError("camera.downsample", "must be >= 1");
  if (camera.full.width % camera.downsample != 0 || camera.full.height % camera.downsample != 0) {
    throw ConfigError("camera.downsample", "must divide width and height");
  }
  if (trajectory.kind == TrajectoryConfig::Kind::lateral) {
    if (!(trajectory.step > 0.0)) throw ConfigError("trajectory.step", "must be positive");
  }
  trajectory.build();
  if (!(prior.mu_noise >= 0.0)) throw ConfigError("prior.mu_noise", "must be non-negative");
  if (!(prior.sigma_a >= 0.0)) throw ConfigError("prior.sigma_a", "must be non-negative");
  if (!(prior.sigma_b >= 0.0)) throw ConfigError("prior.sigma_b", "must be non-negative");
  if (corruption) {
    if (corruption->primitive < 0 ||
        corruption->primitive >= static_cast<int>(scene.primitives.size())) {
      throw ConfigError("corruption.primitive", "no such primitive");
    }
  }
  try {
    effective_fusion().validate();
  } catch (const ConfigError& e) {
    throw ConfigError("fusion." + e.field(), e.message());
  }
  if (depth_cap && !(*depth_cap > 0.0)) throw ConfigError("depth_cap", "must be positive");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  build_scene();
}

void ExperimentConfig::set_axis(const std::string& axis, double value) {
  auto as_int = [&](const std::string& name) {
    if (value != std::floor(value) || value < 1 || value > 4096) {
      throw ConfigError(name, "expected a positive integer");
    }
    return static_cast<int>(value);
  };
  if (axis == "n_samples") {
    fusion.n_samples = as_int("n_samples");
  } else if (axis == "n_iter") {
    fusion.n_iter = as_int("n_iter");
  } else if (axis == "beta") {
    fusion.beta = value;
  } else if (axis == "kappa") {
    fusion.kappa = value;
  } else if (axis == "temperature") {
    fusion.temperature = value;
  } else {
    throw ConfigError("axis", "unknown sweep axis '" + axis + "'");
  }
  validate();
}

}  // namespace depthfuse
