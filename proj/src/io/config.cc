#include "navsfm/io/config.h"

#include <cstdlib>
#include <fstream>

namespace navsfm {

template <typename BasicJson>
void to_json(BasicJson& j, const Pose& p) {
  const auto& q = p.rotation();
  const auto& t = p.translation();
  j = BasicJson{{"q", {q.w(), q.x(), q.y(), q.z()}}, {"t", {t.x(), t.y(), t.z()}}};
}

template <typename BasicJson>
void from_json(const BasicJson& j, Pose& p) {
  const auto q = j.at("q").template get<std::array<double, 4>>();
  const auto t = j.at("t").template get<std::array<double, 3>>();
  const Eigen::Quaterniond rotation(q[0], q[1], q[2], q[3]);
  if (std::abs(rotation.norm() - 1.0) > 1e-6) {
    throw io::ConfigError("pose quaternion is not unit length");
  }
  p = Pose(rotation, Eigen::Vector3d(t[0], t[1], t[2]));
}

namespace {

template <typename BasicJson>
BasicJson MatrixToJson(const Eigen::Matrix3d& m) {
  BasicJson j = BasicJson::array();
  for (int r = 0; r < 3; ++r) j.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return j;
}

template <typename BasicJson>
Eigen::Matrix3d MatrixFromJson(const BasicJson& j) {
  const auto rows = j.template get<std::array<std::array<double, 3>, 3>>();
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

}  // namespace

template <typename BasicJson>
void to_json(BasicJson& j, const ResidualWeights& w) {
  j = BasicJson{{"rotation", MatrixToJson<BasicJson>(w.rotation)},
                {"translation", MatrixToJson<BasicJson>(w.translation)}};
}

template <typename BasicJson>
void from_json(const BasicJson& j, ResidualWeights& w) {
  w.rotation = MatrixFromJson(j.at("rotation"));
  w.translation = MatrixFromJson(j.at("translation"));
}

namespace sim {

template <typename BasicJson>
void to_json(BasicJson& j, const WeakStrip& s) {
  j = BasicJson{{"min_ne", {s.min_ne.x(), s.min_ne.y()}},
                {"max_ne", {s.max_ne.x(), s.max_ne.y()}},
                {"dropout", s.dropout}};
}

template <typename BasicJson>
void from_json(const BasicJson& j, WeakStrip& s) {
  for (const auto& [key, value] : j.items()) {
    if (key != "min_ne" && key != "max_ne" && key != "dropout") {
      throw io::ConfigError("weak strip: unknown key '" + key + "'");
    }
  }
  const auto lo = j.at("min_ne").template get<std::array<double, 2>>();
  const auto hi = j.at("max_ne").template get<std::array<double, 2>>();
  s.min_ne = {lo[0], lo[1]};
  s.max_ne = {hi[0], hi[1]};
  s.dropout = j.at("dropout").template get<double>();
}

}  // namespace sim

namespace io {
namespace {

struct Writer {
  Json* j;

  template <typename T>
  void operator()(const char* key, const T& value) {
    (*j)[key] = value;
  }
  Writer Sub(const char* key) {
    (*j)[key] = Json::object();
    return Writer{&(*j)[key]};
  }
};

struct Reader {
  const Json* j;  // null: section absent, keep defaults
  std::string path;

  template <typename T>
  void operator()(const char* key, T& value) {
    if (j == nullptr || !j->contains(key)) return;
    try {
      j->at(key).get_to(value);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + key + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(path + key + ": " + e.what());
    }
  }
  Reader Sub(const char* key) {
    if (j == nullptr || !j->contains(key)) return Reader{nullptr, path + key + "."};
    return Reader{&j->at(key), path + key + "."};
  }
};

template <typename V>
void VisitSolver(V v, optim::SolverOptions& s) {
  v("max_iterations", s.max_iterations);
  v("gradient_tolerance", s.gradient_tolerance);
  v("function_tolerance", s.function_tolerance);
  v("step_tolerance", s.step_tolerance);
  v("initial_lambda", s.initial_lambda);
  v("max_lambda", s.max_lambda);
}

template <typename V>
void VisitTriangulation(V v, TriangulationOptions& t) {
  v("min_angle_deg", t.min_angle_deg);
  v("refine_iterations", t.refine_iterations);
  v("max_reprojection_error", t.max_reprojection_error);
}

template <typename V>
void VisitBundleAdjustment(V v, BundleAdjustmentOptions& ba) {
  v("prior_weights", ba.prior.weights);
  v("loss_width", ba.prior.loss_width);
  v("use_priors", ba.use_priors);
  v("refine_intrinsics", ba.refine_intrinsics);
  v("refine_rig", ba.refine_rig);
  VisitSolver(v.Sub("solver"), ba.solver);
}

template <typename V>
void Visit(V v, RunConfig& c) {
  PipelineConfig& p = c.pipeline;
  v("hierarchical", p.hierarchical);
  v("revisit", p.revisit);
  v("num_threads", p.num_threads);
  v("seed", p.seed);
  {
    V s = v.Sub("view_graph");
    s("pair_radius", p.view_graph.pair_radius);
    s("altitude", p.view_graph.altitude);
    s("max_neighbors", p.view_graph.max_neighbors);
    V t = s.Sub("two_view");
    t("max_angular_error", p.view_graph.two_view.max_angular_error);
    t("min_inliers", p.view_graph.two_view.min_inliers);
    t("min_inlier_ratio", p.view_graph.two_view.min_inlier_ratio);
    t("max_iterations", p.view_graph.two_view.max_iterations);
    t("confidence", p.view_graph.two_view.confidence);
    t("refine", p.view_graph.two_view.refine);
  }
  {
    V s = v.Sub("partition");
    s("target_cluster_size", p.partition.target_cluster_size);
    s("overlap_ratio", p.partition.overlap_ratio);
  }
  {
    V s = v.Sub("local_sfm");
    s("min_seed_baseline", p.local.min_seed_baseline);
    s("min_2d3d", p.local.min_2d3d);
    s("max_reprojection_error", p.local.max_reprojection_error);
    s("abs_pose_max_iterations", p.local.abs_pose_max_iterations);
    s("abs_pose_confidence", p.local.abs_pose_confidence);
    VisitTriangulation(s.Sub("triangulation"), p.local.triangulation);
    VisitBundleAdjustment(s.Sub("bundle_adjustment"), p.local.ba);
    s("ba_interval_min", p.local.ba_interval_min);
    s("ba_interval_fraction", p.local.ba_interval_fraction);
  }
  {
    V s = v.Sub("weak_area");
    s("min_matches", p.weak.min_matches);
    s("weak_ratio", p.weak.weak_ratio);
    s("max_rounds", p.weak.max_rounds);
    s("hops", p.weak.hops);
    s("merge_overlap", p.weak.merge_overlap);
  }
  {
    V s = v.Sub("pose_graph");
    s("rho_relative", p.pgo.relative);
    s("rho_absolute", p.pgo.absolute);
    s("rho_smooth", p.pgo.smooth);
    s("min_shared_landmarks", p.pgo_edges.min_shared_landmarks);
    s("weight_cap", p.pgo_edges.weight_cap);
    s("per_edge_weighting", p.pgo_edges.per_edge_weighting);
    VisitSolver(s.Sub("solver"), p.pgo_solver);
  }
  {
    V s = v.Sub("global");
    s("min_track_length", p.track_merge.min_track_length);
    s("link_matches", p.track_merge.link_matches);
    VisitTriangulation(s.Sub("triangulation"), p.retriangulation);
    VisitBundleAdjustment(s.Sub("bundle_adjustment"), p.global_ba.ba);
    s("max_reprojection_error", p.global_ba.max_reprojection_error);
    s("max_filter_passes", p.global_ba.max_filter_passes);
  }
  {
    V s = v.Sub("simulation");
    V g = s.Sub("survey");
    sim::SurveyConfig& y = c.survey;
    g("num_tracks", y.num_tracks);
    g("track_length", y.track_length);
    g("track_spacing", y.track_spacing);
    g("altitude", y.altitude);
    g("image_interval", y.image_interval);
    g("cross_track", y.cross_track);
    g("terrain_amplitude", y.terrain_amplitude);
    g("terrain_roughness", y.terrain_roughness);
    g("landmark_density", y.landmark_density);
    g("fov_margin", y.fov_margin);
    g("seed", y.seed);
    g("image_width", y.image_width);
    g("image_height", y.image_height);
    g("horizontal_fov_deg", y.horizontal_fov_deg);
    g("seafloor_depth", y.seafloor_depth);
    g("vehicle_speed", y.vehicle_speed);
    g("attitude_wobble_deg", y.attitude_wobble_deg);
    g("rig", y.rig.camera_to_vehicle);
    V n = s.Sub("noise");
    sim::NoiseModel& m = c.noise;
    n("nav_position_sigma", m.nav_position_sigma);
    n("nav_rotation_sigma_deg", m.nav_rotation_sigma_deg);
    n("nav_position_drift", m.nav_position_drift);
    n("nav_rotation_drift_deg", m.nav_rotation_drift_deg);
    n("pixel_sigma", m.pixel_sigma);
    n("outlier_fraction", m.outlier_fraction);
    n("dropout", m.dropout);
    n("weak_strips", m.weak_strips);
    n("seed", c.noise_seed);
  }
}

// Every key of `patch` must exist in `reference` with the same kind
// (object vs leaf). Leaves are type-checked when read.
void CheckKeys(const Json& patch, const Json& reference, const std::string& path) {
  if (!patch.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : patch.items()) {
    if (!reference.contains(key)) throw ConfigError("unknown configuration key '" + path + key + "'");
    const Json& ref = reference.at(key);
    if (ref.is_object()) {
      CheckKeys(value, ref, path + key + ".");
    } else if (value.is_object()) {
      throw ConfigError(path + key + ": expected a value, got an object");
    }
  }
}

}  // namespace

Json ToJson(const RunConfig& config) {
  Json j = Json::object();
  Visit(Writer{&j}, const_cast<RunConfig&>(config));
  return j;
}

RunConfig ApplyConfig(const RunConfig& base, const Json& patch) {
  CheckKeys(patch, ToJson(base), "");
  RunConfig c = base;
  Visit(Reader{&patch, ""}, c);
  try {
    c.pipeline.Validate();
    c.survey.Validate();
    c.noise.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig RunConfigFromJson(const Json& json) { return ApplyConfig(RunConfig{}, json); }

RunConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

RunConfig LoadConfig(const std::string& path) {
  if (!path.empty()) return LoadConfigFile(path);
  const char* env = std::getenv(kConfigEnv);
  if (env != nullptr && *env != '\0') return LoadConfigFile(env);
  return RunConfig{};
}

RunConfig ApplyOverride(const RunConfig& base, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  Json patch = Json::object();
  Json* node = &patch;
  size_t begin = 0;
  while (true) {
    const size_t dot = key.find('.', begin);
    const std::string part = key.substr(begin, dot - begin);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    begin = dot + 1;
  }
  return ApplyConfig(base, patch);
}

Json ToJson(const Pose& pose) {
  Json j;
  to_json(j, pose);
  return j;
}

Pose PoseFromJson(const Json& json) {
  Pose p;
  from_json(json, p);
  return p;
}

Json CameraToJson(const CameraIntrinsics& camera, const RigExtrinsics& rig) {
  Json c = {{"model", "equidistant_fisheye"},
            {"width", camera.width},
            {"height", camera.height},
            {"fx", camera.fx},
            {"fy", camera.fy},
            {"cx", camera.cx},
            {"cy", camera.cy},
            {"k", camera.k}};
  return Json{{"camera", c}, {"rig", {{"camera_to_vehicle", ToJson(rig.camera_to_vehicle)}}}};
}

void CameraFromJson(const Json& json, CameraIntrinsics* camera, RigExtrinsics* rig) {
  try {
    const Json& c = json.at("camera");
    if (c.value("model", "equidistant_fisheye") != "equidistant_fisheye") {
      throw ConfigError("unsupported camera model " + c.at("model").get<std::string>());
    }
    c.at("width").get_to(camera->width);
    c.at("height").get_to(camera->height);
    c.at("fx").get_to(camera->fx);
    c.at("fy").get_to(camera->fy);
    c.at("cx").get_to(camera->cx);
    c.at("cy").get_to(camera->cy);
    c.at("k").get_to(camera->k);
    rig->camera_to_vehicle = PoseFromJson(json.at("rig").at("camera_to_vehicle"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("camera: ") + e.what());
  }
  if (camera->width <= 0 || camera->height <= 0 || !(camera->fx > 0) || !(camera->fy > 0)) {
    throw ConfigError("camera: image size and focal lengths must be positive");
  }
}

void WriteCameraFile(const std::string& path, const CameraIntrinsics& camera,
                     const RigExtrinsics& rig) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << CameraToJson(camera, rig).dump(2) << '\n';
}

void ReadCameraFile(const std::string& path, CameraIntrinsics* camera, RigExtrinsics* rig) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  CameraFromJson(j, camera, rig);
}

}  // namespace io
}  // namespace navsfm
