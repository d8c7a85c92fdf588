#include "navsfm/io/metrics.h"

#include <fstream>

namespace navsfm::io {
namespace {

WeakCounts Count(const WeakReport& r) {
  return {static_cast<int>(r.weak_pairs.size()), static_cast<int>(r.unregistered.size())};
}

double TrajectoryAte(const std::vector<Pose>& poses, const std::vector<Pose>& reference) {
  std::map<ImageId, Pose> m;
  for (size_t i = 0; i < poses.size(); ++i) m[static_cast<ImageId>(i)] = poses[i];
  return AbsoluteTrajectoryError(m, reference);
}

Json CostsToJson(const PgoTermCosts& c) {
  return {{"relative", c.relative},
          {"absolute", c.absolute},
          {"smooth", c.smooth},
          {"total", c.Total()}};
}

PgoTermCosts CostsFromJson(const Json& j) {
  PgoTermCosts c;
  j.at("relative").get_to(c.relative);
  j.at("absolute").get_to(c.absolute);
  j.at("smooth").get_to(c.smooth);
  return c;
}

template <typename T>
std::optional<T> Optional(const Json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

MetricsReport MakeMetricsReport(const RunConfig& config, const SurveyInput& input,
                                const PipelineState& state,
                                const std::optional<std::vector<Pose>>& reference) {
  MetricsReport r;
  r.config = ToJson(config);
  const FeatureTable features(input.matches);
  const GlobalReconstruction& g = state.result;
  r.has_reference = reference.has_value();
  r.metrics = ComputeMetrics(g.recon, g.camera, features, input.NumImages(),
                             reference ? *reference : g.trajectory);
  if (reference) {
    r.prior_ate = TrajectoryAte(input.CameraPriors(), *reference);
    r.pgo_ate = TrajectoryAte(state.pose_graph.vertices, *reference);
  }
  r.num_clusters = static_cast<int>(state.clusters.size());
  r.num_sub_reconstructions = static_cast<int>(state.subs.size());
  r.weak_history.push_back(Count(state.first_pass_report));
  for (size_t k = 1; k < state.revisit.rounds.size(); ++k) {
    r.weak_history.push_back(Count(state.revisit.rounds[k].before));
  }
  if (!state.revisit.rounds.empty()) r.weak_history.push_back(Count(state.revisit.final_report));
  r.constraints_first_pass = state.first_pass_report.constraints_per_image;
  r.constraints_final = state.revisit.final_report.constraints_per_image;
  r.pgo_initial = state.pgo_initial;
  r.pgo_final = state.pgo_final;
  r.pgo_iterations = state.pgo_iterations;
  r.retriangulation = state.retriangulation;
  r.timing = state.timings;
  return r;
}

Json ToJson(const MetricsReport& r, bool include_timing) {
  Json j;
  j["config"] = r.config;
  const ReconstructionMetrics& m = r.metrics;
  Json metrics = {{"num_images", m.num_images},
                  {"num_registered", m.num_registered},
                  {"num_landmarks", m.num_landmarks},
                  {"num_observations", m.num_observations},
                  {"mean_track_length", m.mean_track_length},
                  {"mean_reprojection_error_px", m.mean_reprojection_error}};
  if (r.has_reference) metrics["ate_rmse_m"] = m.ate_rmse;
  if (r.prior_ate) metrics["prior_ate_rmse_m"] = *r.prior_ate;
  if (r.pgo_ate) metrics["pgo_ate_rmse_m"] = *r.pgo_ate;
  j["metrics"] = metrics;
  j["clusters"] = {{"partition", r.num_clusters},
                   {"sub_reconstructions", r.num_sub_reconstructions}};
  Json history = Json::array();
  for (const auto& w : r.weak_history) {
    history.push_back({{"weak_pairs", w.weak_pairs}, {"unregistered", w.unregistered}});
  }
  j["weak_areas"] = {{"history", history},
                     {"constraints_first_pass", r.constraints_first_pass},
                     {"constraints_final", r.constraints_final}};
  j["pose_graph"] = {{"initial", CostsToJson(r.pgo_initial)},
                     {"final", CostsToJson(r.pgo_final)},
                     {"iterations", r.pgo_iterations}};
  j["retriangulation"] = {{"num_tracks", r.retriangulation.num_tracks},
                          {"status_counts", r.retriangulation.status_counts}};
  if (!r.direct_triangulation_re.empty()) {
    Json dt = Json::object();
    for (const auto& [mode, re] : r.direct_triangulation_re) dt[mode] = re;
    j["direct_triangulation_re_px"] = dt;
  }
  if (r.efficiency) {
    j["efficiency"] = {{"hierarchical_seconds", r.efficiency->hierarchical_seconds},
                       {"single_cluster_seconds", r.efficiency->single_cluster_seconds},
                       {"ratio", r.efficiency->Ratio()}};
  }
  if (include_timing) {
    Json timing = Json::array();
    for (const auto& t : r.timing) timing.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    j["timing"] = timing;
  }
  return j;
}

MetricsReport MetricsFromJson(const Json& j) {
  MetricsReport r;
  try {
    r.config = j.at("config");
    const Json& m = j.at("metrics");
    m.at("num_images").get_to(r.metrics.num_images);
    m.at("num_registered").get_to(r.metrics.num_registered);
    m.at("num_landmarks").get_to(r.metrics.num_landmarks);
    m.at("num_observations").get_to(r.metrics.num_observations);
    m.at("mean_track_length").get_to(r.metrics.mean_track_length);
    m.at("mean_reprojection_error_px").get_to(r.metrics.mean_reprojection_error);
    r.has_reference = m.contains("ate_rmse_m");
    if (r.has_reference) m.at("ate_rmse_m").get_to(r.metrics.ate_rmse);
    r.prior_ate = Optional<double>(m, "prior_ate_rmse_m");
    r.pgo_ate = Optional<double>(m, "pgo_ate_rmse_m");
    j.at("clusters").at("partition").get_to(r.num_clusters);
    j.at("clusters").at("sub_reconstructions").get_to(r.num_sub_reconstructions);
    const Json& w = j.at("weak_areas");
    for (const auto& h : w.at("history")) {
      r.weak_history.push_back({h.at("weak_pairs").get<int>(), h.at("unregistered").get<int>()});
    }
    w.at("constraints_first_pass").get_to(r.constraints_first_pass);
    w.at("constraints_final").get_to(r.constraints_final);
    r.pgo_initial = CostsFromJson(j.at("pose_graph").at("initial"));
    r.pgo_final = CostsFromJson(j.at("pose_graph").at("final"));
    j.at("pose_graph").at("iterations").get_to(r.pgo_iterations);
    j.at("retriangulation").at("num_tracks").get_to(r.retriangulation.num_tracks);
    j.at("retriangulation").at("status_counts").get_to(r.retriangulation.status_counts);
    if (j.contains("direct_triangulation_re_px")) {
      for (const auto& [mode, re] : j.at("direct_triangulation_re_px").items()) {
        r.direct_triangulation_re[mode] = re.get<double>();
      }
    }
    if (j.contains("efficiency")) {
      EfficiencyReport e;
      j.at("efficiency").at("hierarchical_seconds").get_to(e.hierarchical_seconds);
      j.at("efficiency").at("single_cluster_seconds").get_to(e.single_cluster_seconds);
      r.efficiency = e;
    }
    if (j.contains("timing")) {
      for (const auto& t : j.at("timing")) {
        r.timing.push_back({t.at("stage").get<std::string>(), t.at("seconds").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metrics: ") + e.what());
  }
  return r;
}

void WriteMetricsFile(const std::string& path, const MetricsReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << ToJson(report).dump(2) << '\n';
}

MetricsReport ReadMetricsFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return MetricsFromJson(Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace navsfm::io
