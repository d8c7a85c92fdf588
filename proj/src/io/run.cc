#include "navsfm/io/run.h"

#include <chrono>
#include <filesystem>
#include <sstream>

#include "navsfm/io/checkpoint.h"
#include "navsfm/io/plots.h"
#include "navsfm/io/reconstruction_io.h"

namespace navsfm::io {

PipelineState RunWithCheckpoints(const SurveyInput& input, const RunConfig& config,
                                  const RunOptions& options) {
  PipelineState state;
  if (options.checkpoint_dir.empty()) {
    RunPipeline(input, config.pipeline, state, {}, options.stop_after);
    return state;
  }
  std::filesystem::create_directories(options.checkpoint_dir);
  const std::string key = CheckpointConfigKey(config);
  const uint64_t fingerprint = InputFingerprint(input);
  if (options.resume) {
    if (auto latest = LoadLatestCheckpoint(options.checkpoint_dir, key, fingerprint)) {
      state = std::move(*latest);
    }
  }
  RunPipeline(input, config.pipeline, state,
              [&](const PipelineState& s) {
                SaveCheckpoint(CheckpointPath(options.checkpoint_dir, s.completed_stages), s,
                               key, fingerprint);
              },
              options.stop_after);
  return state;
}

std::map<std::string, double> EvaluateDirectTriangulation(const SurveyInput& input,
                                                          const PipelineState& state,
                                                          int num_threads) {
  if (state.completed_stages < static_cast<int>(Stage::kGlobal) + 1) {
    throw std::invalid_argument("direct triangulation needs a completed pipeline");
  }
  const FeatureTable features(input.matches);
  const TrackSet match_tracks = MatchTracks(state.graph);
  std::map<std::string, double> out;
  for (const auto mode : {DirectTriangulationMode::kPriors, DirectTriangulationMode::kPgo,
                          DirectTriangulationMode::kPgoInlier}) {
    const DirectTriangulationResult r =
        DirectTriangulation(mode, match_tracks, state.tracks.tracks, input.CameraPriors(),
                            state.pose_graph.vertices, input.camera, features, num_threads);
    out[ToString(mode)] = r.mean_reprojection_error;
  }
  return out;
}

EfficiencyReport MeasureEfficiency(const SurveyInput& input, const RunConfig& config) {
  auto time = [&](bool hierarchical) {
    PipelineConfig c = config.pipeline;
    c.hierarchical = hierarchical;
    PipelineState state;
    const auto start = std::chrono::steady_clock::now();
    RunPipeline(input, c, state);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  EfficiencyReport e;
  e.hierarchical_seconds = time(true);
  e.single_cluster_seconds = time(false);
  return e;
}

void WriteRunOutputs(const std::string& dir, const SurveyInput& input, const PipelineState& state,
                     const MetricsReport& metrics,
                     const std::optional<std::vector<Pose>>& reference) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  WriteReconstruction((fs::path(dir) / "reconstruction").string(), state.result);
  WriteMetricsFile((fs::path(dir) / "metrics.json").string(), metrics);

  std::ostringstream summary;
  WriteViewGraphSummary(summary, state.graph);
  WriteTextFile((fs::path(dir) / "view_graph.txt").string(), summary.str());

  std::vector<TrajectorySeries> series;
  if (reference) series.push_back({"ground truth", "black", *reference, {}});
  series.push_back({"navigation prior", "orange", input.CameraPriors(), {}});
  series.push_back({"reconstruction", "royalblue", state.result.trajectory,
                    state.result.registered});
  std::ostringstream trajectory;
  WriteTrajectorySvg(trajectory, series);
  WriteTextFile((fs::path(dir) / "trajectory.svg").string(), trajectory.str());

  std::vector<bool> weak(state.graph.NumEdges(), false);
  const auto& first = state.first_pass_report.weak_pairs;
  for (int k = 0; k < state.graph.NumEdges(); ++k) {
    const auto& e = state.graph.Edges()[k];
    const ImagePair key = std::minmax(e.image1, e.image2);
    weak[k] = std::binary_search(first.begin(), first.end(), key);
  }
  std::ostringstream graph;
  WriteViewGraphSvg(graph, state.graph, input.CameraPriors(), weak);
  WriteTextFile((fs::path(dir) / "view_graph.svg").string(), graph.str());

  std::ostringstream histogram;
  WriteConstraintHistogramSvg(histogram, state.first_pass_report.constraints_per_image,
                              state.revisit.final_report.constraints_per_image);
  WriteTextFile((fs::path(dir) / "weak_histogram.svg").string(), histogram.str());
}

}  // namespace navsfm::io
