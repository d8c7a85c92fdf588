#include "navsfm/pipeline/pipeline.h"

#include <chrono>

#include "navsfm/util/parallel.h"

namespace navsfm {

std::string ToString(Stage stage) {
  switch (stage) {
    case Stage::kViewGraph: return "view_graph";
    case Stage::kPartition: return "partition";
    case Stage::kLocalSfm: return "local_sfm";
    case Stage::kWeakArea: return "weak_area";
    case Stage::kPoseGraph: return "pose_graph";
    case Stage::kGlobal: return "global";
  }
  return "unknown";
}

optim::SolverOptions PipelineConfig::DefaultPgoSolver() {
  optim::SolverOptions o;
  o.max_iterations = 200;
  return o;
}

void PipelineConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(num_threads >= 1, "num_threads must be >= 1");
  require(partition.target_cluster_size >= 2, "partition.target_cluster_size must be >= 2");
  require(partition.overlap_ratio >= 0.0 && partition.overlap_ratio < 1.0,
          "partition.overlap_ratio must be in [0, 1)");
  require(pgo.IsValid(), "pgo weights must be non-negative");
  require(view_graph.two_view.min_inliers >= 5, "two_view.min_inliers must be >= 5");
  require(local.min_2d3d >= 4, "local.min_2d3d must be >= 4");
  require(global_ba.max_reprojection_error > 0.0, "global_ba.max_reprojection_error must be > 0");
  weak.Validate(view_graph.two_view.min_inliers);
}

namespace {

class Runner {
 public:
  Runner(const SurveyInput& input, const PipelineConfig& config, PipelineState& state)
      : input_(input),
        config_(config),
        state_(state),
        features_(input.matches),
        context_(SfmContext::Make(input, features_)) {
    local_ = config.local;
    local_.seed = config.seed;
  }

  void Run(Stage stage) {
    switch (stage) {
      case Stage::kViewGraph: return ViewGraphStage();
      case Stage::kPartition: return PartitionStage();
      case Stage::kLocalSfm: return LocalStage();
      case Stage::kWeakArea: return WeakStage();
      case Stage::kPoseGraph: return PoseGraphStage();
      case Stage::kGlobal: return GlobalStage();
    }
  }

 private:
  void ViewGraphStage() {
    ViewGraphOptions o = config_.view_graph;
    o.seed = config_.seed;
    o.num_threads = config_.num_threads;
    state_.graph = BuildViewGraph(input_, o);
  }

  void PartitionStage() {
    if (config_.hierarchical) {
      state_.clusters = Partition(state_.graph, config_.partition);
      return;
    }
    Cluster all;
    for (ImageId i = 0; i < input_.NumImages(); ++i) all.members.push_back(i);
    state_.clusters = {all};
  }

  void LocalStage() {
    const auto& clusters = state_.clusters;
    std::vector<ClusterResult> results(clusters.size());
    ParallelFor(static_cast<int>(clusters.size()), config_.num_threads, [&](int k) {
      results[k] = ReconstructCluster(clusters[k], state_.graph, context_, local_);
    });
    // Single-threaded reduction in cluster order.
    state_.subs.clear();
    for (auto& r : results) {
      if (!r.seeded) continue;
      MergeEdgeUpgrades(state_.graph, r.upgrades);
      state_.subs.push_back(std::move(r.sub));
    }
    if (state_.subs.empty()) throw std::runtime_error("no cluster could be initialized");
    state_.first_pass_report = DetectWeakAreas(state_.graph, state_.subs, config_.weak);
  }

  void WeakStage() {
    if (!config_.hierarchical || !config_.revisit) {
      state_.revisit = {};
      state_.revisit.final_report = state_.first_pass_report;
      return;
    }
    state_.revisit = RevisitWeakAreas(state_.graph, state_.subs, context_, local_, config_.weak,
                                      config_.num_threads);
  }

  void PoseGraphStage() {
    std::vector<RelativeEdge> edges = CollectRelativeEdges(state_.subs, config_.pgo_edges);
    state_.pose_graph =
        MakePoseGraph(state_.subs, context_.camera_priors, std::move(edges), config_.pgo);
    state_.pgo_initial = PoseGraphCost(state_.pose_graph);
    state_.pgo_final = state_.pgo_initial;
    state_.pgo_iterations = 0;
    if (!config_.hierarchical) return;
    const PgoReport report = OptimizePoseGraph(state_.pose_graph, config_.pgo_solver);
    state_.pgo_final = report.final;
    state_.pgo_iterations = report.summary.iterations;
  }

  void GlobalStage() {
    const int n = input_.NumImages();
    GlobalReconstruction& g = state_.result;
    g.registered.assign(n, false);
    for (const auto& sub : state_.subs) {
      for (const auto& [image, pose] : sub.recon.poses) g.registered[image] = true;
    }
    std::map<ImageId, Pose> poses;
    for (ImageId i = 0; i < n; ++i) {
      if (g.registered[i]) poses[i] = state_.pose_graph.vertices[i];
    }
    state_.tracks = MergeTracks(state_.subs, state_.graph, config_.track_merge);
    g.recon = Retriangulate(state_.tracks.tracks, poses, input_.camera, features_,
                            config_.retriangulation, &state_.retriangulation,
                            config_.num_threads);
    g.camera = input_.camera;
    g.rig = input_.rig;
    GlobalBundleAdjust(g.recon, g.camera, g.rig, input_.nav_priors, features_, config_.global_ba);
    g.trajectory = state_.pose_graph.vertices;
    for (const auto& [image, pose] : g.recon.poses) g.trajectory[image] = pose;
  }

  const SurveyInput& input_;
  const PipelineConfig& config_;
  PipelineState& state_;
  FeatureTable features_;
  SfmContext context_;
  LocalSfmOptions local_;
};

}  // namespace

void RunPipeline(const SurveyInput& input, const PipelineConfig& config, PipelineState& state,
                 const CheckpointCallback& on_checkpoint, int stop_after) {
  config.Validate();
  if (state.completed_stages < 0 || state.completed_stages > kNumStages) {
    throw std::invalid_argument("corrupt pipeline state");
  }
  Runner runner(input, config, state);
  const int last = std::min(stop_after, kNumStages);
  while (state.completed_stages < last) {
    const Stage stage = static_cast<Stage>(state.completed_stages);
    const auto start = std::chrono::steady_clock::now();
    try {
      runner.Run(stage);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    state.timings.push_back({ToString(stage), seconds});
    ++state.completed_stages;
    if (on_checkpoint) on_checkpoint(state);
  }
}

}  // namespace navsfm
