#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "navsfm/pgo/pose_graph.h"
#include "navsfm/scene.h"
#include "navsfm/sfm/global_recon.h"
#include "navsfm/sfm/local_sfm.h"
#include "navsfm/sfm/weak_area.h"
#include "navsfm/viewgraph/view_graph.h"

namespace navsfm {

enum class Stage : int {
  kViewGraph = 0,
  kPartition,
  kLocalSfm,
  kWeakArea,
  kPoseGraph,
  kGlobal,
};
constexpr int kNumStages = 6;
std::string ToString(Stage stage);

struct PipelineConfig {
  // false: one cluster holding every image, no revisit and no pose graph
  // optimization (plain incremental reconstruction).
  bool hierarchical = true;
  bool revisit = true;
  int num_threads = 1;
  uint64_t seed = 1;

  ViewGraphOptions view_graph;
  PartitionOptions partition;
  LocalSfmOptions local;
  WeakAreaOptions weak;
  PgoWeights pgo;
  EdgeCollectionOptions pgo_edges;
  optim::SolverOptions pgo_solver = DefaultPgoSolver();
  TrackMergeOptions track_merge;
  TriangulationOptions retriangulation{.min_angle_deg = 1.0,
                                       .refine_iterations = 10,
                                       .max_reprojection_error = 8.0};
  GlobalBundleAdjustmentOptions global_ba;

  static optim::SolverOptions DefaultPgoSolver();
  // Throws std::invalid_argument naming the offending option.
  void Validate() const;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

// Everything produced so far; a checkpoint is a serialized PipelineState.
struct PipelineState {
  int completed_stages = 0;
  ViewGraph graph;
  std::vector<Cluster> clusters;
  std::vector<SubReconstruction> subs;
  WeakReport first_pass_report;
  RevisitResult revisit;
  PoseGraph pose_graph;
  PgoTermCosts pgo_initial;
  PgoTermCosts pgo_final;
  int pgo_iterations = 0;
  MergedTracks tracks;
  RetriangulationReport retriangulation;
  GlobalReconstruction result;
  std::vector<StageTiming> timings;

  bool Done() const { return completed_stages == kNumStages; }
};

class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, const std::string& what)
      : std::runtime_error(ToString(stage) + ": " + what), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

using CheckpointCallback = std::function<void(const PipelineState&)>;

// Runs the remaining stages of `state` (all of them for a fresh state),
// calling on_checkpoint after each one. Stops after stop_after stages in
// total when given. Errors are rethrown as StageError; the state then holds
// the last completed stage.
void RunPipeline(const SurveyInput& input, const PipelineConfig& config, PipelineState& state,
                 const CheckpointCallback& on_checkpoint = {}, int stop_after = kNumStages);

}  // namespace navsfm
