#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "navsfm/io/config.h"
#include "navsfm/io/metrics.h"
#include "navsfm/pipeline/pipeline.h"

namespace navsfm::io {

struct RunOptions {
  std::string checkpoint_dir;  // empty: no checkpoints
  bool resume = true;          // continue from the latest checkpoint
  int stop_after = kNumStages;
};

// Runs (or resumes) the pipeline, writing a checkpoint after every stage.
// Throws CheckpointMismatch for a foreign checkpoint and StageError for a
// failing stage; completed checkpoints stay on disk.
PipelineState RunWithCheckpoints(const SurveyInput& input, const RunConfig& config,
                                  const RunOptions& options);

// Reprojection error of triangulation without bundle adjustment, by mode
// name ("priors", "pgo", "pgo_inlier").
std::map<std::string, double> EvaluateDirectTriangulation(const SurveyInput& input,
                                                          const PipelineState& state,
                                                          int num_threads);

// Wall clock of a complete hierarchical and a single-cluster run.
EfficiencyReport MeasureEfficiency(const SurveyInput& input, const RunConfig& config);

// <dir>/reconstruction/{poses.txt,landmarks.bin}, metrics.json,
// view_graph.txt and the plots trajectory.svg, view_graph.svg and
// weak_histogram.svg.
void WriteRunOutputs(const std::string& dir, const SurveyInput& input, const PipelineState& state,
                     const MetricsReport& metrics,
                     const std::optional<std::vector<Pose>>& reference);

}  // namespace navsfm::io
