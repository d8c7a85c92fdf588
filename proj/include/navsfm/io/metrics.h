#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "navsfm/io/config.h"
#include "navsfm/io/format.h"
#include "navsfm/pipeline/pipeline.h"

namespace navsfm::io {

struct WeakCounts {
  int weak_pairs = 0;
  int unregistered = 0;

  bool operator==(const WeakCounts&) const = default;
};

struct EfficiencyReport {
  double hierarchical_seconds = 0.0;
  double single_cluster_seconds = 0.0;
  // hierarchical / single-cluster wall clock.
  double Ratio() const {
    return single_cluster_seconds > 0.0 ? hierarchical_seconds / single_cluster_seconds : 0.0;
  }

  bool operator==(const EfficiencyReport&) const = default;
};

struct MetricsReport {
  Json config;
  ReconstructionMetrics metrics;  // ate_rmse only meaningful with a reference
  bool has_reference = false;
  std::optional<double> prior_ate;  // m, navigation priors vs reference
  std::optional<double> pgo_ate;    // m, pose-graph poses vs reference
  int num_clusters = 0;
  int num_sub_reconstructions = 0;
  // First pass, then after every revisit round.
  std::vector<WeakCounts> weak_history;
  // Relative constraints per image, first pass and final.
  std::vector<int> constraints_first_pass;
  std::vector<int> constraints_final;
  PgoTermCosts pgo_initial;
  PgoTermCosts pgo_final;
  int pgo_iterations = 0;
  RetriangulationReport retriangulation;
  std::map<std::string, double> direct_triangulation_re;  // px, by mode
  std::optional<EfficiencyReport> efficiency;
  // Wall clock; excluded from reproducibility comparisons.
  std::vector<StageTiming> timing;
};

// Reference poses are camera-frame ground truth when known (simulation).
MetricsReport MakeMetricsReport(const RunConfig& config, const SurveyInput& input,
                                const PipelineState& state,
                                const std::optional<std::vector<Pose>>& reference);

Json ToJson(const MetricsReport& report, bool include_timing = true);
MetricsReport MetricsFromJson(const Json& json);

void WriteMetricsFile(const std::string& path, const MetricsReport& report);
MetricsReport ReadMetricsFile(const std::string& path);

}  // namespace navsfm::io
