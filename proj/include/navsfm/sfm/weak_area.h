#pragma once

#include <vector>

#include "navsfm/sfm/local_sfm.h"
#include "navsfm/sfm/reconstruction.h"
#include "navsfm/viewgraph/view_graph.h"

namespace navsfm {

struct WeakAreaOptions {
  int min_matches = 50;       // mu: only pairs with N_m > mu can be weak
  double weak_ratio = 0.2;    // weak when N_p < ratio * N_m
  int max_rounds = 2;
  int hops = 1;               // view-graph neighbourhood around weak items
  double merge_overlap = 0.5; // merge clusters sharing more than this fraction

  // Throws std::invalid_argument when inconsistent.
  void Validate(int min_two_view_inliers = 0) const;
};

struct WeakReport {
  std::vector<ImagePair> weak_pairs;      // sorted, first < second
  std::vector<ImageId> unregistered;      // registered in no sub-reconstruction
  // Relative constraints (edges with shared points) per image.
  std::vector<int> constraints_per_image;

  bool Empty() const { return weak_pairs.empty() && unregistered.empty(); }
};

bool IsWeakEdge(const ViewGraphEdge& edge, const WeakAreaOptions& options);

WeakReport DetectWeakAreas(const ViewGraph& graph, const std::vector<SubReconstruction>& subs,
                           const WeakAreaOptions& options);

// One cluster per connected group of weak items grown by `hops` view-graph
// steps; clusters overlapping by more than merge_overlap of the smaller one
// are merged. Cluster ids start at first_id.
std::vector<Cluster> BuildRevisitClusters(const WeakReport& report, const ViewGraph& graph,
                                          const WeakAreaOptions& options, int first_id = 0);

// Keeps, per edge, the upgrade with the most shared points. Returns the
// number of edges whose N_p changed.
int MergeEdgeUpgrades(ViewGraph& graph, const std::vector<EdgeUpgrade>& upgrades);

struct RevisitRound {
  int num_clusters = 0;
  int num_seeded = 0;
  WeakReport before;
};

struct RevisitResult {
  std::vector<RevisitRound> rounds;
  WeakReport final_report;
};

// Detect -> build clusters -> reconstruct -> merge, until no weak items remain
// or max_rounds is reached. Successful revisit reconstructions are appended
// to subs.
RevisitResult RevisitWeakAreas(ViewGraph& graph, std::vector<SubReconstruction>& subs,
                               const SfmContext& context, const LocalSfmOptions& local,
                               const WeakAreaOptions& options, int num_threads = 1);

}  // namespace navsfm
