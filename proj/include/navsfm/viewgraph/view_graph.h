#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "navsfm/geom/camera.h"
#include "navsfm/geom/essential.h"
#include "navsfm/geom/pose.h"
#include "navsfm/scene.h"

namespace navsfm {

// Verified image pair. two_view maps camera image1 into camera image2
// (x2 = R x1 + t, |t| = 1).
struct ViewGraphEdge {
  ImageId image1 = 0;
  ImageId image2 = 0;
  int num_matches = 0;  // N_m, verified inliers
  std::vector<FeatureMatch> inliers;
  RelativeMotion two_view;
  int num_shared_points = 0;  // N_p, set by local SfM
  // Metric ^{image2}T_{image1} from a sub-reconstruction.
  std::optional<Pose> metric_relative;
};

class ViewGraph {
 public:
  ViewGraph() = default;
  explicit ViewGraph(int num_images) : num_images_(num_images) {}

  int NumImages() const { return num_images_; }
  int NumEdges() const { return static_cast<int>(edges_.size()); }

  // Adds or replaces the edge of the (unordered) pair.
  ViewGraphEdge& AddEdge(ViewGraphEdge edge);
  const ViewGraphEdge* Find(ImageId a, ImageId b) const;
  ViewGraphEdge* Find(ImageId a, ImageId b);

  const std::vector<ViewGraphEdge>& Edges() const { return edges_; }
  std::vector<ViewGraphEdge>& MutableEdges() { return edges_; }

  // Adjacent images sorted by id.
  std::vector<ImageId> Neighbors(ImageId image) const;
  std::vector<std::vector<ImageId>> Adjacency() const;

 private:
  static std::pair<ImageId, ImageId> Key(ImageId a, ImageId b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  int num_images_ = 0;
  std::vector<ViewGraphEdge> edges_;
  std::map<std::pair<ImageId, ImageId>, int> index_;
};

struct Cluster {
  int id = 0;
  std::vector<ImageId> members;  // sorted
  std::vector<ImageId> overlap;  // members shared with another cluster

  bool Contains(ImageId image) const;
};

using ImagePair = std::pair<ImageId, ImageId>;

// All pairs whose prior camera centers are within radius, limited to the
// max_neighbors nearest per image (the union over both endpoints is kept).
// Sorted, first < second.
std::vector<ImagePair> SelectPairs(const std::vector<Pose>& priors,
                                   double radius, int max_neighbors);

// Pair-selection radius: multiple of the ground footprint diagonal at the
// given altitude.
double DefaultPairRadius(const CameraIntrinsics& camera, double altitude,
                         double factor = 2.5);

struct TwoViewOptions {
  double max_angular_error = 5e-3;  // rad
  int min_inliers = 15;
  double min_inlier_ratio = 0.25;
  int max_iterations = 1000;
  double confidence = 0.999;
  bool refine = true;
};

enum class TwoViewStatus {
  kSuccess,
  kTooFewMatches,
  kNoModel,
  kTooFewInliers,
  kLowInlierRatio,
};

std::string ToString(TwoViewStatus status);

struct TwoViewResult {
  TwoViewStatus status = TwoViewStatus::kNoModel;
  ViewGraphEdge edge;
  std::vector<bool> inlier_mask;  // aligned with the input matches
  int iterations = 0;

  bool ok() const { return status == TwoViewStatus::kSuccess; }
};

// RANSAC five-point essential matrix on undistorted rays, cheirality-resolved
// decomposition and nonlinear refinement.
TwoViewResult VerifyTwoView(const PairMatches& pair, const CameraIntrinsics& camera,
                            const TwoViewOptions& options, uint64_t seed);

struct ViewGraphOptions {
  double pair_radius = 0.0;  // <= 0: derived from altitude
  double altitude = 8.0;
  int max_neighbors = 40;
  TwoViewOptions two_view;
  uint64_t seed = 1;
  int num_threads = 1;
};

// Verifies every match pair accepted by spatial selection.
ViewGraph BuildViewGraph(const SurveyInput& input, const ViewGraphOptions& options);

struct PartitionOptions {
  int target_cluster_size = 150;
  double overlap_ratio = 0.2;
};

// Edge weights N_m as a dense symmetric matrix over the given nodes.
Eigen::MatrixXd WeightMatrix(const ViewGraph& graph, const std::vector<ImageId>& nodes);

// cut(A, B) / assoc(A, V) + cut(A, B) / assoc(B, V) for side[i] in {0, 1}.
double NormalizedCutObjective(const Eigen::MatrixXd& weights,
                              const std::vector<int>& side);

// Spectral bisection of a connected weighted graph followed by a sweep over
// the Fiedler ordering and greedy single-vertex refinement.
std::vector<int> NormalizedCutBisection(const Eigen::MatrixXd& weights);

// Connected components of the nodes, each sorted; components sorted by
// smallest member.
std::vector<std::vector<int>> ConnectedComponents(const Eigen::MatrixXd& weights);

// Recursive normalized cut until clusters are <= target size, then each
// cluster grows by its strongest boundary neighbors.
std::vector<Cluster> Partition(const ViewGraph& graph, const PartitionOptions& options);

}  // namespace navsfm
