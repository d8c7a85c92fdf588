#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "navsfm/geom/pose.h"
#include "navsfm/optim/levenberg_marquardt.h"
#include "navsfm/scene.h"
#include "navsfm/sfm/reconstruction.h"

namespace navsfm {

struct PgoWeights {
  double relative = 1.0;
  double absolute = 0.001;
  double smooth = 2.0;

  bool IsValid() const { return relative >= 0 && absolute >= 0 && smooth >= 0; }
};

// Measured ^jT_i between two registered images of one sub-reconstruction.
struct RelativeEdge {
  ImageId i = 0;
  ImageId j = 0;
  Pose measurement;
  int shared_landmarks = 0;
  double weight = 1.0;  // per-edge confidence inside rho_rel
};

struct PoseGraph {
  std::vector<Pose> vertices;  // indexed by image id, capture order
  std::vector<Pose> priors;    // camera-frame priors, same indexing
  std::vector<RelativeEdge> edges;
  PgoWeights weights;

  int NumVertices() const { return static_cast<int>(vertices.size()); }
  // Vertices without relative edges, recomputed on every call.
  std::vector<ImageId> IsolatedVertices() const;
};

struct EdgeCollectionOptions {
  int min_shared_landmarks = 1;
  int weight_cap = 200;
  bool per_edge_weighting = true;  // false: every edge weight 1
};

// Every pair of registered images sharing landmarks inside one
// sub-reconstruction; duplicates across clusters keep the better-supported
// measurement.
std::vector<RelativeEdge> CollectRelativeEdges(const std::vector<SubReconstruction>& subs,
                                               const EdgeCollectionOptions& options = {});

// Vertices from sub-reconstructions (first cluster wins, in cluster order),
// priors elsewhere.
PoseGraph MakePoseGraph(const std::vector<SubReconstruction>& subs,
                        const std::vector<Pose>& camera_priors,
                        std::vector<RelativeEdge> edges, const PgoWeights& weights);

// d(^jT_i, measurement) with ^jT_i = T_j T_i^-1.
Vector6d RelativeEdgeResidual(const Pose& ti, const Pose& tj, const Pose& measurement,
                              Matrix6d* jacobian_i = nullptr,
                              Matrix6d* jacobian_j = nullptr);

// d(^iT_{i-1}, ^{i+1}T_i): constant-velocity prior around vertex i.
Vector6d SmoothResidual(const Pose& prev, const Pose& cur, const Pose& next,
                        Matrix6d* jacobian_prev = nullptr, Matrix6d* jacobian_cur = nullptr,
                        Matrix6d* jacobian_next = nullptr);

struct PgoTermCosts {
  double relative = 0.0;
  double absolute = 0.0;
  double smooth = 0.0;
  double Total() const { return relative + absolute + smooth; }
};

// Weighted sum of squared residuals per term family.
PgoTermCosts PoseGraphCost(const PoseGraph& graph);

struct PgoReport {
  PgoTermCosts initial;
  PgoTermCosts final;
  optim::SolverSummary summary;
};

class PoseGraphProblem : public optim::NonlinearProblem {
 public:
  explicit PoseGraphProblem(PoseGraph& graph);

  const optim::BlockLayout& Layout() const override { return layout_; }
  double Evaluate(optim::NormalEquations* normal_equations) override;
  void Step(const Eigen::VectorXd& delta) override;
  void SaveState() override { saved_ = graph_.vertices; }
  void RestoreState() override { graph_.vertices = saved_; }

 private:
  PoseGraph& graph_;
  optim::BlockLayout layout_;
  std::vector<ImageId> isolated_;
  std::vector<Pose> saved_;
};

PgoReport OptimizePoseGraph(PoseGraph& graph, const optim::SolverOptions& options = {});

// Plain-text exchange format:
//   WEIGHTS rel abs smooth
//   VERTEX id qw qx qy qz tx ty tz
//   PRIOR  id qw qx qy qz tx ty tz
//   EDGE   i j qw qx qy qz tx ty tz shared weight
void WritePoseGraph(std::ostream& out, const PoseGraph& graph);
PoseGraph ReadPoseGraph(std::istream& in);

}  // namespace navsfm
