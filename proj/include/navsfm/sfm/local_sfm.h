#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "navsfm/geom/triangulation.h"
#include "navsfm/scene.h"
#include "navsfm/sfm/bundle_adjustment.h"
#include "navsfm/sfm/reconstruction.h"
#include "navsfm/sfm/tracks.h"
#include "navsfm/viewgraph/view_graph.h"

namespace navsfm {

struct LocalSfmOptions {
  double min_seed_baseline = 0.3;  // m, between camera priors
  int min_2d3d = 6;
  double max_reprojection_error = 4.0;  // px, registration and filtering
  int abs_pose_max_iterations = 1000;
  double abs_pose_confidence = 0.999;
  TriangulationOptions triangulation{.min_angle_deg = 1.0,
                                     .refine_iterations = 10,
                                     .max_reprojection_error = 4.0};
  BundleAdjustmentOptions ba = DefaultLocalBundleAdjustment();
  int ba_interval_min = 10;
  double ba_interval_fraction = 0.1;
  uint64_t seed = 1;

  static BundleAdjustmentOptions DefaultLocalBundleAdjustment();
};

// Everything the local stages read; owned by the caller.
struct SfmContext {
  const SurveyInput* input = nullptr;
  const FeatureTable* features = nullptr;
  std::vector<Pose> camera_priors;  // rig^-1 * nav

  static SfmContext Make(const SurveyInput& input, const FeatureTable& features);
};

enum class InitStatus { kSuccess, kSmallBaseline, kTooFewPoints };
std::string ToString(InitStatus status);

struct InitResult {
  InitStatus status = InitStatus::kTooFewPoints;
  Reconstruction recon;
  bool ok() const { return status == InitStatus::kSuccess; }
};

// Seeds a reconstruction from a verified edge: the first camera is fixed at
// its prior, the second at the two-view motion scaled by the prior baseline.
// Edge inliers are triangulated; landmark ids are the track ids when a track
// set is given, otherwise the inlier index.
InitResult InitializePair(const ViewGraphEdge& edge, const SfmContext& context,
                          const LocalSfmOptions& options,
                          const TrackSet* tracks = nullptr);

enum class RegisterStatus { kSuccess, kTooFewCorrespondences, kTooFewInliers };
std::string ToString(RegisterStatus status);

struct RegisterResult {
  RegisterStatus status = RegisterStatus::kTooFewCorrespondences;
  Pose pose;
  std::vector<bool> inlier_mask;
  int num_inliers = 0;
  bool ok() const { return status == RegisterStatus::kSuccess; }
};

// P3P RANSAC on undistorted rays followed by pose refinement on the inliers.
RegisterResult RegisterImage(const CameraIntrinsics& camera,
                             const std::vector<Eigen::Vector2d>& pixels,
                             const std::vector<Eigen::Vector3d>& points,
                             const LocalSfmOptions& options, uint64_t seed);

struct EdgeUpgrade {
  ImageId image1 = 0;
  ImageId image2 = 0;
  int num_shared_points = 0;
  Pose metric_relative;  // ^{image2}T_{image1}
};

struct ClusterResult {
  bool seeded = false;
  SubReconstruction sub;
  std::vector<EdgeUpgrade> upgrades;
  int num_bundle_adjustments = 0;
};

// Number of inlier matches of the edge whose two observations belong to the
// same landmark of the reconstruction.
int CountSharedPoints(const ViewGraphEdge& edge, const Reconstruction& recon);

// Incremental reconstruction of one cluster.
ClusterResult ReconstructCluster(const Cluster& cluster, const ViewGraph& graph,
                                 const SfmContext& context, const LocalSfmOptions& options);

}  // namespace navsfm
