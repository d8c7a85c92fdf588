#pragma once

#include <vector>

#include "navsfm/geom/camera.h"
#include "navsfm/geom/pose.h"
#include "navsfm/optim/levenberg_marquardt.h"
#include "navsfm/scene.h"
#include "navsfm/sfm/reconstruction.h"

namespace navsfm {

struct PriorPenaltyConfig {
  ResidualWeights weights;
  // Soft-L1 width (px) on reprojection residuals; <= 0 disables robustness.
  double loss_width = 2.0;
};

struct BundleAdjustmentOptions {
  PriorPenaltyConfig prior;
  bool use_priors = true;
  bool refine_intrinsics = false;
  bool refine_rig = false;
  optim::SolverOptions solver;
};

struct BundleAdjustmentReport {
  optim::SolverSummary summary;
  double initial_cost = 0.0;  // reprojection + prior cost, unrobustified
  double final_cost = 0.0;
  int num_observations = 0;
};

// Residual of the prior term: d(T, G * N) where G = (^pT_c)^-1 and N is the
// navigation pose. Jacobians w.r.t. the increments of T and G.
Vector6d PriorResidual(const Pose& pose, const Pose& nav_prior,
                       const Pose& vehicle_to_camera,
                       const ResidualWeights& weights,
                       Matrix6d* jacobian_pose = nullptr,
                       Matrix6d* jacobian_rig = nullptr);

// Sum of squared reprojection errors plus squared prior residuals over all
// registered images, without robust loss.
double PriorAidedCost(const Reconstruction& recon,
                      const CameraIntrinsics& camera, const RigExtrinsics& rig,
                      const std::vector<Pose>& nav_priors,
                      const FeatureTable& features,
                      const ResidualWeights& weights, bool use_priors = true);

// Least-squares problem over registered poses, landmarks and optionally the
// intrinsics and rig offset. Operates in place on the referenced data.
class BundleAdjustmentProblem : public optim::NonlinearProblem {
 public:
  BundleAdjustmentProblem(Reconstruction& recon, CameraIntrinsics& camera,
                          RigExtrinsics& rig,
                          const std::vector<Pose>& nav_priors,
                          const FeatureTable& features,
                          const BundleAdjustmentOptions& options);

  const optim::BlockLayout& Layout() const override { return layout_; }
  double Evaluate(optim::NormalEquations* normal_equations) override;
  void Step(const Eigen::VectorXd& delta) override;
  void SaveState() override;
  void RestoreState() override;

  // Writes the refined rig back (it is optimized as its inverse).
  void Finalize();
  int NumObservations() const { return num_observations_; }

 private:
  Reconstruction& recon_;
  CameraIntrinsics& camera_;
  RigExtrinsics& rig_;
  const std::vector<Pose>& nav_priors_;
  const FeatureTable& features_;
  BundleAdjustmentOptions options_;

  optim::BlockLayout layout_;
  std::vector<ImageId> images_;
  std::vector<int> pose_block_;  // per entry of images_
  std::map<ImageId, int> image_index_;
  std::vector<int> point_block_;  // per landmark
  int intrinsics_block_ = -1;
  int rig_block_ = -1;
  Pose vehicle_to_camera_;
  int num_observations_ = 0;

  struct State {
    std::vector<Pose> poses;
    std::vector<Eigen::Vector3d> points;
    CameraIntrinsics camera;
    Pose vehicle_to_camera;
  } saved_;
};

BundleAdjustmentReport BundleAdjust(Reconstruction& recon,
                                    CameraIntrinsics& camera,
                                    RigExtrinsics& rig,
                                    const std::vector<Pose>& nav_priors,
                                    const FeatureTable& features,
                                    const BundleAdjustmentOptions& options);

}  // namespace navsfm
