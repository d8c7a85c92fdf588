#include "navsfm/sfm/bundle_adjustment.h"

#include <cmath>

namespace navsfm {
namespace {

// Soft-L1: rho(s) = 2 b^2 (sqrt(1 + s / b^2) - 1), rho'(s) = 1/sqrt(1+s/b^2).
double SoftL1(double s, double width, double* derivative) {
  if (width <= 0.0) {
    if (derivative != nullptr) *derivative = 1.0;
    return s;
  }
  const double b2 = width * width;
  const double root = std::sqrt(1.0 + s / b2);
  if (derivative != nullptr) *derivative = 1.0 / root;
  return 2.0 * b2 * (root - 1.0);
}

}  // namespace

Vector6d PriorResidual(const Pose& pose, const Pose& nav_prior,
                       const Pose& vehicle_to_camera,
                       const ResidualWeights& weights, Matrix6d* jacobian_pose,
                       Matrix6d* jacobian_rig) {
  const Pose prior = vehicle_to_camera * nav_prior;
  Matrix6d j_prior;
  const Vector6d r = PoseResidual(pose, prior, weights, jacobian_pose,
                                  jacobian_rig != nullptr ? &j_prior : nullptr);
  if (jacobian_rig != nullptr) {
    // Increment of G maps to the prior increment [phi; -[R_G t_N]x phi + dt].
    Matrix6d d_prior = Matrix6d::Identity();
    d_prior.bottomLeftCorner<3, 3>() =
        -Skew(vehicle_to_camera.rotation() * nav_prior.translation());
    *jacobian_rig = j_prior * d_prior;
  }
  return r;
}

double PriorAidedCost(const Reconstruction& recon,
                      const CameraIntrinsics& camera, const RigExtrinsics& rig,
                      const std::vector<Pose>& nav_priors,
                      const FeatureTable& features,
                      const ResidualWeights& weights, bool use_priors) {
  double cost = 0.0;
  for (const auto& l : recon.landmarks) {
    for (const auto& e : l.track) {
      const auto it = recon.poses.find(e.image);
      if (it == recon.poses.end()) continue;
      const auto proj = Project(l.position, camera, it->second);
      if (!proj) continue;
      cost += (*proj - features.Pixel(e.image, e.feature)).squaredNorm();
    }
  }
  if (use_priors) {
    const Pose g = rig.camera_to_vehicle.Inverse();
    for (const auto& [image, pose] : recon.poses) {
      cost += PriorResidual(pose, nav_priors[image], g, weights).squaredNorm();
    }
  }
  return cost;
}

BundleAdjustmentProblem::BundleAdjustmentProblem(
    Reconstruction& recon, CameraIntrinsics& camera, RigExtrinsics& rig,
    const std::vector<Pose>& nav_priors, const FeatureTable& features,
    const BundleAdjustmentOptions& options)
    : recon_(recon),
      camera_(camera),
      rig_(rig),
      nav_priors_(nav_priors),
      features_(features),
      options_(options),
      vehicle_to_camera_(rig.camera_to_vehicle.Inverse()) {
  for (const auto& [image, pose] : recon_.poses) {
    image_index_[image] = static_cast<int>(images_.size());
    images_.push_back(image);
    pose_block_.push_back(layout_.AddBlock(6));
  }
  if (options_.refine_intrinsics) {
    intrinsics_block_ = layout_.AddBlock(CameraIntrinsics::kNumParams);
  }
  if (options_.refine_rig && options_.use_priors) {
    rig_block_ = layout_.AddBlock(6);
  }
  for (const auto& l : recon_.landmarks) {
    point_block_.push_back(layout_.AddBlock(3, /*eliminated=*/true));
    for (const auto& e : l.track) {
      if (recon_.poses.contains(e.image)) ++num_observations_;
    }
  }
}

double BundleAdjustmentProblem::Evaluate(optim::NormalEquations* normal) {
  double cost = 0.0;
  const bool linearize = normal != nullptr;
  std::vector<optim::JacobianBlock> jacobians;
  Eigen::Matrix<double, 2, 6> j_pose;
  ProjectionPointJacobian j_point;
  ProjectionIntrinsicsJacobian j_intr;

  for (size_t li = 0; li < recon_.landmarks.size(); ++li) {
    const Landmark& l = recon_.landmarks[li];
    for (const auto& e : l.track) {
      const auto idx = image_index_.find(e.image);
      if (idx == image_index_.end()) continue;
      const Pose& pose = recon_.poses.at(e.image);
      const auto proj =
          Project(l.position, camera_, pose, linearize ? &j_pose : nullptr,
                  linearize ? &j_point : nullptr,
                  linearize && intrinsics_block_ >= 0 ? &j_intr : nullptr);
      // Observations behind the camera are dropped for this evaluation.
      if (!proj) continue;
      const Eigen::Vector2d r = *proj - features_.Pixel(e.image, e.feature);
      double weight = 1.0;
      cost += 0.5 * SoftL1(r.squaredNorm(), options_.prior.loss_width, &weight);
      if (!linearize) continue;
      const double sw = std::sqrt(weight);
      jacobians.clear();
      jacobians.push_back({pose_block_[idx->second], sw * j_pose});
      jacobians.push_back({point_block_[li], sw * j_point});
      if (intrinsics_block_ >= 0) {
        jacobians.push_back({intrinsics_block_, sw * j_intr});
      }
      normal->AddResidual(sw * r, jacobians);
    }
  }

  if (options_.use_priors) {
    Matrix6d jp, jr;
    for (size_t i = 0; i < images_.size(); ++i) {
      const ImageId image = images_[i];
      const Vector6d r = PriorResidual(
          recon_.poses.at(image), nav_priors_[image], vehicle_to_camera_,
          options_.prior.weights, linearize ? &jp : nullptr,
          linearize && rig_block_ >= 0 ? &jr : nullptr);
      cost += 0.5 * r.squaredNorm();
      if (!linearize) continue;
      jacobians.clear();
      jacobians.push_back({pose_block_[i], jp});
      if (rig_block_ >= 0) jacobians.push_back({rig_block_, jr});
      normal->AddResidual(r, jacobians);
    }
  }
  return cost;
}

void BundleAdjustmentProblem::Step(const Eigen::VectorXd& delta) {
  for (size_t i = 0; i < images_.size(); ++i) {
    Pose& pose = recon_.poses.at(images_[i]);
    pose = pose.Retract(delta.segment<6>(layout_.Offset(pose_block_[i])));
  }
  for (size_t li = 0; li < recon_.landmarks.size(); ++li) {
    recon_.landmarks[li].position +=
        delta.segment<3>(layout_.Offset(point_block_[li]));
  }
  if (intrinsics_block_ >= 0) {
    camera_.SetParams(camera_.Params() +
                      delta.segment<CameraIntrinsics::kNumParams>(
                          layout_.Offset(intrinsics_block_)));
  }
  if (rig_block_ >= 0) {
    vehicle_to_camera_ = vehicle_to_camera_.Retract(
        delta.segment<6>(layout_.Offset(rig_block_)));
  }
}

void BundleAdjustmentProblem::SaveState() {
  saved_.poses.clear();
  for (const ImageId image : images_) saved_.poses.push_back(recon_.poses.at(image));
  saved_.points.clear();
  for (const auto& l : recon_.landmarks) saved_.points.push_back(l.position);
  saved_.camera = camera_;
  saved_.vehicle_to_camera = vehicle_to_camera_;
}

void BundleAdjustmentProblem::RestoreState() {
  for (size_t i = 0; i < images_.size(); ++i) {
    recon_.poses.at(images_[i]) = saved_.poses[i];
  }
  for (size_t li = 0; li < recon_.landmarks.size(); ++li) {
    recon_.landmarks[li].position = saved_.points[li];
  }
  camera_ = saved_.camera;
  vehicle_to_camera_ = saved_.vehicle_to_camera;
}

void BundleAdjustmentProblem::Finalize() {
  if (rig_block_ >= 0) rig_.camera_to_vehicle = vehicle_to_camera_.Inverse();
}

BundleAdjustmentReport BundleAdjust(Reconstruction& recon,
                                    CameraIntrinsics& camera,
                                    RigExtrinsics& rig,
                                    const std::vector<Pose>& nav_priors,
                                    const FeatureTable& features,
                                    const BundleAdjustmentOptions& options) {
  BundleAdjustmentReport report;
  report.initial_cost = PriorAidedCost(recon, camera, rig, nav_priors, features,
                                       options.prior.weights, options.use_priors);
  BundleAdjustmentProblem problem(recon, camera, rig, nav_priors, features,
                                  options);
  report.num_observations = problem.NumObservations();
  report.summary = optim::SolveLevenbergMarquardt(problem, options.solver);
  problem.Finalize();
  report.final_cost = PriorAidedCost(recon, camera, rig, nav_priors, features,
                                     options.prior.weights, options.use_priors);
  return report;
}

}  // namespace navsfm
