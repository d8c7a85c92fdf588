#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>

#include "navsfm/geom/pose.h"

namespace navsfm {

// Equidistant fisheye camera: theta_d = theta * (1 + k1 theta^2 + k2 theta^4
// + k3 theta^6 + k4 theta^8), with theta the angle between the ray and the
// optical axis, followed by the pinhole-style pixel mapping.
struct CameraIntrinsics {
  static constexpr int kNumParams = 8;  // fx, fy, cx, cy, k1..k4

  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  std::array<double, 4> k = {0.0, 0.0, 0.0, 0.0};
  int width = 0;
  int height = 0;

  bool IsValid() const;
  bool InImage(const Eigen::Vector2d& pixel, double margin = 0.0) const;

  Eigen::Matrix<double, kNumParams, 1> Params() const;
  void SetParams(const Eigen::Matrix<double, kNumParams, 1>& params);

  // Focal length chosen so that the half-width of the image spans half of
  // `horizontal_fov_deg`, zero distortion, principal point at the center.
  static CameraIntrinsics FromFov(int width, int height,
                                  double horizontal_fov_deg);

  bool operator==(const CameraIntrinsics&) const = default;
};

using ProjectionPointJacobian = Eigen::Matrix<double, 2, 3>;
using ProjectionIntrinsicsJacobian =
    Eigen::Matrix<double, 2, CameraIntrinsics::kNumParams>;

// Projects a camera-frame point. Returns nullopt for points with z <= 0.
std::optional<Eigen::Vector2d> ProjectCameraPoint(
    const CameraIntrinsics& camera, const Eigen::Vector3d& point_camera,
    ProjectionPointJacobian* jacobian_point = nullptr,
    ProjectionIntrinsicsJacobian* jacobian_intrinsics = nullptr);

// Projects a world point through the world-to-camera pose. The pose Jacobian
// is w.r.t. the [phi; dt] increment of Pose::Retract.
std::optional<Eigen::Vector2d> Project(
    const Eigen::Vector3d& point_world, const CameraIntrinsics& camera,
    const Pose& pose, Eigen::Matrix<double, 2, 6>* jacobian_pose = nullptr,
    ProjectionPointJacobian* jacobian_point = nullptr,
    ProjectionIntrinsicsJacobian* jacobian_intrinsics = nullptr);

// Unit-norm camera-frame ray through the pixel (Newton inversion of the
// distortion polynomial).
Eigen::Vector3d Unproject(const CameraIntrinsics& camera,
                          const Eigen::Vector2d& pixel);

}  // namespace navsfm
