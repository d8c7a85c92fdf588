#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace navsfm {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Rigid transform mapping points from a source frame into a target frame:
// x_target = R * x_source + t. Camera poses follow the world-to-camera
// convention, so Pose::Center() is the camera position in the world.
//
// Increments used by the solvers are 6-vectors [phi; dt] applied as
// R <- Exp(phi) * R, t <- t + dt (see Retract).
class Pose {
 public:
  Pose() = default;
  Pose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation);
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static Pose Identity() { return Pose(); }
  static Pose FromMatrix(const Eigen::Matrix4d& matrix);
  // Pose whose camera center is `center` and rotation is `rotation`.
  static Pose FromCenter(const Eigen::Quaterniond& rotation,
                         const Eigen::Vector3d& center);
  // Keeps the quaternion bit-for-bit (no renormalization); for restoring
  // serialized poses.
  static Pose FromStored(const Eigen::Quaterniond& rotation,
                         const Eigen::Vector3d& translation) {
    Pose p;
    p.rotation_ = rotation;
    p.translation_ = translation;
    return p;
  }

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix3d RotationMatrix() const { return rotation_.toRotationMatrix(); }
  Eigen::Matrix4d ToMatrix() const;
  Eigen::Vector3d Center() const;

  Pose Inverse() const;
  Pose Retract(const Vector6d& delta) const;

  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const {
    return rotation_ * point + translation_;
  }

  bool operator==(const Pose& other) const;

 private:
  Eigen::Quaterniond rotation_ = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

// Maps through b, then a.
Pose Compose(const Pose& a, const Pose& b);
inline Pose operator*(const Pose& a, const Pose& b) { return Compose(a, b); }

// a * b^-1, i.e. the transform from b's target frame into a's target frame.
// For camera poses this is ^aT_b. Optional Jacobians are w.r.t. the
// increments of a and b.
Pose Relative(const Pose& a, const Pose& b, Matrix6d* jacobian_a = nullptr,
              Matrix6d* jacobian_b = nullptr);

// Rotation angle between the two rotations (radians).
double RotationDistance(const Pose& a, const Pose& b);

Eigen::Matrix3d Skew(const Eigen::Vector3d& v);
Eigen::Quaterniond ExpQuaternion(const Eigen::Vector3d& phi);

// Quaternion with non-negative scalar part representing the same rotation.
Eigen::Quaterniond CanonicalQuaternion(const Eigen::Quaterniond& q);

// Rotation about the given axis by `angle` radians.
Eigen::Quaterniond AxisAngle(const Eigen::Vector3d& axis, double angle);

// Camera-to-vehicle offset ^pT_c: maps camera-frame points into the vehicle
// (prior) frame.
struct RigExtrinsics {
  Pose camera_to_vehicle;
};

// Camera-frame prior ^c'T_w = (^pT_c)^-1 * ^pT_w.
Pose NavToCameraPrior(const Pose& nav_pose, const RigExtrinsics& rig);

// Inverse of NavToCameraPrior: recovers the vehicle pose ^pT_w.
Pose CameraToNavPose(const Pose& camera_pose, const RigExtrinsics& rig);

struct ResidualWeights {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d translation = Eigen::Matrix3d::Identity();

  static ResidualWeights Identity() { return {}; }
  static ResidualWeights Isotropic(double rotation_weight,
                                   double translation_weight);
  bool IsValid() const;
};

// The 6-dimensional pose difference [W_r * 2 * vec(q); W_t * t] of
// Relative(a, b), with the quaternion sign fixed so that w >= 0.
Vector6d PoseResidual(const Pose& a, const Pose& b,
                      const ResidualWeights& weights,
                      Eigen::Matrix<double, 6, 6>* jacobian_a = nullptr,
                      Eigen::Matrix<double, 6, 6>* jacobian_b = nullptr);

}  // namespace navsfm
