#include "navsfm/geom/pose.h"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace navsfm {

Pose::Pose(const Eigen::Quaterniond& rotation,
           const Eigen::Vector3d& translation)
    : rotation_(rotation.normalized()), translation_(translation) {}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : Pose(Eigen::Quaterniond(rotation), translation) {}

Pose Pose::FromMatrix(const Eigen::Matrix4d& matrix) {
  return Pose(Eigen::Matrix3d(matrix.topLeftCorner<3, 3>()),
              Eigen::Vector3d(matrix.topRightCorner<3, 1>()));
}

Pose Pose::FromCenter(const Eigen::Quaterniond& rotation,
                      const Eigen::Vector3d& center) {
  const Eigen::Quaterniond q = rotation.normalized();
  return Pose(q, -(q * center));
}

Eigen::Matrix4d Pose::ToMatrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = RotationMatrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Eigen::Vector3d Pose::Center() const {
  return -(rotation_.conjugate() * translation_);
}

Pose Pose::Inverse() const {
  const Eigen::Quaterniond inv = rotation_.conjugate();
  return Pose(inv, -(inv * translation_));
}

Pose Pose::Retract(const Vector6d& delta) const {
  return Pose(ExpQuaternion(delta.head<3>()) * rotation_,
              translation_ + delta.tail<3>());
}

bool Pose::operator==(const Pose& other) const {
  return rotation_.coeffs() == other.rotation_.coeffs() &&
         translation_ == other.translation_;
}

Pose Compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(),
              a.rotation() * b.translation() + a.translation());
}

Pose Relative(const Pose& a, const Pose& b, Matrix6d* jacobian_a,
              Matrix6d* jacobian_b) {
  const Eigen::Quaterniond rel_q = a.rotation() * b.rotation().conjugate();
  const Eigen::Vector3d rotated_tb = rel_q * b.translation();
  const Pose rel(rel_q, a.translation() - rotated_tb);
  if (jacobian_a != nullptr) {
    jacobian_a->setZero();
    jacobian_a->topLeftCorner<3, 3>().setIdentity();
    jacobian_a->bottomLeftCorner<3, 3>() = Skew(rotated_tb);
    jacobian_a->bottomRightCorner<3, 3>().setIdentity();
  }
  if (jacobian_b != nullptr) {
    const Eigen::Matrix3d rel_r = rel.RotationMatrix();
    jacobian_b->setZero();
    jacobian_b->topLeftCorner<3, 3>() = -rel_r;
    jacobian_b->bottomLeftCorner<3, 3>() = -rel_r * Skew(b.translation());
    jacobian_b->bottomRightCorner<3, 3>() = -rel_r;
  }
  return rel;
}

double RotationDistance(const Pose& a, const Pose& b) {
  return a.rotation().angularDistance(b.rotation());
}

Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Quaterniond ExpQuaternion(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  if (theta < 1e-12) {
    return Eigen::Quaterniond(1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z())
        .normalized();
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(theta, phi / theta));
}

Eigen::Quaterniond CanonicalQuaternion(const Eigen::Quaterniond& q) {
  if (q.w() < 0.0) {
    return Eigen::Quaterniond(-q.w(), -q.x(), -q.y(), -q.z());
  }
  return q;
}

Eigen::Quaterniond AxisAngle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized()));
}

Pose NavToCameraPrior(const Pose& nav_pose, const RigExtrinsics& rig) {
  return rig.camera_to_vehicle.Inverse() * nav_pose;
}

Pose CameraToNavPose(const Pose& camera_pose, const RigExtrinsics& rig) {
  return rig.camera_to_vehicle * camera_pose;
}

ResidualWeights ResidualWeights::Isotropic(double rotation_weight,
                                           double translation_weight) {
  ResidualWeights w;
  w.rotation = rotation_weight * Eigen::Matrix3d::Identity();
  w.translation = translation_weight * Eigen::Matrix3d::Identity();
  return w;
}

bool ResidualWeights::IsValid() const {
  for (const Eigen::Matrix3d* m : {&rotation, &translation}) {
    if (!m->allFinite() || (*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(*m);
    if (eig.eigenvalues().minCoeff() < -1e-12) return false;
  }
  return true;
}

Vector6d PoseResidual(const Pose& a, const Pose& b,
                      const ResidualWeights& weights, Matrix6d* jacobian_a,
                      Matrix6d* jacobian_b) {
  const bool need_jacobian = jacobian_a != nullptr || jacobian_b != nullptr;
  Matrix6d rel_ja, rel_jb;
  const Pose rel = Relative(a, b, need_jacobian ? &rel_ja : nullptr,
                            need_jacobian ? &rel_jb : nullptr);
  const Eigen::Quaterniond q = CanonicalQuaternion(rel.rotation());

  Vector6d residual;
  residual.head<3>() = weights.rotation * (2.0 * q.vec());
  residual.tail<3>() = weights.translation * rel.translation();

  if (need_jacobian) {
    // d(residual) / d(increment of the relative pose).
    Matrix6d d_rel = Matrix6d::Zero();
    d_rel.topLeftCorner<3, 3>() =
        weights.rotation *
        (q.w() * Eigen::Matrix3d::Identity() - Skew(q.vec()));
    d_rel.bottomRightCorner<3, 3>() = weights.translation;
    if (jacobian_a != nullptr) *jacobian_a = d_rel * rel_ja;
    if (jacobian_b != nullptr) *jacobian_b = d_rel * rel_jb;
  }
  return residual;
}

}  // namespace navsfm
