#include "navsfm/geom/camera.h"

#include <cmath>
#include <numbers>

namespace navsfm {
namespace {

constexpr double kSmallRadius = 1e-9;

}  // namespace

bool CameraIntrinsics::IsValid() const {
  return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
         cx < width && cy >= 0.0 && cy < height && std::isfinite(k[0]) &&
         std::isfinite(k[1]) && std::isfinite(k[2]) && std::isfinite(k[3]);
}

bool CameraIntrinsics::InImage(const Eigen::Vector2d& pixel,
                               double margin) const {
  return pixel.x() >= margin && pixel.y() >= margin &&
         pixel.x() <= width - margin && pixel.y() <= height - margin;
}

Eigen::Matrix<double, CameraIntrinsics::kNumParams, 1>
CameraIntrinsics::Params() const {
  Eigen::Matrix<double, kNumParams, 1> p;
  p << fx, fy, cx, cy, k[0], k[1], k[2], k[3];
  return p;
}

void CameraIntrinsics::SetParams(
    const Eigen::Matrix<double, kNumParams, 1>& params) {
  fx = params[0];
  fy = params[1];
  cx = params[2];
  cy = params[3];
  for (int i = 0; i < 4; ++i) k[i] = params[4 + i];
}

CameraIntrinsics CameraIntrinsics::FromFov(int width, int height,
                                           double horizontal_fov_deg) {
  CameraIntrinsics c;
  const double half_fov = 0.5 * horizontal_fov_deg * std::numbers::pi / 180.0;
  c.fx = c.fy = 0.5 * width / half_fov;
  c.cx = 0.5 * width;
  c.cy = 0.5 * height;
  c.width = width;
  c.height = height;
  return c;
}

std::optional<Eigen::Vector2d> ProjectCameraPoint(
    const CameraIntrinsics& camera, const Eigen::Vector3d& p,
    ProjectionPointJacobian* jacobian_point,
    ProjectionIntrinsicsJacobian* jacobian_intrinsics) {
  if (!(p.z() > 0.0)) return std::nullopt;

  const double r2 = p.x() * p.x() + p.y() * p.y();
  const double r = std::sqrt(r2);
  const double theta = std::atan2(r, p.z());
  const double t2 = theta * theta;
  const auto& k = camera.k;
  const double poly = 1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3])));
  const double dpoly =
      1.0 + t2 * (3.0 * k[0] + t2 * (5.0 * k[1] + t2 * (7.0 * k[2] + t2 * 9.0 * k[3])));
  const double theta_d = theta * poly;

  const bool near_axis = r < kSmallRadius * p.z();
  // theta / r and theta_d / r, with their on-axis limits.
  const double theta_over_r = near_axis ? 1.0 / p.z() : theta / r;
  const double a = theta_over_r * poly;

  const double mx = a * p.x();
  const double my = a * p.y();
  const Eigen::Vector2d pixel(camera.fx * mx + camera.cx,
                              camera.fy * my + camera.cy);

  if (jacobian_point != nullptr) {
    const double rho2 = r2 + p.z() * p.z();
    const double da_dz = -dpoly / rho2;
    double da_dr_over_r = 0.0;
    if (!near_axis) {
      da_dr_over_r = (dpoly * p.z() / rho2 * r - theta_d) / (r2 * r);
    }
    ProjectionPointJacobian dm;
    dm(0, 0) = a + p.x() * p.x() * da_dr_over_r;
    dm(0, 1) = p.x() * p.y() * da_dr_over_r;
    dm(0, 2) = p.x() * da_dz;
    dm(1, 0) = p.y() * p.x() * da_dr_over_r;
    dm(1, 1) = a + p.y() * p.y() * da_dr_over_r;
    dm(1, 2) = p.y() * da_dz;
    dm.row(0) *= camera.fx;
    dm.row(1) *= camera.fy;
    *jacobian_point = dm;
  }
  if (jacobian_intrinsics != nullptr) {
    auto& j = *jacobian_intrinsics;
    j.setZero();
    j(0, 0) = mx;
    j(1, 1) = my;
    j(0, 2) = 1.0;
    j(1, 3) = 1.0;
    double t_pow = t2;
    for (int i = 0; i < 4; ++i) {
      j(0, 4 + i) = camera.fx * p.x() * theta_over_r * t_pow;
      j(1, 4 + i) = camera.fy * p.y() * theta_over_r * t_pow;
      t_pow *= t2;
    }
  }
  return pixel;
}

std::optional<Eigen::Vector2d> Project(
    const Eigen::Vector3d& point_world, const CameraIntrinsics& camera,
    const Pose& pose, Eigen::Matrix<double, 2, 6>* jacobian_pose,
    ProjectionPointJacobian* jacobian_point,
    ProjectionIntrinsicsJacobian* jacobian_intrinsics) {
  const Eigen::Vector3d rotated = pose.rotation() * point_world;
  const Eigen::Vector3d p_cam = rotated + pose.translation();
  const bool need_point = jacobian_pose != nullptr || jacobian_point != nullptr;
  ProjectionPointJacobian d_cam;
  auto pixel = ProjectCameraPoint(camera, p_cam, need_point ? &d_cam : nullptr,
                                  jacobian_intrinsics);
  if (!pixel) return std::nullopt;
  if (jacobian_pose != nullptr) {
    // d p_cam / d phi = -[R X]_x, d p_cam / d dt = I.
    jacobian_pose->leftCols<3>() = -d_cam * Skew(rotated);
    jacobian_pose->rightCols<3>() = d_cam;
  }
  if (jacobian_point != nullptr) {
    *jacobian_point = d_cam * pose.RotationMatrix();
  }
  return pixel;
}

Eigen::Vector3d Unproject(const CameraIntrinsics& camera,
                          const Eigen::Vector2d& pixel) {
  const double mx = (pixel.x() - camera.cx) / camera.fx;
  const double my = (pixel.y() - camera.cy) / camera.fy;
  const double theta_d = std::hypot(mx, my);
  if (theta_d < 1e-15) return Eigen::Vector3d::UnitZ();

  const auto& k = camera.k;
  double theta = theta_d;
  for (int iter = 0; iter < 50; ++iter) {
    const double t2 = theta * theta;
    const double poly =
        1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3])));
    const double dpoly = 1.0 + t2 * (3.0 * k[0] +
                                     t2 * (5.0 * k[1] +
                                           t2 * (7.0 * k[2] + t2 * 9.0 * k[3])));
    const double step = (theta * poly - theta_d) / dpoly;
    theta -= step;
    if (std::abs(step) < 1e-15) break;
  }
  const double s = std::sin(theta) / theta_d;
  return Eigen::Vector3d(mx * s, my * s, std::cos(theta));
}

}  // namespace navsfm
