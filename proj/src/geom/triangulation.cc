#include "navsfm/geom/triangulation.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace navsfm {

std::string_view ToString(TriangulationStatus status) {
  switch (status) {
    case TriangulationStatus::kSuccess:
      return "success";
    case TriangulationStatus::kTooFewObservations:
      return "too_few_observations";
    case TriangulationStatus::kDegenerateAngle:
      return "degenerate_angle";
    case TriangulationStatus::kBehindCamera:
      return "behind_camera";
    case TriangulationStatus::kLargeReprojectionError:
      return "large_reprojection_error";
  }
  return "unknown";
}

double MaxRayAngleDeg(std::span<const TriangulationObservation> observations) {
  std::vector<Eigen::Vector3d> rays;
  rays.reserve(observations.size());
  for (const auto& obs : observations) {
    rays.push_back(obs.pose.rotation().conjugate() *
                   Unproject(*obs.camera, obs.pixel));
  }
  double min_cos = 1.0;
  for (size_t i = 0; i < rays.size(); ++i) {
    for (size_t j = i + 1; j < rays.size(); ++j) {
      min_cos = std::min(min_cos, rays[i].dot(rays[j]));
    }
  }
  return std::acos(std::clamp(min_cos, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

Eigen::Vector3d TriangulateLinear(
    std::span<const TriangulationObservation> observations) {
  // Each ray f constrains f x (R X + t) = 0; accumulate A^T A of the
  // homogeneous system for the point [X; 1].
  Eigen::Matrix4d ata = Eigen::Matrix4d::Zero();
  for (const auto& obs : observations) {
    const Eigen::Vector3d f = Unproject(*obs.camera, obs.pixel);
    Eigen::Matrix<double, 3, 4> proj;
    proj.leftCols<3>() = obs.pose.RotationMatrix();
    proj.col(3) = obs.pose.translation();
    const Eigen::Matrix<double, 3, 4> a = Skew(f) * proj;
    ata += a.transpose() * a;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(ata);
  const Eigen::Vector4d x = eig.eigenvectors().col(0);
  return x.head<3>() / x[3];
}

TriangulationResult TriangulatePoint(
    std::span<const TriangulationObservation> observations,
    const TriangulationOptions& options) {
  TriangulationResult result;
  if (observations.size() < 2) {
    result.status = TriangulationStatus::kTooFewObservations;
    return result;
  }
  result.max_angle_deg = MaxRayAngleDeg(observations);
  if (result.max_angle_deg < options.min_angle_deg) {
    result.status = TriangulationStatus::kDegenerateAngle;
    return result;
  }

  Eigen::Vector3d x = TriangulateLinear(observations);
  if (!x.allFinite()) {
    result.status = TriangulationStatus::kDegenerateAngle;
    return result;
  }

  auto evaluate = [&](const Eigen::Vector3d& point, Eigen::Matrix3d* h,
                      Eigen::Vector3d* g) -> std::optional<double> {
    double cost = 0.0;
    if (h != nullptr) h->setZero();
    if (g != nullptr) g->setZero();
    for (const auto& obs : observations) {
      ProjectionPointJacobian j;
      const auto proj = Project(point, *obs.camera, obs.pose, nullptr,
                                h != nullptr ? &j : nullptr);
      if (!proj) return std::nullopt;
      const Eigen::Vector2d r = *proj - obs.pixel;
      cost += r.squaredNorm();
      if (h != nullptr) {
        *h += j.transpose() * j;
        *g += j.transpose() * r;
      }
    }
    return cost;
  };

  auto cost = evaluate(x, nullptr, nullptr);
  if (!cost) {
    result.status = TriangulationStatus::kBehindCamera;
    return result;
  }
  for (int iter = 0; iter < options.refine_iterations; ++iter) {
    Eigen::Matrix3d h;
    Eigen::Vector3d g;
    evaluate(x, &h, &g);
    const Eigen::Vector3d step = h.ldlt().solve(-g);
    if (!step.allFinite()) break;
    const Eigen::Vector3d candidate = x + step;
    const auto new_cost = evaluate(candidate, nullptr, nullptr);
    if (!new_cost || *new_cost > *cost) break;
    x = candidate;
    const double decrease = *cost - *new_cost;
    cost = new_cost;
    if (step.norm() <= 1e-14 * (1.0 + x.norm()) || decrease <= 1e-16 * *cost) {
      break;
    }
  }

  double max_error = 0.0;
  for (const auto& obs : observations) {
    const auto proj = Project(x, *obs.camera, obs.pose);
    if (!proj) {
      result.status = TriangulationStatus::kBehindCamera;
      return result;
    }
    max_error = std::max(max_error, (*proj - obs.pixel).norm());
  }
  result.point = x;
  result.max_reprojection_error = max_error;
  if (options.max_reprojection_error > 0.0 &&
      max_error > options.max_reprojection_error) {
    result.status = TriangulationStatus::kLargeReprojectionError;
    return result;
  }
  result.status = TriangulationStatus::kSuccess;
  return result;
}

}  // namespace navsfm
