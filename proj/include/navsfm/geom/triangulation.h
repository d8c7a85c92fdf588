#pragma once

#include <span>
#include <string_view>

#include <Eigen/Core>

#include "navsfm/geom/camera.h"
#include "navsfm/geom/pose.h"

namespace navsfm {

struct TriangulationObservation {
  Pose pose;  // world-to-camera
  const CameraIntrinsics* camera = nullptr;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

enum class TriangulationStatus {
  kSuccess,
  kTooFewObservations,
  kDegenerateAngle,
  kBehindCamera,
  kLargeReprojectionError,
};

std::string_view ToString(TriangulationStatus status);

struct TriangulationOptions {
  double min_angle_deg = 1.0;
  int refine_iterations = 10;
  // Disabled when <= 0. Checked against the refined point.
  double max_reprojection_error = 0.0;
};

struct TriangulationResult {
  TriangulationStatus status = TriangulationStatus::kTooFewObservations;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  double max_angle_deg = 0.0;
  double max_reprojection_error = 0.0;

  bool ok() const { return status == TriangulationStatus::kSuccess; }
};

// Largest pairwise angle (degrees) between the world-frame viewing rays.
double MaxRayAngleDeg(std::span<const TriangulationObservation> observations);

// Linear (DLT on unit rays) solution, no gating.
Eigen::Vector3d TriangulateLinear(
    std::span<const TriangulationObservation> observations);

// Linear solution refined by Gauss-Newton on the reprojection error, gated by
// ray angle, cheirality and (optionally) reprojection error.
TriangulationResult TriangulatePoint(
    std::span<const TriangulationObservation> observations,
    const TriangulationOptions& options = {});

}  // namespace navsfm
