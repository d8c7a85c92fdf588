#pragma once

#include <vector>

#include <Eigen/Core>

#include "navsfm/geom/camera.h"
#include "navsfm/geom/pose.h"

namespace navsfm {

// Grunert's three-point absolute pose. Rays are bearing vectors in the
// camera frame; returns up to four world-to-camera poses.
std::vector<Pose> AbsolutePoseP3P(const std::vector<Eigen::Vector3d>& rays,
                                  const std::vector<Eigen::Vector3d>& points);

// Least-squares rigid transform with dst ~= R * src + t (Kabsch).
Pose AlignPointSets(const std::vector<Eigen::Vector3d>& src,
                    const std::vector<Eigen::Vector3d>& dst);

// Real roots of a4 x^4 + a3 x^3 + a2 x^2 + a1 x + a0.
std::vector<double> SolveQuartic(double a4, double a3, double a2, double a1,
                                 double a0);

// Damped Gauss-Newton refinement of a pose on squared pixel error over
// 2D-3D correspondences. Returns false if a point projects behind the camera.
bool RefineAbsolutePose(const CameraIntrinsics& camera,
                        const std::vector<Eigen::Vector2d>& pixels,
                        const std::vector<Eigen::Vector3d>& points, Pose* pose,
                        int max_iterations = 20);

}  // namespace navsfm
