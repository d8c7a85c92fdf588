#pragma once

#include <vector>

#include <Eigen/Core>

#include "navsfm/geom/pose.h"

namespace navsfm {

// Relative motion x2 = R x1 + t between two calibrated views; the essential
// matrix E = [t]x R satisfies f2^T E f1 = 0 for unit rays f1, f2.
struct RelativeMotion {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::UnitX();  // unit norm
};

Eigen::Matrix3d EssentialFromMotion(const Eigen::Matrix3d& rotation,
                                    const Eigen::Vector3d& translation);

// Five-point minimal solver (Groebner basis / action matrix). Returns up to
// ten real solutions. Rays need not be normalized.
std::vector<Eigen::Matrix3d> EssentialFivePoint(
    const std::vector<Eigen::Vector3d>& rays1,
    const std::vector<Eigen::Vector3d>& rays2);

// The four (R, t) factorizations of E.
std::vector<RelativeMotion> DecomposeEssential(const Eigen::Matrix3d& E);

// Depths of the two-ray midpoint triangulation; false when the rays are
// (near) parallel.
bool RayDepths(const RelativeMotion& motion, const Eigen::Vector3d& ray1,
               const Eigen::Vector3d& ray2, double* depth1, double* depth2);

// Chooses the factorization with the most correspondences in front of both
// cameras. Returns the count through num_in_front.
RelativeMotion SelectMotionByCheirality(const Eigen::Matrix3d& E,
                                        const std::vector<Eigen::Vector3d>& rays1,
                                        const std::vector<Eigen::Vector3d>& rays2,
                                        int* num_in_front = nullptr);

// Angular distance (rad) of a ray pair to the epipolar constraint: the
// larger of the two ray-to-epipolar-plane angles.
double EpipolarAngularError(const Eigen::Matrix3d& E, const Eigen::Vector3d& ray1,
                            const Eigen::Vector3d& ray2);

}  // namespace navsfm
