#include "navsfm/geom/absolute_pose.h"

#include <cmath>

#include <Eigen/Dense>

namespace navsfm {

std::vector<double> SolveQuartic(double a4, double a3, double a2, double a1,
                                 double a0) {
  std::vector<double> roots;
  const double scale = std::max({std::abs(a4), std::abs(a3), std::abs(a2),
                                 std::abs(a1), std::abs(a0)});
  if (scale == 0.0) return roots;
  if (std::abs(a4) < 1e-14 * scale) return roots;  // treat as degenerate
  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  companion(0, 0) = -a3 / a4;
  companion(0, 1) = -a2 / a4;
  companion(0, 2) = -a1 / a4;
  companion(0, 3) = -a0 / a4;
  companion(1, 0) = companion(2, 1) = companion(3, 2) = 1.0;
  const Eigen::Vector4cd ev = companion.eigenvalues();
  for (int i = 0; i < 4; ++i) {
    if (std::abs(ev[i].imag()) > 1e-6 * std::max(1.0, std::abs(ev[i].real()))) {
      continue;
    }
    double x = ev[i].real();
    // Newton polish.
    for (int it = 0; it < 3; ++it) {
      const double f = (((a4 * x + a3) * x + a2) * x + a1) * x + a0;
      const double df = ((4 * a4 * x + 3 * a3) * x + 2 * a2) * x + a1;
      if (df == 0.0) break;
      x -= f / df;
    }
    roots.push_back(x);
  }
  return roots;
}

Pose AlignPointSets(const std::vector<Eigen::Vector3d>& src,
                    const std::vector<Eigen::Vector3d>& dst) {
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= src.size();
  cd /= dst.size();
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    h += (src[i] - cs) * (dst[i] - cd).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1 : 1;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  return Pose(r, cd - r * cs);
}

std::vector<Pose> AbsolutePoseP3P(const std::vector<Eigen::Vector3d>& rays,
                                  const std::vector<Eigen::Vector3d>& points) {
  std::vector<Pose> poses;
  if (rays.size() < 3 || points.size() < 3) return poses;
  const Eigen::Vector3d j1 = rays[0].normalized(), j2 = rays[1].normalized(),
                        j3 = rays[2].normalized();
  const Eigen::Vector3d &p1 = points[0], &p2 = points[1], &p3 = points[2];
  const double a2 = (p2 - p3).squaredNorm();
  const double b2 = (p1 - p3).squaredNorm();
  const double c2 = (p1 - p2).squaredNorm();
  if (a2 < 1e-12 || b2 < 1e-12 || c2 < 1e-12) return poses;
  const double ca = j2.dot(j3), cb = j1.dot(j3), cg = j1.dot(j2);

  const double p = (a2 - c2) / b2;
  const double q = (a2 + c2) / b2;
  const double A4 = (p - 1) * (p - 1) - 4 * c2 / b2 * ca * ca;
  const double A3 = 4 * (p * (1 - p) * cb - (1 - q) * ca * cg + 2 * c2 / b2 * ca * ca * cb);
  const double A2 = 2 * (p * p - 1 + 2 * p * p * cb * cb + 2 * ((b2 - c2) / b2) * ca * ca -
                         4 * q * ca * cb * cg + 2 * ((b2 - a2) / b2) * cg * cg);
  const double A1 = 4 * (-p * (1 + p) * cb + 2 * a2 / b2 * cg * cg * cb - (1 - q) * ca * cg);
  const double A0 = (1 + p) * (1 + p) - 4 * a2 / b2 * cg * cg;

  for (const double v : SolveQuartic(A4, A3, A2, A1, A0)) {
    const double denom = 2 * (cg - v * ca);
    if (std::abs(denom) < 1e-12) continue;
    const double u = ((-1 + p) * v * v - 2 * p * cb * v + 1 + p) / denom;
    const double s1_sq = b2 / (1 + v * v - 2 * v * cb);
    if (!(s1_sq > 0) || u <= 0 || v <= 0) continue;
    const double s1 = std::sqrt(s1_sq);
    const std::vector<Eigen::Vector3d> cam = {s1 * j1, u * s1 * j2, v * s1 * j3};
    const Pose pose = AlignPointSets({p1, p2, p3}, cam);
    // Near-double roots of the quartic can yield triangles that do not match
    // the world distances; reject them by the alignment residual.
    const double residual = std::max({(pose * p1 - cam[0]).norm(),
                                      (pose * p2 - cam[1]).norm(),
                                      (pose * p3 - cam[2]).norm()});
    if (residual > 1e-6 * std::sqrt(b2)) continue;
    poses.push_back(pose);
  }
  return poses;
}

bool RefineAbsolutePose(const CameraIntrinsics& camera,
                        const std::vector<Eigen::Vector2d>& pixels,
                        const std::vector<Eigen::Vector3d>& points, Pose* pose,
                        int max_iterations) {
  double lambda = 1e-6;
  auto cost_of = [&](const Pose& t) {
    double c = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      const auto px = Project(points[i], camera, t);
      if (!px) return std::numeric_limits<double>::infinity();
      c += (*px - pixels[i]).squaredNorm();
    }
    return c;
  };
  double cost = cost_of(*pose);
  if (!std::isfinite(cost)) return false;
  for (int it = 0; it < max_iterations; ++it) {
    Matrix6d h = Matrix6d::Zero();
    Vector6d g = Vector6d::Zero();
    Eigen::Matrix<double, 2, 6> j;
    for (size_t i = 0; i < points.size(); ++i) {
      const auto px = Project(points[i], camera, *pose, &j);
      const Eigen::Vector2d r = *px - pixels[i];
      h += j.transpose() * j;
      g += j.transpose() * r;
    }
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
    bool accepted = false;
    while (lambda < 1e10) {
      Matrix6d damped = h;
      damped.diagonal() += lambda * h.diagonal().cwiseMax(1e-9);
      const Vector6d delta = damped.ldlt().solve(-g);
      const Pose candidate = pose->Retract(delta);
      const double c = cost_of(candidate);
      if (c < cost) {
        const double decrease = cost - c;
        *pose = candidate;
        cost = c;
        lambda = std::max(1e-12, lambda * 0.1);
        accepted = true;
        if (decrease < 1e-14 * std::max(1.0, cost) || delta.norm() < 1e-14) {
          return true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }
  return true;
}

}  // namespace navsfm
