#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "navsfm/geom/absolute_pose.h"
#include "navsfm/geom/essential.h"
#include "test_util.h"

namespace navsfm {
namespace {

using testing::RandomPose;
using testing::RandomVector;

// Random scene in front of both cameras: x2 = R x1 + t.
struct TwoViewScene {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
  std::vector<Eigen::Vector3d> rays1, rays2;
};

TwoViewScene MakeTwoView(std::mt19937_64& rng, int n) {
  TwoViewScene s;
  std::normal_distribution<double> g(0.0, 1.0);
  s.rotation = AxisAngle(RandomVector(rng).normalized(), 0.3 * g(rng)).toRotationMatrix();
  s.translation = RandomVector(rng).normalized();
  while (static_cast<int>(s.rays1.size()) < n) {
    const Eigen::Vector3d x1 = Eigen::Vector3d(g(rng), g(rng), 4.0 + g(rng));
    const Eigen::Vector3d x2 = s.rotation * x1 + s.translation;
    if (x1.z() < 0.5 || x2.z() < 0.5) continue;
    s.rays1.push_back(x1.normalized());
    s.rays2.push_back(x2.normalized());
  }
  return s;
}

TEST(EssentialFivePoint, RecoversTrueMotionAmongSolutions) {
  std::mt19937_64 rng(1);
  int found = 0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    const TwoViewScene s = MakeTwoView(rng, 5);
    const auto sols = EssentialFivePoint(s.rays1, s.rays2);
    ASSERT_LE(sols.size(), 10u);
    Eigen::Matrix3d truth = EssentialFromMotion(s.rotation, s.translation);
    truth /= truth.norm();
    double best = 1e9;
    for (const auto& e : sols) {
      // Every returned matrix satisfies the five constraints and the
      // essential-matrix identities.
      for (int i = 0; i < 5; ++i) {
        EXPECT_LT(std::abs(s.rays2[i].dot(e * s.rays1[i])), 1e-8);
      }
      EXPECT_LT(std::abs(e.determinant()), 1e-8);
      best = std::min({best, (e - truth).norm(), (e + truth).norm()});
    }
    found += best < 1e-6;
  }
  // Ill-conditioned random draws may lose precision; require near-certainty.
  EXPECT_GE(found, trials * 99 / 100);
}

TEST(EssentialFivePoint, RejectsTooFewRays) {
  std::mt19937_64 rng(2);
  const TwoViewScene s = MakeTwoView(rng, 4);
  EXPECT_TRUE(EssentialFivePoint(s.rays1, s.rays2).empty());
}

TEST(DecomposeEssential, CheiralitySelectsTrueMotion) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const TwoViewScene s = MakeTwoView(rng, 20);
    const Eigen::Matrix3d e = EssentialFromMotion(s.rotation, s.translation);
    int in_front = 0;
    const RelativeMotion m = SelectMotionByCheirality(e, s.rays1, s.rays2, &in_front);
    EXPECT_EQ(in_front, 20);
    EXPECT_LT((m.rotation - s.rotation).norm(), 1e-9);
    EXPECT_LT((m.translation - s.translation).norm(), 1e-9);
    EXPECT_NEAR(m.translation.norm(), 1.0, 1e-12);
  }
}

TEST(EpipolarAngularError, ZeroOnConstraintAndGrowsWithOffset) {
  std::mt19937_64 rng(4);
  const TwoViewScene s = MakeTwoView(rng, 1);
  const Eigen::Matrix3d e = EssentialFromMotion(s.rotation, s.translation);
  EXPECT_LT(EpipolarAngularError(e, s.rays1[0], s.rays2[0]), 1e-12);
  // Rotate ray2 out of its epipolar plane by a known angle.
  const Eigen::Vector3d normal = (e * s.rays1[0]).normalized();
  const double angle = 0.01;
  const Eigen::Vector3d moved =
      AxisAngle(normal.cross(s.rays2[0]).normalized(), angle) * s.rays2[0];
  EXPECT_NEAR(EpipolarAngularError(e, s.rays1[0], moved), angle, 2e-3);
  EXPECT_GE(EpipolarAngularError(e, s.rays1[0], moved), angle - 1e-12);
}

TEST(SolveQuartic, KnownRoots) {
  // (x-1)(x+2)(x-3)(x-0.5) = x^4 - 2.5x^3 - 4x^2 + 8.5x - 3
  auto roots = SolveQuartic(1, -2.5, -4, 8.5, -3);
  std::sort(roots.begin(), roots.end());
  ASSERT_EQ(roots.size(), 4u);
  EXPECT_NEAR(roots[0], -2, 1e-12);
  EXPECT_NEAR(roots[1], 0.5, 1e-12);
  EXPECT_NEAR(roots[2], 1, 1e-12);
  EXPECT_NEAR(roots[3], 3, 1e-12);
  EXPECT_TRUE(SolveQuartic(1, 0, 2, 0, 1).empty());  // (x^2+1)^2
}

TEST(AlignPointSets, RecoversRigidTransform) {
  std::mt19937_64 rng(5);
  const Pose t = RandomPose(rng);
  std::vector<Eigen::Vector3d> src, dst;
  for (int i = 0; i < 10; ++i) {
    src.push_back(RandomVector(rng, 3.0));
    dst.push_back(t * src.back());
  }
  const Pose est = AlignPointSets(src, dst);
  EXPECT_LT((est.RotationMatrix() - t.RotationMatrix()).norm(), 1e-12);
  EXPECT_LT((est.translation() - t.translation()).norm(), 1e-12);
}

TEST(AbsolutePoseP3P, RecoversTruePoseAmongSolutions) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  int found = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const Pose truth = RandomPose(rng);
    std::vector<Eigen::Vector3d> rays, points;
    while (points.size() < 3) {
      const Eigen::Vector3d xc(g(rng), g(rng), 3.0 + std::abs(g(rng)));
      rays.push_back(xc.normalized());
      points.push_back(truth.Inverse() * xc);
    }
    const auto poses = AbsolutePoseP3P(rays, points);
    ASSERT_LE(poses.size(), 4u);
    double best = 1e9;
    for (const Pose& p : poses) {
      for (int i = 0; i < 3; ++i) {
        EXPECT_LT(((p * points[i]).normalized() - rays[i]).norm(), 1e-6);
      }
      best = std::min(best, (p.RotationMatrix() - truth.RotationMatrix()).norm() +
                                (p.translation() - truth.translation()).norm());
    }
    found += best < 1e-6;
  }
  EXPECT_GE(found, trials * 99 / 100);
}

TEST(RefineAbsolutePose, ConvergesFromPerturbation) {
  std::mt19937_64 rng(7);
  const CameraIntrinsics camera = testing::TestCamera();
  std::normal_distribution<double> g(0.0, 1.0);
  const Pose truth = RandomPose(rng);
  std::vector<Eigen::Vector2d> pixels;
  std::vector<Eigen::Vector3d> points;
  while (points.size() < 30) {
    const Eigen::Vector3d xc(g(rng), g(rng), 5.0 + g(rng));
    if (xc.z() < 1) continue;
    points.push_back(truth.Inverse() * xc);
    pixels.push_back(*ProjectCameraPoint(camera, xc));
  }
  Pose pose = truth.Retract((Vector6d() << 0.02, -0.01, 0.03, 0.1, -0.2, 0.1).finished());
  ASSERT_TRUE(RefineAbsolutePose(camera, pixels, points, &pose));
  EXPECT_LT((pose.Center() - truth.Center()).norm(), 1e-8);
  EXPECT_LT(RotationDistance(pose, truth), 1e-9);
}

}  // namespace
}  // namespace navsfm
