#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "navsfm/sim/survey_sim.h"
#include "navsfm/viewgraph/view_graph.h"
#include "oracles.h"

namespace navsfm {
namespace {

using testing::ExhaustiveBestCut;
using testing::TwoCommunities;

Pose PriorAt(double north, double east) {
  return Pose::FromCenter(Eigen::Quaterniond::Identity(), Eigen::Vector3d(north, east, 42.0));
}

TEST(SelectPairs, ExcludesDistantImages) {
  const auto pairs = SelectPairs({PriorAt(0, 0), PriorAt(100, 0)}, 20.0, 10);
  EXPECT_TRUE(pairs.empty());
  const auto near = SelectPairs({PriorAt(0, 0), PriorAt(10, 0)}, 20.0, 10);
  ASSERT_EQ(near.size(), 1u);
  EXPECT_EQ(near[0], ImagePair(0, 1));
}

TEST(SelectPairs, LawnmowerCrossTrackNeighbors) {
  // 4 tracks, 5 m apart, 2 m along-track interval.
  std::vector<Pose> priors;
  std::vector<int> track;
  for (int t = 0; t < 4; ++t) {
    for (int k = 0; k < 20; ++k) {
      priors.push_back(PriorAt(2.0 * k, 5.0 * t));
      track.push_back(t);
    }
  }
  const auto pairs = SelectPairs(priors, 12.0, 1000);
  const std::set<ImagePair> got(pairs.begin(), pairs.end());
  // Enumeration: every image must pair with each adjacent-track image within
  // the radius; the nearest cross-track neighbour is 5 m away.
  for (size_t i = 0; i < priors.size(); ++i) {
    int cross = 0;
    for (size_t j = 0; j < priors.size(); ++j) {
      if (std::abs(track[i] - track[j]) != 1) continue;
      const double d = (priors[i].Center() - priors[j].Center()).norm();
      if (d <= 12.0) {
        EXPECT_TRUE(got.count({std::min<int>(i, j), std::max<int>(i, j)})) << i << "," << j;
        ++cross;
      }
    }
    EXPECT_GE(cross, 1);
  }
}

TEST(SelectPairs, EqualsBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 60.0);
  for (const int cap : {0, 3, 8}) {
    std::vector<Pose> priors;
    for (int i = 0; i < 200; ++i) priors.push_back(PriorAt(u(rng), u(rng)));
    const double radius = 7.5;
    std::set<ImagePair> oracle;
    for (int i = 0; i < 200; ++i) {
      std::vector<std::pair<double, int>> near;
      for (int j = 0; j < 200; ++j) {
        if (j == i) continue;
        const double d2 = (priors[i].Center() - priors[j].Center()).squaredNorm();
        if (d2 <= radius * radius) near.emplace_back(d2, j);
      }
      std::sort(near.begin(), near.end());
      if (cap > 0 && static_cast<int>(near.size()) > cap) near.resize(cap);
      for (const auto& [d2, j] : near) oracle.insert({std::min(i, j), std::max(i, j)});
    }
    const auto pairs = SelectPairs(priors, radius, cap);
    EXPECT_EQ(std::set<ImagePair>(pairs.begin(), pairs.end()), oracle) << cap;
    for (const auto& [a, b] : pairs) EXPECT_LT(a, b);
  }
}

struct SimPair {
  sim::SurveyTruth truth;
  sim::SimulatedMatches matches;
};

SimPair MakeSim(const sim::NoiseModel& noise, uint64_t seed) {
  sim::SurveyConfig cfg;
  cfg.num_tracks = 2;
  cfg.track_length = 30.0;
  cfg.cross_track = false;
  cfg.seed = seed;
  SimPair s{sim::GenerateSurvey(cfg), {}};
  s.matches = sim::RenderObservations(s.truth, noise, seed);
  return s;
}

TEST(VerifyTwoView, NoiselessPairRecoversRotation) {
  const SimPair s = MakeSim(sim::NoiseModel{}, 1);
  int checked = 0;
  for (const auto& pair : s.matches.matches.pairs) {
    if (pair.matches.size() < 30) continue;
    const auto r = VerifyTwoView(pair, s.truth.camera, TwoViewOptions{}, 1);
    ASSERT_TRUE(r.ok()) << ToString(r.status);
    EXPECT_EQ(r.edge.num_matches, static_cast<int>(pair.matches.size()));
    const Pose rel = Relative(s.truth.camera_poses[pair.image2],
                              s.truth.camera_poses[pair.image1]);
    const Eigen::Matrix3d dr = r.edge.two_view.rotation * rel.RotationMatrix().transpose();
    const double angle = Eigen::AngleAxisd(dr).angle();
    EXPECT_LT(angle, 1e-6);
    EXPECT_LT((r.edge.two_view.translation - rel.translation().normalized()).norm(), 1e-6);
    EXPECT_NEAR(r.edge.two_view.translation.norm(), 1.0, 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(VerifyTwoView, RejectsFourMatches) {
  const SimPair s = MakeSim(sim::NoiseModel{}, 2);
  PairMatches pair = s.matches.matches.pairs.front();
  pair.matches.resize(4);
  const auto r = VerifyTwoView(pair, s.truth.camera, TwoViewOptions{}, 1);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.status, TwoViewStatus::kTooFewMatches);
}

TEST(VerifyTwoView, RejectsBelowMinInliers) {
  const SimPair s = MakeSim(sim::NoiseModel{}, 2);
  PairMatches pair = s.matches.matches.pairs.front();
  pair.matches.resize(10);
  const auto r = VerifyTwoView(pair, s.truth.camera, TwoViewOptions{}, 1);
  EXPECT_EQ(r.status, TwoViewStatus::kTooFewInliers);
}

TEST(VerifyTwoView, PlantedOutliersRecovered) {
  sim::NoiseModel noise;
  noise.outlier_fraction = 0.3;
  noise.pixel_sigma = 0.5;
  int trials = 0;
  long agree = 0, total = 0;
  for (uint64_t seed = 1; trials < 100; ++seed) {
    const SimPair s = MakeSim(noise, seed);
    for (size_t p = 0; p < s.matches.matches.pairs.size() && trials < 100; p += 7) {
      const auto& pair = s.matches.matches.pairs[p];
      if (pair.matches.size() < 40) continue;
      const auto r = VerifyTwoView(pair, s.truth.camera, TwoViewOptions{}, seed);
      int a = 0;
      for (size_t k = 0; k < pair.matches.size(); ++k) {
        a += r.inlier_mask[k] == s.matches.inlier[p][k];
      }
      // A single wrong model would misclassify a large block.
      EXPECT_GE(static_cast<double>(a) / pair.matches.size(), 0.9) << "seed " << seed;
      agree += a;
      total += pair.matches.size();
      ++trials;
    }
  }
  EXPECT_GE(static_cast<double>(agree) / total, 0.99);
}

TEST(ViewGraph, EdgesAreSymmetric) {
  ViewGraph g(4);
  ViewGraphEdge e;
  e.image1 = 2;
  e.image2 = 1;
  e.num_matches = 5;
  e.two_view.rotation = AxisAngle(Eigen::Vector3d::UnitZ(), 0.3).toRotationMatrix();
  e.two_view.translation = Eigen::Vector3d(1, 0, 0);
  g.AddEdge(e);
  ASSERT_NE(g.Find(1, 2), nullptr);
  EXPECT_EQ(g.Find(1, 2), g.Find(2, 1));
  EXPECT_EQ(g.Find(1, 2)->image1, 1);
  // Stored direction inverted consistently: x1 = R^T x2 - R^T t.
  EXPECT_LT((g.Find(1, 2)->two_view.rotation - e.two_view.rotation.transpose()).norm(), 1e-15);
  EXPECT_EQ(g.NumEdges(), 1);
  g.AddEdge(e);
  EXPECT_EQ(g.NumEdges(), 1);
  EXPECT_EQ(g.Neighbors(1), std::vector<ImageId>{2});
}

TEST(BuildViewGraph, IndependentOfThreadCount) {
  sim::NoiseModel noise;
  noise.outlier_fraction = 0.2;
  noise.pixel_sigma = 0.5;
  const SimPair s = MakeSim(noise, 4);
  const auto priors = sim::CorruptNavigation(s.truth, noise, 4);
  const SurveyInput input = sim::MakeSurveyInput(s.truth, priors, s.matches);
  ViewGraphOptions options;
  options.num_threads = 1;
  const ViewGraph a = BuildViewGraph(input, options);
  options.num_threads = 4;
  const ViewGraph b = BuildViewGraph(input, options);
  ASSERT_EQ(a.NumEdges(), b.NumEdges());
  ASSERT_GT(a.NumEdges(), 50);
  for (int k = 0; k < a.NumEdges(); ++k) {
    EXPECT_EQ(a.Edges()[k].inliers, b.Edges()[k].inliers);
    EXPECT_EQ(a.Edges()[k].two_view.rotation, b.Edges()[k].two_view.rotation);
  }
}

// --- partitioning -----------------------------------------------------------

ViewGraph GraphFromWeights(const Eigen::MatrixXd& w) {
  ViewGraph g(static_cast<int>(w.rows()));
  for (int i = 0; i < w.rows(); ++i)
    for (int j = i + 1; j < w.cols(); ++j) {
      if (w(i, j) <= 0) continue;
      ViewGraphEdge e;
      e.image1 = i;
      e.image2 = j;
      e.num_matches = static_cast<int>(w(i, j));
      g.AddEdge(e);
    }
  return g;
}

TEST(NormalizedCut, SeparatesAtWeakEdgeLikeExhaustiveOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> size(3, 6);
    const int n1 = size(rng), n2 = size(rng);
    const Eigen::MatrixXd w = TwoCommunities(rng, n1, n2, 5.0);
    std::vector<int> oracle_side;
    const double oracle = ExhaustiveBestCut(w, &oracle_side);
    const std::vector<int> side = NormalizedCutBisection(w);
    EXPECT_NEAR(NormalizedCutObjective(w, side), oracle, 1e-9) << trial;
    for (int i = 0; i < n1 + n2; ++i) EXPECT_EQ(side[i], i < n1 ? 0 : 1) << trial;
  }
}

TEST(NormalizedCut, MatchesExhaustiveOnSmallGraphs) {
  // Random connected graphs with community structure of varying strength.
  std::mt19937_64 rng(12);
  int equal = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    std::uniform_int_distribution<int> size(2, 6);
    std::uniform_real_distribution<double> bridge(1.0, 60.0);
    const Eigen::MatrixXd w = TwoCommunities(rng, size(rng), size(rng), bridge(rng));
    const double oracle = ExhaustiveBestCut(w, nullptr);
    const double got = NormalizedCutObjective(w, NormalizedCutBisection(w));
    EXPECT_GE(got, oracle - 1e-12);
    equal += std::abs(got - oracle) <= 1e-9;
  }
  EXPECT_EQ(equal, trials);
}

TEST(NormalizedCut, BeatsRandomCuts) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 12;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (u(rng) < 0.4 || j == i + 1) w(i, j) = w(j, i) = std::floor(1 + 100 * u(rng));
    const double got = NormalizedCutObjective(w, NormalizedCutBisection(w));
    std::bernoulli_distribution coin(0.5);
    for (int r = 0; r < 1000; ++r) {
      std::vector<int> side(n);
      for (int& s : side) s = coin(rng);
      EXPECT_LE(got, NormalizedCutObjective(w, side) + 1e-12);
    }
  }
}

TEST(Partition, SmallGraphIsSingleCluster) {
  std::mt19937_64 rng(14);
  const ViewGraph g = GraphFromWeights(TwoCommunities(rng, 10, 10, 3));
  const auto clusters = Partition(g, {150, 0.2});
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].members.size(), 20u);
  EXPECT_TRUE(clusters[0].overlap.empty());
  EXPECT_TRUE(Partition(ViewGraph(5), {}).empty());
}

TEST(Partition, CoverageSizeAndOverlap) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    // Random geometric graph, possibly disconnected, with isolated nodes.
    const int n = 60 + trial * 4;
    std::vector<Eigen::Vector2d> p(n);
    for (auto& x : p) x = Eigen::Vector2d(100 * u(rng), 30 * u(rng));
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((p[i] - p[j]).norm() < 8) w(i, j) = w(j, i) = std::floor(20 + 200 * u(rng));
    const ViewGraph g = GraphFromWeights(w);
    const PartitionOptions options{20, 0.2};
    const auto clusters = Partition(g, options);
    std::set<ImageId> covered;
    for (const auto& c : clusters) {
      ASSERT_FALSE(c.members.empty());
      EXPECT_TRUE(std::is_sorted(c.members.begin(), c.members.end()));
      EXPECT_LE(c.members.size(), 20u + 4u);  // target plus ceil(0.2 * 20)
      for (const ImageId i : c.overlap) EXPECT_TRUE(c.Contains(i));
      covered.insert(c.members.begin(), c.members.end());
    }
    const auto adj = g.Adjacency();
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(covered.count(i) > 0, i < static_cast<int>(adj.size()) && !adj[i].empty())
          << "trial " << trial << " image " << i;
    }
    // Deterministic.
    const auto again = Partition(g, options);
    ASSERT_EQ(again.size(), clusters.size());
    for (size_t k = 0; k < clusters.size(); ++k) {
      EXPECT_EQ(again[k].members, clusters[k].members);
    }
  }
}

TEST(Partition, SmallComponentsPassThrough) {
  std::mt19937_64 rng(16);
  // Component A: 30 nodes (split), component B: 8 nodes (kept whole).
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(38, 38);
  w.topLeftCorner(30, 30) = TwoCommunities(rng, 15, 15, 2);
  w.bottomRightCorner(8, 8) = TwoCommunities(rng, 4, 4, 50);
  const auto clusters = Partition(GraphFromWeights(w), {20, 0.0});
  ASSERT_EQ(clusters.size(), 3u);
  std::vector<ImageId> b;
  for (int i = 30; i < 38; ++i) b.push_back(i);
  bool found = false;
  for (const auto& c : clusters) found |= c.members == b;
  EXPECT_TRUE(found);
}

}  // namespace
}  // namespace navsfm
