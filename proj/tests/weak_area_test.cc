#include <algorithm>
#include <queue>
#include <random>

#include <gtest/gtest.h>

#include "navsfm/sfm/weak_area.h"
#include "sim_fixture.h"

namespace navsfm {
namespace {

using testing::World;

ViewGraphEdge MakeEdge(ImageId a, ImageId b, int nm, int np = 0) {
  ViewGraphEdge e;
  e.image1 = a;
  e.image2 = b;
  e.num_matches = nm;
  e.num_shared_points = np;
  return e;
}

// Grid graph rows x cols, 4-connected, strong edges.
ViewGraph GridGraph(int rows, int cols) {
  ViewGraph g(rows * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) g.AddEdge(MakeEdge(v, v + 1, 200, 150));
      if (r + 1 < rows) g.AddEdge(MakeEdge(v, v + cols, 200, 150));
    }
  }
  return g;
}

SubReconstruction RegisterAll(int n) {
  SubReconstruction s;
  for (ImageId i = 0; i < n; ++i) s.recon.poses[i] = Pose();
  return s;
}

// Hop distances by plain BFS over the explicit edge list.
std::vector<int> BfsDistances(const ViewGraph& g, const std::vector<ImageId>& sources) {
  std::vector<int> dist(g.NumImages(), -1);
  std::queue<ImageId> q;
  for (const ImageId s : sources) {
    dist[s] = 0;
    q.push(s);
  }
  while (!q.empty()) {
    const ImageId v = q.front();
    q.pop();
    for (const auto& e : g.Edges()) {
      ImageId u = -1;
      if (e.image1 == v) u = e.image2;
      if (e.image2 == v) u = e.image1;
      if (u >= 0 && dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
    }
  }
  return dist;
}

TEST(IsWeakEdge, StrictThresholds) {
  WeakAreaOptions o;
  o.min_matches = 30;
  EXPECT_TRUE(IsWeakEdge(MakeEdge(0, 1, 100, 10), o));
  EXPECT_FALSE(IsWeakEdge(MakeEdge(0, 1, 100, 20), o));
  EXPECT_FALSE(IsWeakEdge(MakeEdge(0, 1, 25, 0), o));
  EXPECT_FALSE(IsWeakEdge(MakeEdge(0, 1, 30, 0), o));
  EXPECT_TRUE(IsWeakEdge(MakeEdge(0, 1, 31, 0), o));
}

TEST(WeakAreaOptions, Validation) {
  WeakAreaOptions o;
  EXPECT_NO_THROW(o.Validate(15));
  o.min_matches = 10;
  EXPECT_THROW(o.Validate(15), std::invalid_argument);
  o = {};
  o.weak_ratio = 1.0;
  EXPECT_THROW(o.Validate(), std::invalid_argument);
  o = {};
  o.max_rounds = -1;
  EXPECT_THROW(o.Validate(), std::invalid_argument);
}

TEST(DetectWeakAreas, ListsWeakPairsAndUnregisteredImages) {
  ViewGraph g = GridGraph(3, 4);
  g.Find(1, 2)->num_shared_points = 5;
  g.Find(5, 9)->num_shared_points = 0;
  g.Find(5, 9)->metric_relative = Pose();
  g.Find(0, 1)->metric_relative = Pose();
  SubReconstruction s = RegisterAll(12);
  s.recon.poses.erase(7);
  const WeakReport r = DetectWeakAreas(g, {s}, WeakAreaOptions{});
  EXPECT_EQ(r.weak_pairs, (std::vector<ImagePair>{{1, 2}, {5, 9}}));
  EXPECT_EQ(r.unregistered, (std::vector<ImageId>{7}));
  EXPECT_EQ(r.constraints_per_image[0], 1);
  EXPECT_EQ(r.constraints_per_image[1], 1);
  EXPECT_EQ(r.constraints_per_image[5], 0);
  EXPECT_FALSE(r.Empty());
}

TEST(BuildRevisitClusters, EmptyReportGivesNoClusters) {
  EXPECT_TRUE(BuildRevisitClusters(WeakReport{}, GridGraph(3, 3), WeakAreaOptions{}).empty());
}

TEST(BuildRevisitClusters, SinglePairGrowsByDirectNeighbours) {
  const ViewGraph g = GridGraph(3, 4);
  WeakReport r;
  r.weak_pairs = {{5, 6}};
  const auto clusters = BuildRevisitClusters(r, g, WeakAreaOptions{}, 7);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].id, 7);
  EXPECT_EQ(clusters[0].members, (std::vector<ImageId>{1, 2, 4, 5, 6, 7, 9, 10}));
  EXPECT_TRUE(clusters[0].overlap.empty());
}

TEST(BuildRevisitClusters, AdjacentPairsMerge) {
  const ViewGraph g = GridGraph(1, 10);
  WeakReport r;
  r.weak_pairs = {{2, 3}, {3, 4}};
  WeakAreaOptions o;
  o.hops = 0;
  const auto clusters = BuildRevisitClusters(r, g, o);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].members, (std::vector<ImageId>{2, 3, 4}));
}

TEST(BuildRevisitClusters, MatchesBfsOracleOnGrids) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const ViewGraph g = GridGraph(8, 12);
    std::uniform_int_distribution<int> pick(0, g.NumEdges() - 1);
    const ViewGraphEdge& e = g.Edges()[pick(rng)];
    WeakReport r;
    r.weak_pairs = {{e.image1, e.image2}};
    WeakAreaOptions o;
    o.hops = 2;
    const auto clusters = BuildRevisitClusters(r, g, o);
    ASSERT_EQ(clusters.size(), 1u);
    const auto dist = BfsDistances(g, {e.image1, e.image2});
    std::vector<ImageId> expected;
    for (ImageId v = 0; v < g.NumImages(); ++v) {
      if (dist[v] >= 0 && dist[v] <= 2) expected.push_back(v);
    }
    EXPECT_EQ(clusters[0].members, expected) << trial;
  }
}

TEST(BuildRevisitClusters, DistantItemsStaySeparateAndOverlapIsReported) {
  const ViewGraph g = GridGraph(1, 12);
  WeakReport r;
  r.weak_pairs = {{1, 2}, {9, 10}};
  r.unregistered = {5};
  const auto clusters = BuildRevisitClusters(r, g, WeakAreaOptions{});
  ASSERT_EQ(clusters.size(), 3u);
  EXPECT_EQ(clusters[0].members, (std::vector<ImageId>{0, 1, 2, 3}));
  EXPECT_EQ(clusters[1].members, (std::vector<ImageId>{4, 5, 6}));
  EXPECT_EQ(clusters[2].members, (std::vector<ImageId>{8, 9, 10, 11}));
  // Two hops make neighbouring clusters share members (still below 50%).
  WeakAreaOptions o;
  o.hops = 2;
  const auto wide = BuildRevisitClusters(r, g, o);
  ASSERT_EQ(wide.size(), 3u);
  EXPECT_EQ(wide[0].overlap, (std::vector<ImageId>{3, 4}));
}

TEST(MergeEdgeUpgrades, KeepsMaximumSharedPoints) {
  ViewGraph g = GridGraph(1, 3);
  for (auto& e : g.MutableEdges()) e.num_shared_points = 0;
  const Pose a = Pose::FromCenter(Eigen::Quaterniond::Identity(), Eigen::Vector3d(1, 0, 0));
  const Pose b = Pose::FromCenter(Eigen::Quaterniond::Identity(), Eigen::Vector3d(2, 0, 0));
  EXPECT_EQ(MergeEdgeUpgrades(g, {{0, 1, 40, a}}), 1);
  EXPECT_EQ(MergeEdgeUpgrades(g, {{0, 1, 30, b}}), 0);
  EXPECT_EQ(g.Find(0, 1)->num_shared_points, 40);
  EXPECT_EQ(*g.Find(0, 1)->metric_relative, a);
  EXPECT_EQ(MergeEdgeUpgrades(g, {{1, 0, 50, b}}), 1);
  EXPECT_EQ(g.Find(0, 1)->num_shared_points, 50);
  EXPECT_EQ(*g.Find(0, 1)->metric_relative, b.Inverse());
}

sim::SurveyConfig SmallSurvey() {
  sim::SurveyConfig cfg;
  cfg.num_tracks = 2;
  cfg.track_length = 28.0;
  cfg.cross_track = false;
  return cfg;
}

// Primary pass: small clusters without overlap leave cross-cluster pairs weak.
std::vector<SubReconstruction> PrimaryPass(World& w, const SfmContext& ctx) {
  PartitionOptions p;
  p.target_cluster_size = 10;
  p.overlap_ratio = 0.0;
  std::vector<SubReconstruction> subs;
  for (const Cluster& c : Partition(w.graph, p)) {
    ClusterResult r = ReconstructCluster(c, w.graph, ctx, LocalSfmOptions{});
    if (!r.seeded) continue;
    MergeEdgeUpgrades(w.graph, r.upgrades);
    subs.push_back(std::move(r.sub));
  }
  return subs;
}

size_t RegisteredCount(const std::vector<SubReconstruction>& subs, int n) {
  std::vector<bool> reg(n, false);
  for (const auto& s : subs)
    for (const auto& [i, p] : s.recon.poses) reg[i] = true;
  return std::count(reg.begin(), reg.end(), true);
}

TEST(RevisitWeakAreas, EliminatesPartitionBoundaryWeakPairs) {
  World w(SmallSurvey(), {});
  const SfmContext ctx = w.Context();
  std::vector<SubReconstruction> subs = PrimaryPass(w, ctx);
  const WeakAreaOptions o;
  const WeakReport first = DetectWeakAreas(w.graph, subs, o);
  ASSERT_FALSE(first.weak_pairs.empty());
  const size_t registered_before = RegisteredCount(subs, 30);
  std::vector<int> np_before;
  for (const auto& e : w.graph.Edges()) np_before.push_back(e.num_shared_points);

  const RevisitResult r = RevisitWeakAreas(w.graph, subs, ctx, LocalSfmOptions{}, o);
  EXPECT_GE(r.rounds.size(), 1u);
  EXPECT_LE(r.rounds.size(), 2u);
  EXPECT_TRUE(r.final_report.weak_pairs.empty());
  EXPECT_GE(RegisteredCount(subs, 30), registered_before);
  for (size_t k = 0; k < np_before.size(); ++k) {
    EXPECT_GE(w.graph.Edges()[k].num_shared_points, np_before[k]);
  }

  // Fixed point: nothing left to revisit.
  const ViewGraph snapshot = w.graph;
  const size_t num_subs = subs.size();
  const RevisitResult again = RevisitWeakAreas(w.graph, subs, ctx, LocalSfmOptions{}, o);
  EXPECT_TRUE(again.rounds.empty());
  EXPECT_EQ(subs.size(), num_subs);
  for (size_t k = 0; k < snapshot.Edges().size(); ++k) {
    EXPECT_EQ(w.graph.Edges()[k].num_shared_points, snapshot.Edges()[k].num_shared_points);
  }
}

TEST(RevisitWeakAreas, ImagesWithoutMatchesStayUnregistered) {
  sim::SurveyConfig cfg = SmallSurvey();
  const sim::SurveyTruth probe = sim::GenerateSurvey(cfg);
  sim::NoiseModel noise;
  sim::WeakStrip strip;
  const Eigen::Vector3d c = probe.camera_poses[7].Center();
  strip.min_ne = {c.x() - 2.5, c.y() - 1.0};
  strip.max_ne = {c.x() + 2.5, c.y() + 1.0};
  strip.dropout = 1.0;
  noise.weak_strips.push_back(strip);
  World w(cfg, noise);
  const SfmContext ctx = w.Context();
  std::vector<SubReconstruction> subs = PrimaryPass(w, ctx);
  const RevisitResult r = RevisitWeakAreas(w.graph, subs, ctx, LocalSfmOptions{}, WeakAreaOptions{});
  EXPECT_EQ(r.rounds.size(), 2u);
  EXPECT_EQ(r.final_report.unregistered, (std::vector<ImageId>{6, 7, 8}));
  EXPECT_TRUE(r.final_report.weak_pairs.empty());
}

TEST(RevisitWeakAreas, DeterministicAcrossThreadCounts) {
  World a(SmallSurvey(), {});
  World b(SmallSurvey(), {});
  const SfmContext ca = a.Context(), cb = b.Context();
  auto sa = PrimaryPass(a, ca);
  auto sb = PrimaryPass(b, cb);
  RevisitWeakAreas(a.graph, sa, ca, LocalSfmOptions{}, WeakAreaOptions{}, 1);
  RevisitWeakAreas(b.graph, sb, cb, LocalSfmOptions{}, WeakAreaOptions{}, 4);
  ASSERT_EQ(sa.size(), sb.size());
  for (size_t k = 0; k < sa.size(); ++k) {
    ASSERT_EQ(sa[k].recon.poses.size(), sb[k].recon.poses.size());
    for (const auto& [i, p] : sa[k].recon.poses) EXPECT_EQ(p, sb[k].recon.poses.at(i));
  }
}

}  // namespace
}  // namespace navsfm
