#include "navsfm/sfm/weak_area.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "navsfm/util/parallel.h"
#include "navsfm/util/random.h"

namespace navsfm {

void WeakAreaOptions::Validate(int min_two_view_inliers) const {
  if (min_matches < min_two_view_inliers) {
    throw std::invalid_argument("weak-area min_matches below the two-view inlier minimum");
  }
  if (!(weak_ratio > 0.0 && weak_ratio < 1.0)) {
    throw std::invalid_argument("weak_ratio must be in (0, 1)");
  }
  if (max_rounds < 0 || hops < 0) throw std::invalid_argument("negative rounds or hops");
  if (!(merge_overlap >= 0.0 && merge_overlap <= 1.0)) {
    throw std::invalid_argument("merge_overlap must be in [0, 1]");
  }
}

bool IsWeakEdge(const ViewGraphEdge& edge, const WeakAreaOptions& options) {
  return edge.num_matches > options.min_matches &&
         edge.num_shared_points < options.weak_ratio * edge.num_matches;
}

WeakReport DetectWeakAreas(const ViewGraph& graph, const std::vector<SubReconstruction>& subs,
                           const WeakAreaOptions& options) {
  WeakReport report;
  const int n = graph.NumImages();
  std::vector<bool> registered(n, false);
  for (const auto& sub : subs) {
    for (const auto& [image, pose] : sub.recon.poses) registered[image] = true;
  }
  for (ImageId i = 0; i < n; ++i) {
    if (!registered[i]) report.unregistered.push_back(i);
  }
  report.constraints_per_image.assign(n, 0);
  for (const auto& e : graph.Edges()) {
    if (IsWeakEdge(e, options)) report.weak_pairs.emplace_back(e.image1, e.image2);
    if (e.num_shared_points > 0 && e.metric_relative) {
      ++report.constraints_per_image[e.image1];
      ++report.constraints_per_image[e.image2];
    }
  }
  std::sort(report.weak_pairs.begin(), report.weak_pairs.end());
  return report;
}

namespace {

int Find(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

void Union(std::vector<int>& parent, int a, int b) {
  a = Find(parent, a);
  b = Find(parent, b);
  if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

std::set<ImageId> Grow(const std::vector<ImageId>& seeds,
                       const std::vector<std::vector<ImageId>>& adjacency, int hops) {
  std::set<ImageId> visited(seeds.begin(), seeds.end());
  std::vector<ImageId> frontier = seeds;
  for (int h = 0; h < hops && !frontier.empty(); ++h) {
    std::vector<ImageId> next;
    for (const ImageId v : frontier) {
      for (const ImageId u : adjacency[v]) {
        if (visited.insert(u).second) next.push_back(u);
      }
    }
    frontier = std::move(next);
  }
  return visited;
}

}  // namespace

std::vector<Cluster> BuildRevisitClusters(const WeakReport& report, const ViewGraph& graph,
                                          const WeakAreaOptions& options, int first_id) {
  const int n = graph.NumImages();
  std::vector<bool> weak_item(n, false);
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [a, b] : report.weak_pairs) {
    weak_item[a] = weak_item[b] = true;
    Union(parent, a, b);
  }
  for (const ImageId i : report.unregistered) weak_item[i] = true;
  // An unregistered image joins any weak item it shares an edge with.
  for (const ImageId i : report.unregistered) {
    for (const ImageId u : graph.Neighbors(i)) {
      if (weak_item[u]) Union(parent, i, u);
    }
  }
  std::map<int, std::vector<ImageId>> components;
  for (ImageId i = 0; i < n; ++i) {
    if (weak_item[i]) components[Find(parent, i)].push_back(i);
  }

  const auto adjacency = graph.Adjacency();
  std::vector<std::set<ImageId>> sets;
  for (const auto& [root, items] : components) sets.push_back(Grow(items, adjacency, options.hops));

  // Merge heavily overlapping clusters until stable.
  bool merged = true;
  while (merged) {
    merged = false;
    for (size_t a = 0; a < sets.size() && !merged; ++a) {
      for (size_t b = a + 1; b < sets.size() && !merged; ++b) {
        size_t common = 0;
        for (const ImageId v : sets[a]) common += sets[b].count(v);
        const size_t smaller = std::min(sets[a].size(), sets[b].size());
        if (common > options.merge_overlap * static_cast<double>(smaller)) {
          sets[a].insert(sets[b].begin(), sets[b].end());
          sets.erase(sets.begin() + static_cast<std::ptrdiff_t>(b));
          merged = true;
        }
      }
    }
  }
  std::sort(sets.begin(), sets.end(),
            [](const auto& x, const auto& y) { return *x.begin() < *y.begin(); });

  std::vector<int> count(n, 0);
  for (const auto& s : sets)
    for (const ImageId v : s) ++count[v];
  std::vector<Cluster> clusters;
  for (const auto& s : sets) {
    Cluster c;
    c.id = first_id + static_cast<int>(clusters.size());
    c.members.assign(s.begin(), s.end());
    for (const ImageId v : c.members) {
      if (count[v] > 1) c.overlap.push_back(v);
    }
    clusters.push_back(std::move(c));
  }
  return clusters;
}

int MergeEdgeUpgrades(ViewGraph& graph, const std::vector<EdgeUpgrade>& upgrades) {
  int changed = 0;
  for (const auto& up : upgrades) {
    ViewGraphEdge* e = graph.Find(up.image1, up.image2);
    if (e == nullptr) continue;
    if (e->metric_relative && up.num_shared_points <= e->num_shared_points) continue;
    if (up.num_shared_points != e->num_shared_points) ++changed;
    e->num_shared_points = up.num_shared_points;
    // Upgrades are expressed for the stored image order.
    e->metric_relative = up.image1 == e->image1 ? up.metric_relative : up.metric_relative.Inverse();
  }
  return changed;
}

RevisitResult RevisitWeakAreas(ViewGraph& graph, std::vector<SubReconstruction>& subs,
                               const SfmContext& context, const LocalSfmOptions& local,
                               const WeakAreaOptions& options, int num_threads) {
  options.Validate();
  RevisitResult result;
  int next_id = 0;
  for (const auto& s : subs) next_id = std::max(next_id, s.cluster_id + 1);

  for (int round = 0; round < options.max_rounds; ++round) {
    WeakReport report = DetectWeakAreas(graph, subs, options);
    if (report.Empty()) break;
    const std::vector<Cluster> clusters = BuildRevisitClusters(report, graph, options, next_id);
    next_id += static_cast<int>(clusters.size());

    LocalSfmOptions round_options = local;
    round_options.seed = SplitMix64(local.seed ^ (0x5265766973697400ull + round));
    std::vector<ClusterResult> results(clusters.size());
    ParallelFor(static_cast<int>(clusters.size()), num_threads, [&](int k) {
      results[k] = ReconstructCluster(clusters[k], graph, context, round_options);
    });

    RevisitRound r;
    r.num_clusters = static_cast<int>(clusters.size());
    r.before = std::move(report);
    for (size_t k = 0; k < results.size(); ++k) {
      if (!results[k].seeded) continue;
      ++r.num_seeded;
      MergeEdgeUpgrades(graph, results[k].upgrades);
      results[k].sub.cluster_id = clusters[k].id;
      subs.push_back(std::move(results[k].sub));
    }
    result.rounds.push_back(std::move(r));
  }
  result.final_report = DetectWeakAreas(graph, subs, options);
  return result;
}

}  // namespace navsfm
