#include "navsfm/viewgraph/view_graph.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Dense>

#include "navsfm/util/parallel.h"
#include "navsfm/util/random.h"

namespace navsfm {

ViewGraphEdge& ViewGraph::AddEdge(ViewGraphEdge edge) {
  if (edge.image1 > edge.image2) {
    std::swap(edge.image1, edge.image2);
    for (auto& m : edge.inliers) {
      std::swap(m.feature1, m.feature2);
      std::swap(m.pixel1, m.pixel2);
    }
    // Invert x2 = R x1 + t.
    const Eigen::Matrix3d rt = edge.two_view.rotation.transpose();
    edge.two_view.translation = -(rt * edge.two_view.translation);
    edge.two_view.rotation = rt;
    if (edge.metric_relative) edge.metric_relative = edge.metric_relative->Inverse();
  }
  const auto key = Key(edge.image1, edge.image2);
  num_images_ = std::max(num_images_, edge.image2 + 1);
  const auto it = index_.find(key);
  if (it != index_.end()) {
    edges_[it->second] = std::move(edge);
    return edges_[it->second];
  }
  index_[key] = static_cast<int>(edges_.size());
  edges_.push_back(std::move(edge));
  return edges_.back();
}

const ViewGraphEdge* ViewGraph::Find(ImageId a, ImageId b) const {
  const auto it = index_.find(Key(a, b));
  return it == index_.end() ? nullptr : &edges_[it->second];
}

ViewGraphEdge* ViewGraph::Find(ImageId a, ImageId b) {
  const auto it = index_.find(Key(a, b));
  return it == index_.end() ? nullptr : &edges_[it->second];
}

std::vector<std::vector<ImageId>> ViewGraph::Adjacency() const {
  std::vector<std::vector<ImageId>> adj(num_images_);
  for (const auto& e : edges_) {
    adj[e.image1].push_back(e.image2);
    adj[e.image2].push_back(e.image1);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

std::vector<ImageId> ViewGraph::Neighbors(ImageId image) const {
  std::vector<ImageId> n;
  for (const auto& e : edges_) {
    if (e.image1 == image) n.push_back(e.image2);
    if (e.image2 == image) n.push_back(e.image1);
  }
  std::sort(n.begin(), n.end());
  return n;
}

bool Cluster::Contains(ImageId image) const {
  return std::binary_search(members.begin(), members.end(), image);
}

// ---------------------------------------------------------------------------
// Pair selection

std::vector<ImagePair> SelectPairs(const std::vector<Pose>& priors,
                                   double radius, int max_neighbors) {
  const int n = static_cast<int>(priors.size());
  std::vector<Eigen::Vector3d> centers(n);
  for (int i = 0; i < n; ++i) centers[i] = priors[i].Center();

  // Uniform grid hash with cell size = radius.
  auto cell_of = [&](const Eigen::Vector3d& c) {
    return Eigen::Vector3i(static_cast<int>(std::floor(c.x() / radius)),
                           static_cast<int>(std::floor(c.y() / radius)),
                           static_cast<int>(std::floor(c.z() / radius)));
  };
  auto hash = [](const Eigen::Vector3i& c) {
    return SplitMix64((static_cast<uint64_t>(static_cast<uint32_t>(c.x())) << 42) ^
                      (static_cast<uint64_t>(static_cast<uint32_t>(c.y())) << 21) ^
                      static_cast<uint32_t>(c.z()));
  };
  std::unordered_map<uint64_t, std::vector<int>> grid;
  if (radius <= 0.0) return {};
  for (int i = 0; i < n; ++i) grid[hash(cell_of(centers[i]))].push_back(i);

  std::vector<ImagePair> pairs;
  const double r2 = radius * radius;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3i c = cell_of(centers[i]);
    std::vector<std::pair<double, int>> near;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(hash(c + Eigen::Vector3i(dx, dy, dz)));
          if (it == grid.end()) continue;
          for (const int j : it->second) {
            if (j == i) continue;
            const double d2 = (centers[j] - centers[i]).squaredNorm();
            if (d2 <= r2) near.emplace_back(d2, j);
          }
        }
    // Hash collisions may list a neighbor twice.
    std::sort(near.begin(), near.end());
    near.erase(std::unique(near.begin(), near.end()), near.end());
    if (max_neighbors > 0 && static_cast<int>(near.size()) > max_neighbors) {
      near.resize(max_neighbors);
    }
    for (const auto& [d2, j] : near) pairs.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

double DefaultPairRadius(const CameraIntrinsics& camera, double altitude,
                         double factor) {
  const double half_diag_px =
      0.5 * std::hypot(camera.width / camera.fx, camera.height / camera.fy);
  const double half_angle = std::min(half_diag_px, 1.4);  // equidistant: r = f theta
  return factor * 2.0 * altitude * std::tan(half_angle);
}

// ---------------------------------------------------------------------------
// Two-view verification

std::string ToString(TwoViewStatus status) {
  switch (status) {
    case TwoViewStatus::kSuccess: return "success";
    case TwoViewStatus::kTooFewMatches: return "too_few_matches";
    case TwoViewStatus::kNoModel: return "no_model";
    case TwoViewStatus::kTooFewInliers: return "too_few_inliers";
    case TwoViewStatus::kLowInlierRatio: return "low_inlier_ratio";
  }
  return "unknown";
}

namespace {

constexpr int kMinimalSample = 5;

// Inliers of a motion hypothesis: small epipolar error and, where the rays
// are not parallel, positive depth in both views.
bool IsInlier(const RelativeMotion& motion, const Eigen::Matrix3d& e,
              const Eigen::Vector3d& r1, const Eigen::Vector3d& r2, double threshold,
              double* error) {
  *error = EpipolarAngularError(e, r1, r2);
  if (*error >= threshold) return false;
  double d1, d2;
  return !RayDepths(motion, r1, r2, &d1, &d2) || (d1 > 0 && d2 > 0);
}

int CountInliers(const RelativeMotion& motion, const std::vector<Eigen::Vector3d>& r1,
                 const std::vector<Eigen::Vector3d>& r2, double threshold,
                 double* score) {
  const Eigen::Matrix3d e = EssentialFromMotion(motion.rotation, motion.translation);
  int count = 0;
  double s = 0.0;
  for (size_t i = 0; i < r1.size(); ++i) {
    double err;
    if (IsInlier(motion, e, r1[i], r2[i], threshold, &err)) {
      ++count;
      s += err;
    }
  }
  *score = s;
  return count;
}

// Symmetric normalized epipolar residual used for refinement.
double EpipolarResidual(const Eigen::Matrix3d& e, const Eigen::Vector3d& f1,
                        const Eigen::Vector3d& f2) {
  const double denom = std::sqrt((e * f1).squaredNorm() + (e.transpose() * f2).squaredNorm());
  return denom > 0 ? std::sqrt(2.0) * f2.dot(e * f1) / denom : 0.0;
}

RelativeMotion RetractMotion(const RelativeMotion& m, const Eigen::Matrix<double, 5, 1>& d) {
  // Tangent basis of the unit translation.
  Eigen::Vector3d a = m.translation.unitOrthogonal();
  Eigen::Vector3d b = m.translation.cross(a);
  RelativeMotion out;
  out.rotation = ExpQuaternion(d.head<3>()).toRotationMatrix() * m.rotation;
  out.translation = (m.translation + d[3] * a + d[4] * b).normalized();
  return out;
}

void RefineMotion(const std::vector<Eigen::Vector3d>& r1,
                  const std::vector<Eigen::Vector3d>& r2, RelativeMotion* motion) {
  const int n = static_cast<int>(r1.size());
  if (n < kMinimalSample) return;
  auto residuals = [&](const RelativeMotion& m) {
    const Eigen::Matrix3d e = EssentialFromMotion(m.rotation, m.translation);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = EpipolarResidual(e, r1[i], r2[i]);
    return r;
  };
  Eigen::VectorXd r = residuals(*motion);
  double cost = r.squaredNorm();
  double lambda = 1e-4;
  for (int it = 0; it < 20 && cost > 0.0; ++it) {
    Eigen::MatrixXd j(n, 5);
    const double h = 1e-7;
    for (int k = 0; k < 5; ++k) {
      Eigen::Matrix<double, 5, 1> d = Eigen::Matrix<double, 5, 1>::Zero();
      d[k] = h;
      j.col(k) = (residuals(RetractMotion(*motion, d)) -
                  residuals(RetractMotion(*motion, -d))) / (2 * h);
    }
    const Eigen::Matrix<double, 5, 5> jtj = j.transpose() * j;
    const Eigen::Matrix<double, 5, 1> g = j.transpose() * r;
    bool accepted = false;
    while (lambda < 1e8) {
      Eigen::Matrix<double, 5, 5> a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Matrix<double, 5, 1> d = a.ldlt().solve(-g);
      const RelativeMotion candidate = RetractMotion(*motion, d);
      const Eigen::VectorXd rc = residuals(candidate);
      if (rc.squaredNorm() < cost) {
        const double decrease = cost - rc.squaredNorm();
        *motion = candidate;
        r = rc;
        cost = rc.squaredNorm();
        lambda = std::max(1e-10, lambda * 0.1);
        accepted = true;
        if (decrease < 1e-14 * cost || d.norm() < 1e-12) return;
        break;
      }
      lambda *= 10;
    }
    if (!accepted) return;
  }
}

}  // namespace

TwoViewResult VerifyTwoView(const PairMatches& pair, const CameraIntrinsics& camera,
                            const TwoViewOptions& options, uint64_t seed) {
  TwoViewResult result;
  const int n = static_cast<int>(pair.matches.size());
  result.inlier_mask.assign(n, false);
  if (n < std::max(kMinimalSample, 1)) {
    result.status = TwoViewStatus::kTooFewMatches;
    return result;
  }
  std::vector<Eigen::Vector3d> r1(n), r2(n);
  for (int i = 0; i < n; ++i) {
    r1[i] = Unproject(camera, pair.matches[i].pixel1);
    r2[i] = Unproject(camera, pair.matches[i].pixel2);
  }

  auto rng = StreamEngine(seed, 0x7076, static_cast<uint64_t>(pair.image1),
                          static_cast<uint64_t>(pair.image2));
  RelativeMotion best_motion;
  int best_count = -1;
  double best_score = 0.0;
  int needed = options.max_iterations;
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  std::vector<Eigen::Vector3d> s1(kMinimalSample), s2(kMinimalSample);
  int it = 0;
  for (; it < std::min(needed, options.max_iterations); ++it) {
    // Partial Fisher-Yates draw of a minimal sample.
    for (int k = 0; k < kMinimalSample; ++k) {
      std::uniform_int_distribution<int> pick(k, n - 1);
      std::swap(indices[k], indices[pick(rng)]);
      s1[k] = r1[indices[k]];
      s2[k] = r2[indices[k]];
    }
    for (const Eigen::Matrix3d& e : EssentialFivePoint(s1, s2)) {
      // Cheirality on the sample picks one of the four factorizations.
      const RelativeMotion motion = SelectMotionByCheirality(e, s1, s2);
      double score;
      const int count = CountInliers(motion, r1, r2, options.max_angular_error, &score);
      if (count > best_count || (count == best_count && score < best_score)) {
        best_count = count;
        best_score = score;
        best_motion = motion;
        const double w = static_cast<double>(count) / n;
        const double p_fail = 1.0 - std::pow(w, kMinimalSample);
        if (p_fail <= 0.0) {
          needed = 0;
        } else if (p_fail < 1.0) {
          needed = static_cast<int>(
              std::ceil(std::log(1.0 - options.confidence) / std::log(p_fail)));
        }
      }
    }
  }
  result.iterations = it;
  if (best_count < kMinimalSample) {
    result.status = TwoViewStatus::kNoModel;
    return result;
  }

  auto collect = [&](const RelativeMotion& motion, std::vector<Eigen::Vector3d>* in1,
                     std::vector<Eigen::Vector3d>* in2) {
    const Eigen::Matrix3d e = EssentialFromMotion(motion.rotation, motion.translation);
    in1->clear();
    in2->clear();
    for (int i = 0; i < n; ++i) {
      double err;
      result.inlier_mask[i] =
          IsInlier(motion, e, r1[i], r2[i], options.max_angular_error, &err);
      if (result.inlier_mask[i]) {
        in1->push_back(r1[i]);
        in2->push_back(r2[i]);
      }
    }
  };
  RelativeMotion motion = best_motion;
  std::vector<Eigen::Vector3d> in1, in2;
  collect(motion, &in1, &in2);
  if (options.refine) {
    RefineMotion(in1, in2, &motion);
    collect(motion, &in1, &in2);
    RefineMotion(in1, in2, &motion);
    collect(motion, &in1, &in2);
  }

  ViewGraphEdge& edge = result.edge;
  edge.image1 = pair.image1;
  edge.image2 = pair.image2;
  edge.two_view = motion;
  for (int i = 0; i < n; ++i) {
    if (result.inlier_mask[i]) edge.inliers.push_back(pair.matches[i]);
  }
  edge.num_matches = static_cast<int>(edge.inliers.size());
  if (edge.num_matches < options.min_inliers) {
    result.status = TwoViewStatus::kTooFewInliers;
  } else if (edge.num_matches < options.min_inlier_ratio * n) {
    result.status = TwoViewStatus::kLowInlierRatio;
  } else {
    result.status = TwoViewStatus::kSuccess;
  }
  return result;
}

ViewGraph BuildViewGraph(const SurveyInput& input, const ViewGraphOptions& options) {
  const std::vector<Pose> priors = input.CameraPriors();
  const double radius = options.pair_radius > 0
                            ? options.pair_radius
                            : DefaultPairRadius(input.camera, options.altitude);
  const std::vector<ImagePair> selected =
      SelectPairs(priors, radius, options.max_neighbors);
  std::vector<const PairMatches*> todo;
  for (const auto& p : input.matches.pairs) {
    if (std::binary_search(selected.begin(), selected.end(),
                           ImagePair(p.image1, p.image2))) {
      todo.push_back(&p);
    }
  }
  std::vector<TwoViewResult> results(todo.size());
  ParallelFor(static_cast<int>(todo.size()), options.num_threads, [&](int i) {
    results[i] = VerifyTwoView(*todo[i], input.camera, options.two_view, options.seed);
  });
  ViewGraph graph(input.NumImages());
  for (auto& r : results) {
    if (r.ok()) graph.AddEdge(std::move(r.edge));
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Partitioning

Eigen::MatrixXd WeightMatrix(const ViewGraph& graph, const std::vector<ImageId>& nodes) {
  const int n = static_cast<int>(nodes.size());
  std::unordered_map<ImageId, int> local;
  for (int i = 0; i < n; ++i) local[nodes[i]] = i;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : graph.Edges()) {
    const auto a = local.find(e.image1), b = local.find(e.image2);
    if (a == local.end() || b == local.end()) continue;
    w(a->second, b->second) = w(b->second, a->second) = e.num_matches;
  }
  return w;
}

double NormalizedCutObjective(const Eigen::MatrixXd& weights, const std::vector<int>& side) {
  double cut = 0.0, assoc[2] = {0.0, 0.0};
  const int n = static_cast<int>(weights.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      assoc[side[i]] += weights(i, j);
      if (side[i] != side[j]) cut += weights(i, j);
    }
  }
  cut *= 0.5;
  if (assoc[0] <= 0.0 || assoc[1] <= 0.0) return std::numeric_limits<double>::infinity();
  return cut / assoc[0] + cut / assoc[1];
}

std::vector<std::vector<int>> ConnectedComponents(const Eigen::MatrixXd& weights) {
  const int n = static_cast<int>(weights.rows());
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> components;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::vector<int> comp{s}, stack{s};
    label[s] = static_cast<int>(components.size());
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (weights(u, v) > 0 && label[v] < 0) {
          label[v] = label[s];
          comp.push_back(v);
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

namespace {

// Fiduccia-Mattheyses style passes: move every vertex once in best-gain
// order (allowing uphill moves), then keep the best prefix. Repeats while a
// pass improves the normalized-cut objective.
void RefineBisection(const Eigen::MatrixXd& weights, const Eigen::VectorXd& degree,
                     std::vector<int>* side_io) {
  std::vector<int>& side = *side_io;
  const int n = static_cast<int>(side.size());
  // Sides are tracked by count: running sums of assoc drift and must not be
  // trusted to hit zero exactly.
  auto objective = [](double cut, const double assoc[2], const int count[2]) {
    if (count[0] == 0 || count[1] == 0 || assoc[0] <= 0.0 || assoc[1] <= 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    cut = std::max(cut, 0.0);
    return cut / assoc[0] + cut / assoc[1];
  };
  for (int pass = 0; pass < 20; ++pass) {
    // link(u, s): weight from u into side s.
    Eigen::MatrixXd link = Eigen::MatrixXd::Zero(n, 2);
    double cut = 0.0, assoc[2] = {0.0, 0.0};
    int count[2] = {0, 0};
    for (int u = 0; u < n; ++u) {
      assoc[side[u]] += degree[u];
      ++count[side[u]];
      for (int v = 0; v < n; ++v) link(u, side[v]) += weights(u, v);
      cut += link(u, 1 - side[u]);
    }
    cut *= 0.5;
    const double start = objective(cut, assoc, count);
    double best = start;
    std::vector<int> moved;
    int best_prefix = 0;
    std::vector<bool> locked(n, false);
    for (int step = 0; step < n; ++step) {
      int pick = -1;
      double pick_obj = std::numeric_limits<double>::infinity();
      for (int u = 0; u < n; ++u) {
        if (locked[u]) continue;
        const int a = side[u], b = 1 - a;
        double as[2] = {assoc[0], assoc[1]};
        int cs[2] = {count[0], count[1]};
        as[a] -= degree[u];
        as[b] += degree[u];
        --cs[a];
        ++cs[b];
        const double obj = objective(cut - link(u, b) + link(u, a), as, cs);
        if (obj < pick_obj) {
          pick_obj = obj;
          pick = u;
        }
      }
      if (pick < 0) break;
      const int a = side[pick], b = 1 - a;
      cut += link(pick, a) - link(pick, b);
      assoc[a] -= degree[pick];
      assoc[b] += degree[pick];
      --count[a];
      ++count[b];
      side[pick] = b;
      locked[pick] = true;
      for (int v = 0; v < n; ++v) {
        link(v, a) -= weights(v, pick);
        link(v, b) += weights(v, pick);
      }
      moved.push_back(pick);
      if (pick_obj < best - 1e-15) {
        best = pick_obj;
        best_prefix = static_cast<int>(moved.size());
      }
    }
    // Undo moves past the best prefix.
    for (int k = static_cast<int>(moved.size()) - 1; k >= best_prefix; --k) {
      side[moved[k]] ^= 1;
    }
    if (!(best < start - 1e-15)) break;
  }
}

}  // namespace

std::vector<int> NormalizedCutBisection(const Eigen::MatrixXd& weights) {
  const int n = static_cast<int>(weights.rows());
  std::vector<int> side(n, 0);
  if (n < 2) return side;
  const Eigen::VectorXd degree = weights.rowwise().sum();
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt[i] = degree[i] > 0 ? 1.0 / std::sqrt(degree[i]) : 0.0;
  // Normalized Laplacian I - D^-1/2 W D^-1/2; the Fiedler vector of the
  // generalized problem is D^-1/2 v.
  const Eigen::MatrixXd laplacian =
      Eigen::MatrixXd::Identity(n, n) -
      inv_sqrt.asDiagonal() * weights * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);

  // Sweep cuts along the two lowest non-trivial eigenvectors; the local
  // minima of each sweep curve seed a refinement and the best result wins.
  const double total = degree.sum();
  std::vector<std::vector<int>> seeds;
  for (int col = 1; col <= std::min(2, n - 1); ++col) {
    const Eigen::VectorXd y = inv_sqrt.asDiagonal() * eig.eigenvectors().col(col);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return y[a] < y[b]; });
    // Prefix order[0..k] goes to side 1.
    std::vector<double> curve(n - 1, std::numeric_limits<double>::infinity());
    double cut = 0.0, assoc1 = 0.0;
    std::vector<int> in_prefix(n, 0);
    for (int k = 0; k + 1 < n; ++k) {
      const int u = order[k];
      for (int v = 0; v < n; ++v) {
        if (v == u || weights(u, v) == 0.0) continue;
        cut += in_prefix[v] ? -weights(u, v) : weights(u, v);
      }
      in_prefix[u] = 1;
      assoc1 += degree[u];
      const double assoc0 = total - assoc1;
      if (assoc1 > 0 && assoc0 > 0) curve[k] = cut / assoc1 + cut / assoc0;
    }
    std::vector<std::pair<double, int>> minima;
    for (int k = 0; k + 1 < n; ++k) {
      const bool left = k == 0 || curve[k] <= curve[k - 1];
      const bool right = k + 2 == n || curve[k] <= curve[k + 1];
      if (left && right && std::isfinite(curve[k])) minima.emplace_back(curve[k], k);
    }
    std::sort(minima.begin(), minima.end());
    if (minima.size() > 3) minima.resize(3);
    for (const auto& [obj, k] : minima) {
      std::vector<int> seed(n, 0);
      for (int i = 0; i <= k; ++i) seed[order[i]] = 1;
      seeds.push_back(std::move(seed));
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (auto& seed : seeds) {
    RefineBisection(weights, degree, &seed);
    const double obj = NormalizedCutObjective(weights, seed);
    if (obj < best - 1e-15) {
      best = obj;
      side = seed;
    }
  }
  // Canonical labelling: node 0 on side 0.
  if (side[0] == 1) {
    for (int& s : side) s ^= 1;
  }
  return side;
}

namespace {

void SplitRecursive(const ViewGraph& graph, std::vector<ImageId> nodes, int target,
                    std::vector<std::vector<ImageId>>* out) {
  if (static_cast<int>(nodes.size()) <= target) {
    out->push_back(std::move(nodes));
    return;
  }
  const Eigen::MatrixXd w = WeightMatrix(graph, nodes);
  const auto components = ConnectedComponents(w);
  if (components.size() > 1) {
    for (const auto& comp : components) {
      std::vector<ImageId> sub;
      for (const int i : comp) sub.push_back(nodes[i]);
      SplitRecursive(graph, std::move(sub), target, out);
    }
    return;
  }
  const std::vector<int> side = NormalizedCutBisection(w);
  std::vector<ImageId> a, b;
  for (size_t i = 0; i < nodes.size(); ++i) (side[i] ? b : a).push_back(nodes[i]);
  if (a.empty() || b.empty()) {
    // Degenerate spectrum; fall back to halving in id order.
    a.assign(nodes.begin(), nodes.begin() + nodes.size() / 2);
    b.assign(nodes.begin() + nodes.size() / 2, nodes.end());
  }
  SplitRecursive(graph, std::move(a), target, out);
  SplitRecursive(graph, std::move(b), target, out);
}

}  // namespace

std::vector<Cluster> Partition(const ViewGraph& graph, const PartitionOptions& options) {
  std::vector<ImageId> nodes;
  const auto adj = graph.Adjacency();
  for (ImageId i = 0; i < static_cast<ImageId>(adj.size()); ++i) {
    if (!adj[i].empty()) nodes.push_back(i);
  }
  if (nodes.empty()) return {};

  std::vector<std::vector<ImageId>> parts;
  SplitRecursive(graph, nodes, std::max(1, options.target_cluster_size), &parts);

  std::vector<Cluster> clusters;
  for (auto& members : parts) {
    Cluster c;
    c.id = static_cast<int>(clusters.size());
    std::sort(members.begin(), members.end());
    c.members = members;
    clusters.push_back(std::move(c));
  }
  if (clusters.size() > 1 && options.overlap_ratio > 0.0) {
    std::vector<std::vector<ImageId>> grown(clusters.size());
    for (size_t k = 0; k < clusters.size(); ++k) {
      const Cluster& c = clusters[k];
      std::map<ImageId, double> boundary;
      for (const ImageId i : c.members) {
        for (const ImageId j : adj[i]) {
          if (!c.Contains(j)) boundary[j] += graph.Find(i, j)->num_matches;
        }
      }
      std::vector<std::pair<double, ImageId>> ranked;
      for (const auto& [j, w] : boundary) ranked.emplace_back(-w, j);
      std::sort(ranked.begin(), ranked.end());
      const size_t extra = static_cast<size_t>(
          std::ceil(options.overlap_ratio * static_cast<double>(c.members.size())));
      grown[k] = c.members;
      for (size_t r = 0; r < std::min(extra, ranked.size()); ++r) {
        grown[k].push_back(ranked[r].second);
      }
      std::sort(grown[k].begin(), grown[k].end());
    }
    for (size_t k = 0; k < clusters.size(); ++k) clusters[k].members = grown[k];
  }
  std::map<ImageId, int> count;
  for (const auto& c : clusters)
    for (const ImageId i : c.members) ++count[i];
  for (auto& c : clusters) {
    for (const ImageId i : c.members) {
      if (count[i] > 1) c.overlap.push_back(i);
    }
  }
  return clusters;
}

}  // namespace navsfm
