#include "navsfm/pgo/pose_graph.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace navsfm {

std::vector<ImageId> PoseGraph::IsolatedVertices() const {
  std::vector<int> degree(vertices.size(), 0);
  for (const auto& e : edges) {
    ++degree[e.i];
    ++degree[e.j];
  }
  std::vector<ImageId> isolated;
  for (ImageId v = 0; v < NumVertices(); ++v) {
    if (degree[v] == 0) isolated.push_back(v);
  }
  return isolated;
}

std::vector<RelativeEdge> CollectRelativeEdges(const std::vector<SubReconstruction>& subs,
                                               const EdgeCollectionOptions& options) {
  std::map<std::pair<ImageId, ImageId>, RelativeEdge> best;
  for (const auto& sub : subs) {
    const Reconstruction& r = sub.recon;
    std::map<std::pair<ImageId, ImageId>, int> shared;
    for (const auto& l : r.landmarks) {
      std::vector<ImageId> images;
      for (const auto& e : l.track) {
        if (r.IsRegistered(e.image)) images.push_back(e.image);
      }
      std::sort(images.begin(), images.end());
      images.erase(std::unique(images.begin(), images.end()), images.end());
      for (size_t a = 0; a < images.size(); ++a)
        for (size_t b = a + 1; b < images.size(); ++b) ++shared[{images[a], images[b]}];
    }
    for (const auto& [pair, count] : shared) {
      if (count < options.min_shared_landmarks) continue;
      const auto it = best.find(pair);
      if (it != best.end() && it->second.shared_landmarks >= count) continue;
      RelativeEdge e;
      e.i = pair.first;
      e.j = pair.second;
      e.measurement = Relative(r.poses.at(e.j), r.poses.at(e.i));
      e.shared_landmarks = count;
      e.weight = options.per_edge_weighting
                     ? static_cast<double>(std::min(count, options.weight_cap)) /
                           options.weight_cap
                     : 1.0;
      best[pair] = e;
    }
  }
  std::vector<RelativeEdge> edges;
  for (auto& [pair, e] : best) edges.push_back(e);
  return edges;
}

PoseGraph MakePoseGraph(const std::vector<SubReconstruction>& subs,
                        const std::vector<Pose>& camera_priors,
                        std::vector<RelativeEdge> edges, const PgoWeights& weights) {
  PoseGraph g;
  g.priors = camera_priors;
  g.vertices = camera_priors;
  std::vector<bool> set(camera_priors.size(), false);
  for (const auto& sub : subs) {
    for (const auto& [image, pose] : sub.recon.poses) {
      if (set[image]) continue;
      g.vertices[image] = pose;
      set[image] = true;
    }
  }
  g.edges = std::move(edges);
  g.weights = weights;
  return g;
}

Vector6d RelativeEdgeResidual(const Pose& ti, const Pose& tj, const Pose& measurement,
                              Matrix6d* jacobian_i, Matrix6d* jacobian_j) {
  const bool jac = jacobian_i != nullptr || jacobian_j != nullptr;
  Matrix6d d_j, d_i, d_rel;
  const Pose rel = Relative(tj, ti, jac ? &d_j : nullptr, jac ? &d_i : nullptr);
  const Vector6d r =
      PoseResidual(rel, measurement, ResidualWeights::Identity(), jac ? &d_rel : nullptr);
  if (jacobian_i != nullptr) *jacobian_i = d_rel * d_i;
  if (jacobian_j != nullptr) *jacobian_j = d_rel * d_j;
  return r;
}

Vector6d SmoothResidual(const Pose& prev, const Pose& cur, const Pose& next,
                        Matrix6d* jacobian_prev, Matrix6d* jacobian_cur,
                        Matrix6d* jacobian_next) {
  const bool jac = jacobian_prev != nullptr || jacobian_cur != nullptr ||
                   jacobian_next != nullptr;
  Matrix6d a_cur, a_prev, b_next, b_cur, d_a, d_b;
  const Pose a = Relative(cur, prev, jac ? &a_cur : nullptr, jac ? &a_prev : nullptr);
  const Pose b = Relative(next, cur, jac ? &b_next : nullptr, jac ? &b_cur : nullptr);
  const Vector6d r = PoseResidual(a, b, ResidualWeights::Identity(), jac ? &d_a : nullptr,
                                  jac ? &d_b : nullptr);
  if (jacobian_prev != nullptr) *jacobian_prev = d_a * a_prev;
  if (jacobian_cur != nullptr) *jacobian_cur = d_a * a_cur + d_b * b_cur;
  if (jacobian_next != nullptr) *jacobian_next = d_b * b_next;
  return r;
}

namespace {

bool HasSmoothTerm(const PoseGraph& g, ImageId v) { return v > 0 && v + 1 < g.NumVertices(); }

}  // namespace

PgoTermCosts PoseGraphCost(const PoseGraph& g) {
  PgoTermCosts c;
  for (const auto& e : g.edges) {
    c.relative += g.weights.relative * e.weight *
                  RelativeEdgeResidual(g.vertices[e.i], g.vertices[e.j], e.measurement)
                      .squaredNorm();
  }
  for (int v = 0; v < g.NumVertices(); ++v) {
    c.absolute += g.weights.absolute *
                  PoseResidual(g.vertices[v], g.priors[v], ResidualWeights::Identity())
                      .squaredNorm();
  }
  for (const ImageId v : g.IsolatedVertices()) {
    if (!HasSmoothTerm(g, v)) continue;
    c.smooth += g.weights.smooth *
                SmoothResidual(g.vertices[v - 1], g.vertices[v], g.vertices[v + 1])
                    .squaredNorm();
  }
  return c;
}

PoseGraphProblem::PoseGraphProblem(PoseGraph& graph)
    : graph_(graph), isolated_(graph.IsolatedVertices()) {
  for (int v = 0; v < graph.NumVertices(); ++v) layout_.AddBlock(6);
}

double PoseGraphProblem::Evaluate(optim::NormalEquations* normal) {
  // Cost = 0.5 * (Eq. 3 objective); each residual carries sqrt of its scalar.
  const PoseGraph& g = graph_;
  const bool lin = normal != nullptr;
  double cost = 0.0;
  Matrix6d j0, j1, j2;
  std::vector<optim::JacobianBlock> blocks;
  for (const auto& e : g.edges) {
    const double s = std::sqrt(g.weights.relative * e.weight);
    if (s == 0.0) continue;
    const Vector6d r = s * RelativeEdgeResidual(g.vertices[e.i], g.vertices[e.j], e.measurement,
                                                lin ? &j0 : nullptr, lin ? &j1 : nullptr);
    cost += 0.5 * r.squaredNorm();
    if (!lin) continue;
    blocks = {{e.i, s * j0}, {e.j, s * j1}};
    normal->AddResidual(r, blocks);
  }
  const double sa = std::sqrt(g.weights.absolute);
  if (sa > 0.0) {
    for (int v = 0; v < g.NumVertices(); ++v) {
      const Vector6d r = sa * PoseResidual(g.vertices[v], g.priors[v],
                                           ResidualWeights::Identity(), lin ? &j0 : nullptr);
      cost += 0.5 * r.squaredNorm();
      if (!lin) continue;
      blocks = {{v, sa * j0}};
      normal->AddResidual(r, blocks);
    }
  }
  const double ss = std::sqrt(g.weights.smooth);
  if (ss > 0.0) {
    for (const ImageId v : isolated_) {
      if (!HasSmoothTerm(g, v)) continue;
      const Vector6d r =
          ss * SmoothResidual(g.vertices[v - 1], g.vertices[v], g.vertices[v + 1],
                              lin ? &j0 : nullptr, lin ? &j1 : nullptr, lin ? &j2 : nullptr);
      cost += 0.5 * r.squaredNorm();
      if (!lin) continue;
      blocks = {{v - 1, ss * j0}, {v, ss * j1}, {v + 1, ss * j2}};
      normal->AddResidual(r, blocks);
    }
  }
  return cost;
}

void PoseGraphProblem::Step(const Eigen::VectorXd& delta) {
  for (int v = 0; v < graph_.NumVertices(); ++v) {
    graph_.vertices[v] = graph_.vertices[v].Retract(delta.segment<6>(layout_.Offset(v)));
  }
}

PgoReport OptimizePoseGraph(PoseGraph& graph, const optim::SolverOptions& options) {
  if (!graph.weights.IsValid()) throw std::invalid_argument("negative PGO weight");
  for (const auto& e : graph.edges) {
    if (e.i < 0 || e.j < 0 || e.i >= graph.NumVertices() || e.j >= graph.NumVertices()) {
      throw std::invalid_argument("pose graph edge references a missing vertex");
    }
  }
  PgoReport report;
  report.initial = PoseGraphCost(graph);
  PoseGraphProblem problem(graph);
  report.summary = optim::SolveLevenbergMarquardt(problem, options);
  report.final = PoseGraphCost(graph);
  return report;
}

namespace {

void WritePose(std::ostream& out, const Pose& p) {
  const Eigen::Quaterniond& q = p.rotation();
  out << ' ' << q.w() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << ' '
      << p.translation().x() << ' ' << p.translation().y() << ' ' << p.translation().z();
}

Pose ReadPose(std::istream& in) {
  double qw, qx, qy, qz, tx, ty, tz;
  if (!(in >> qw >> qx >> qy >> qz >> tx >> ty >> tz)) {
    throw std::runtime_error("malformed pose");
  }
  return Pose(Eigen::Quaterniond(qw, qx, qy, qz), Eigen::Vector3d(tx, ty, tz));
}

}  // namespace

void WritePoseGraph(std::ostream& out, const PoseGraph& g) {
  out << std::setprecision(17);
  out << "WEIGHTS " << g.weights.relative << ' ' << g.weights.absolute << ' '
      << g.weights.smooth << '\n';
  for (int v = 0; v < g.NumVertices(); ++v) {
    out << "VERTEX " << v;
    WritePose(out, g.vertices[v]);
    out << '\n';
  }
  for (int v = 0; v < static_cast<int>(g.priors.size()); ++v) {
    out << "PRIOR " << v;
    WritePose(out, g.priors[v]);
    out << '\n';
  }
  for (const auto& e : g.edges) {
    out << "EDGE " << e.i << ' ' << e.j;
    WritePose(out, e.measurement);
    out << ' ' << e.shared_landmarks << ' ' << e.weight << '\n';
  }
}

PoseGraph ReadPoseGraph(std::istream& in) {
  PoseGraph g;
  std::string line;
  int line_no = 0;
  std::map<int, Pose> vertices, priors;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    try {
      if (tag == "WEIGHTS") {
        if (!(ls >> g.weights.relative >> g.weights.absolute >> g.weights.smooth)) {
          throw std::runtime_error("malformed weights");
        }
      } else if (tag == "VERTEX" || tag == "PRIOR") {
        int id;
        if (!(ls >> id) || id < 0) throw std::runtime_error("bad vertex id");
        (tag == "VERTEX" ? vertices : priors)[id] = ReadPose(ls);
      } else if (tag == "EDGE") {
        RelativeEdge e;
        if (!(ls >> e.i >> e.j)) throw std::runtime_error("bad edge ids");
        e.measurement = ReadPose(ls);
        if (!(ls >> e.shared_landmarks >> e.weight)) throw std::runtime_error("bad edge weight");
        g.edges.push_back(e);
      } else {
        throw std::runtime_error("unknown record '" + tag + "'");
      }
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("pose graph line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  const int n = vertices.empty() ? 0 : vertices.rbegin()->first + 1;
  if (static_cast<int>(vertices.size()) != n || static_cast<int>(priors.size()) != n) {
    throw std::runtime_error("pose graph vertices/priors must be dense and matching");
  }
  for (const auto& [id, p] : vertices) g.vertices.push_back(p);
  for (const auto& [id, p] : priors) g.priors.push_back(p);
  for (const auto& e : g.edges) {
    if (e.i >= n || e.j >= n) throw std::runtime_error("pose graph edge references a missing vertex");
  }
  return g;
}

}  // namespace navsfm
