#include "navsfm/sfm/local_sfm.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <unordered_map>

#include "navsfm/geom/absolute_pose.h"
#include "navsfm/util/random.h"

namespace navsfm {

BundleAdjustmentOptions LocalSfmOptions::DefaultLocalBundleAdjustment() {
  BundleAdjustmentOptions ba;
  // Square-root information of 1 deg / 0.5 m navigation noise.
  ba.prior.weights = ResidualWeights::Isotropic(180.0 / std::numbers::pi, 2.0);
  ba.prior.loss_width = 2.0;
  ba.solver.max_iterations = 50;
  return ba;
}

SfmContext SfmContext::Make(const SurveyInput& input, const FeatureTable& features) {
  SfmContext c;
  c.input = &input;
  c.features = &features;
  c.camera_priors = input.CameraPriors();
  return c;
}

std::string ToString(InitStatus status) {
  switch (status) {
    case InitStatus::kSuccess: return "success";
    case InitStatus::kSmallBaseline: return "small_baseline";
    case InitStatus::kTooFewPoints: return "too_few_points";
  }
  return "unknown";
}

std::string ToString(RegisterStatus status) {
  switch (status) {
    case RegisterStatus::kSuccess: return "success";
    case RegisterStatus::kTooFewCorrespondences: return "too_few_correspondences";
    case RegisterStatus::kTooFewInliers: return "too_few_inliers";
  }
  return "unknown";
}

InitResult InitializePair(const ViewGraphEdge& edge, const SfmContext& context,
                          const LocalSfmOptions& options, const TrackSet* tracks) {
  InitResult result;
  const Pose& prior1 = context.camera_priors[edge.image1];
  const Pose& prior2 = context.camera_priors[edge.image2];
  const double baseline = (prior2.Center() - prior1.Center()).norm();
  if (!(baseline > options.min_seed_baseline)) {
    result.status = InitStatus::kSmallBaseline;
    return result;
  }
  const Pose pose1 = prior1;
  const Pose relative(Eigen::Quaterniond(edge.two_view.rotation).normalized(),
                      baseline * edge.two_view.translation.normalized());
  const Pose pose2 = relative * pose1;
  Reconstruction& recon = result.recon;
  recon.poses[edge.image1] = pose1;
  recon.poses[edge.image2] = pose2;

  const CameraIntrinsics& camera = context.input->camera;
  std::set<int> used_tracks;
  for (size_t k = 0; k < edge.inliers.size(); ++k) {
    const FeatureMatch& m = edge.inliers[k];
    LandmarkId id = static_cast<LandmarkId>(k);
    if (tracks != nullptr) {
      const int t = tracks->TrackOf(edge.image1, m.feature1);
      if (t < 0 || tracks->TrackOf(edge.image2, m.feature2) != t ||
          !used_tracks.insert(t).second) {
        continue;
      }
      id = t;
    }
    const TriangulationObservation obs[2] = {
        {pose1, &camera, context.features->Pixel(edge.image1, m.feature1)},
        {pose2, &camera, context.features->Pixel(edge.image2, m.feature2)}};
    const TriangulationResult tri = TriangulatePoint(obs, options.triangulation);
    if (!tri.ok()) continue;
    recon.landmarks.push_back(
        {id, tri.point, {{edge.image1, m.feature1}, {edge.image2, m.feature2}}});
  }
  result.status = static_cast<int>(recon.landmarks.size()) >= options.min_2d3d
                      ? InitStatus::kSuccess
                      : InitStatus::kTooFewPoints;
  return result;
}

namespace {

int CountPoseInliers(const CameraIntrinsics& camera, const Pose& pose,
                     const std::vector<Eigen::Vector2d>& pixels,
                     const std::vector<Eigen::Vector3d>& points, double threshold,
                     std::vector<bool>* mask, double* score) {
  int count = 0;
  double s = 0.0;
  const double t2 = threshold * threshold;
  for (size_t i = 0; i < points.size(); ++i) {
    const auto px = Project(points[i], camera, pose);
    const double e2 = px ? (*px - pixels[i]).squaredNorm() : t2;
    const bool in = e2 < t2;
    if (mask != nullptr) (*mask)[i] = in;
    if (in) {
      ++count;
      s += e2;
    }
  }
  if (score != nullptr) *score = s;
  return count;
}

}  // namespace

RegisterResult RegisterImage(const CameraIntrinsics& camera,
                             const std::vector<Eigen::Vector2d>& pixels,
                             const std::vector<Eigen::Vector3d>& points,
                             const LocalSfmOptions& options, uint64_t seed) {
  RegisterResult result;
  const int n = static_cast<int>(points.size());
  result.inlier_mask.assign(n, false);
  if (n < std::max(3, options.min_2d3d)) {
    result.status = RegisterStatus::kTooFewCorrespondences;
    return result;
  }
  std::vector<Eigen::Vector3d> rays(n);
  for (int i = 0; i < n; ++i) rays[i] = Unproject(camera, pixels[i]);

  auto rng = StreamEngine(seed, 0x7033);
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  int best_count = -1;
  double best_score = 0.0;
  Pose best_pose;
  int needed = options.abs_pose_max_iterations;
  std::vector<Eigen::Vector3d> sample_rays(3), sample_points(3);
  for (int it = 0; it < std::min(needed, options.abs_pose_max_iterations); ++it) {
    for (int k = 0; k < 3; ++k) {
      std::uniform_int_distribution<int> pick(k, n - 1);
      std::swap(indices[k], indices[pick(rng)]);
      sample_rays[k] = rays[indices[k]];
      sample_points[k] = points[indices[k]];
    }
    for (const Pose& pose : AbsolutePoseP3P(sample_rays, sample_points)) {
      double score;
      const int count = CountPoseInliers(camera, pose, pixels, points,
                                         options.max_reprojection_error, nullptr, &score);
      if (count > best_count || (count == best_count && score < best_score)) {
        best_count = count;
        best_score = score;
        best_pose = pose;
        const double p_fail = 1.0 - std::pow(static_cast<double>(count) / n, 3);
        if (p_fail <= 0.0) {
          needed = 0;
        } else if (p_fail < 1.0) {
          needed = static_cast<int>(
              std::ceil(std::log(1.0 - options.abs_pose_confidence) / std::log(p_fail)));
        }
      }
    }
  }
  if (best_count < 3) {
    result.status = RegisterStatus::kTooFewInliers;
    return result;
  }

  Pose pose = best_pose;
  for (int round = 0; round < 2; ++round) {
    CountPoseInliers(camera, pose, pixels, points, options.max_reprojection_error,
                     &result.inlier_mask, nullptr);
    std::vector<Eigen::Vector2d> in_px;
    std::vector<Eigen::Vector3d> in_pts;
    for (int i = 0; i < n; ++i) {
      if (!result.inlier_mask[i]) continue;
      in_px.push_back(pixels[i]);
      in_pts.push_back(points[i]);
    }
    if (static_cast<int>(in_pts.size()) < 3) break;
    Pose refined = pose;
    if (RefineAbsolutePose(camera, in_px, in_pts, &refined)) pose = refined;
  }
  result.num_inliers = CountPoseInliers(camera, pose, pixels, points,
                                        options.max_reprojection_error,
                                        &result.inlier_mask, nullptr);
  result.pose = pose;
  result.status = result.num_inliers >= options.min_2d3d ? RegisterStatus::kSuccess
                                                         : RegisterStatus::kTooFewInliers;
  return result;
}

int CountSharedPoints(const ViewGraphEdge& edge, const Reconstruction& recon) {
  std::unordered_map<uint64_t, size_t> landmark_of;
  for (size_t l = 0; l < recon.landmarks.size(); ++l) {
    for (const auto& e : recon.landmarks[l].track) {
      if (e.image == edge.image1 || e.image == edge.image2) {
        landmark_of[FeatureKey(e.image, e.feature)] = l;
      }
    }
  }
  int shared = 0;
  for (const auto& m : edge.inliers) {
    const auto a = landmark_of.find(FeatureKey(edge.image1, m.feature1));
    const auto b = landmark_of.find(FeatureKey(edge.image2, m.feature2));
    if (a != landmark_of.end() && b != landmark_of.end() && a->second == b->second) {
      ++shared;
    }
  }
  return shared;
}

namespace {

// Incremental mapper state for one cluster.
class ClusterMapper {
 public:
  ClusterMapper(const Cluster& cluster, const ViewGraph& graph, const SfmContext& context,
                const LocalSfmOptions& options)
      : cluster_(cluster), graph_(graph), context_(context), options_(options) {
    for (const auto& e : graph.Edges()) {
      if (cluster.Contains(e.image1) && cluster.Contains(e.image2)) edges_.push_back(&e);
    }
    TrackBuilder builder;
    for (const ViewGraphEdge* e : edges_) {
      for (const auto& m : e->inliers) {
        builder.Link({e->image1, m.feature1}, {e->image2, m.feature2});
      }
    }
    tracks_ = MakeTrackSet(builder.Build(2));
    landmark_of_track_.assign(tracks_.tracks.size(), -1);
    for (int t = 0; t < static_cast<int>(tracks_.tracks.size()); ++t) {
      for (const auto& el : tracks_.tracks[t]) image_tracks_[el.image].push_back(t);
    }
  }

  ClusterResult Run() {
    ClusterResult result;
    result.sub.cluster_id = cluster_.id;
    result.sub.members = cluster_.members;
    if (!Seed()) {
      result.sub.unregistered = cluster_.members;
      return result;
    }
    result.seeded = true;
    Bundle();
    int since_ba = 0;
    std::set<ImageId> failed;
    while (true) {
      const ImageId next = NextImage(failed);
      if (next < 0) break;
      if (!Register(next)) {
        failed.insert(next);
        continue;
      }
      failed.clear();
      const int interval = std::max(
          options_.ba_interval_min,
          static_cast<int>(std::ceil(options_.ba_interval_fraction * recon_.poses.size())));
      if (++since_ba >= interval) {
        Bundle();
        since_ba = 0;
      }
    }
    Bundle();
    // Images dropped by the last filter pass would otherwise leave landmarks
    // with fewer than two observations.
    Compact();

    result.sub.recon = recon_;
    for (const ImageId i : cluster_.members) {
      if (!recon_.IsRegistered(i)) result.sub.unregistered.push_back(i);
    }
    for (const ViewGraphEdge* e : edges_) {
      if (!recon_.IsRegistered(e->image1) || !recon_.IsRegistered(e->image2)) continue;
      EdgeUpgrade up;
      up.image1 = e->image1;
      up.image2 = e->image2;
      up.num_shared_points = CountSharedPoints(*e, recon_);
      up.metric_relative =
          Relative(recon_.poses.at(e->image2), recon_.poses.at(e->image1));
      result.upgrades.push_back(up);
    }
    result.num_bundle_adjustments = num_ba_;
    return result;
  }

 private:
  bool Seed() {
    std::vector<const ViewGraphEdge*> order = edges_;
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
      return a->num_matches > b->num_matches;
    });
    for (const ViewGraphEdge* e : order) {
      InitResult init = InitializePair(*e, context_, options_, &tracks_);
      if (!init.ok()) continue;
      recon_ = std::move(init.recon);
      Reindex();
      return true;
    }
    return false;
  }

  void Reindex() {
    std::fill(landmark_of_track_.begin(), landmark_of_track_.end(), -1);
    for (int l = 0; l < static_cast<int>(recon_.landmarks.size()); ++l) {
      landmark_of_track_[recon_.landmarks[l].id] = l;
    }
  }

  // Registered-image correspondence count per candidate.
  ImageId NextImage(const std::set<ImageId>& failed) const {
    ImageId best = -1;
    int best_count = options_.min_2d3d - 1;
    for (const ImageId i : cluster_.members) {
      if (recon_.IsRegistered(i) || failed.contains(i)) continue;
      const auto it = image_tracks_.find(i);
      if (it == image_tracks_.end()) continue;
      int count = 0;
      for (const int t : it->second) count += landmark_of_track_[t] >= 0;
      if (count > best_count) {
        best_count = count;
        best = i;
      }
    }
    return best;
  }

  bool Register(ImageId image) {
    std::vector<Eigen::Vector2d> pixels;
    std::vector<Eigen::Vector3d> points;
    std::vector<std::pair<int, FeatureId>> refs;  // landmark, feature
    for (const int t : image_tracks_.at(image)) {
      const int l = landmark_of_track_[t];
      if (l < 0) continue;
      const FeatureId f = FeatureIn(t, image);
      pixels.push_back(context_.features->Pixel(image, f));
      points.push_back(recon_.landmarks[l].position);
      refs.emplace_back(l, f);
    }
    const RegisterResult reg =
        RegisterImage(context_.input->camera, pixels, points, options_,
                      SplitMix64(options_.seed ^ (static_cast<uint64_t>(image) << 20) ^
                                 recon_.poses.size()));
    if (!reg.ok()) return false;
    recon_.poses[image] = reg.pose;
    for (size_t k = 0; k < refs.size(); ++k) {
      if (reg.inlier_mask[k]) {
        recon_.landmarks[refs[k].first].track.push_back({image, refs[k].second});
      }
    }
    TriangulateNew(image);
    return true;
  }

  FeatureId FeatureIn(int track, ImageId image) const {
    for (const auto& e : tracks_.tracks[track]) {
      if (e.image == image) return e.feature;
    }
    return 0;
  }

  void TriangulateNew(ImageId image) {
    const CameraIntrinsics& camera = context_.input->camera;
    for (const int t : image_tracks_.at(image)) {
      if (landmark_of_track_[t] >= 0) continue;
      std::vector<TriangulationObservation> obs;
      std::vector<TrackElement> elements;
      for (const auto& e : tracks_.tracks[t]) {
        const auto it = recon_.poses.find(e.image);
        if (it == recon_.poses.end()) continue;
        obs.push_back({it->second, &camera, context_.features->Pixel(e.image, e.feature)});
        elements.push_back(e);
      }
      if (obs.size() < 2) continue;
      const TriangulationResult tri = TriangulatePoint(obs, options_.triangulation);
      if (!tri.ok()) continue;
      landmark_of_track_[t] = static_cast<int>(recon_.landmarks.size());
      recon_.landmarks.push_back({t, tri.point, std::move(elements)});
    }
  }

  void Bundle() {
    CameraIntrinsics camera = context_.input->camera;
    RigExtrinsics rig = context_.input->rig;
    BundleAdjust(recon_, camera, rig, context_.input->nav_priors, *context_.features,
                 options_.ba);
    ++num_ba_;
    FilterObservations();
  }

  void FilterObservations() {
    const CameraIntrinsics& camera = context_.input->camera;
    const double t2 = options_.max_reprojection_error * options_.max_reprojection_error;
    for (auto& l : recon_.landmarks) {
      std::erase_if(l.track, [&](const TrackElement& e) {
        const auto px = Project(l.position, camera, recon_.poses.at(e.image));
        return !px || (*px - context_.features->Pixel(e.image, e.feature)).squaredNorm() > t2;
      });
    }
    Compact();
  }

  void Compact() {
    std::erase_if(recon_.landmarks, [](const Landmark& l) { return l.track.size() < 2; });
    Reindex();
  }

  const Cluster& cluster_;
  const ViewGraph& graph_;
  const SfmContext& context_;
  const LocalSfmOptions& options_;
  std::vector<const ViewGraphEdge*> edges_;
  TrackSet tracks_;
  std::unordered_map<ImageId, std::vector<int>> image_tracks_;
  std::vector<int> landmark_of_track_;
  Reconstruction recon_;
  int num_ba_ = 0;
};

}  // namespace

ClusterResult ReconstructCluster(const Cluster& cluster, const ViewGraph& graph,
                                 const SfmContext& context, const LocalSfmOptions& options) {
  return ClusterMapper(cluster, graph, context, options).Run();
}

}  // namespace navsfm
