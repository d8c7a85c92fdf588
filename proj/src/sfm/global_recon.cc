#include "navsfm/sfm/global_recon.h"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <stdexcept>

#include "navsfm/util/parallel.h"

namespace navsfm {

MergedTracks MergeTracks(const std::vector<SubReconstruction>& subs, const ViewGraph& graph,
                         const TrackMergeOptions& options) {
  MergedTracks out;
  TrackBuilder builder;
  std::unordered_map<uint64_t, bool> on_track;
  for (const auto& sub : subs) {
    for (const auto& l : sub.recon.landmarks) {
      ++out.num_input_tracks;
      for (const auto& e : l.track) on_track[FeatureKey(e.image, e.feature)] = true;
      for (size_t k = 1; k < l.track.size(); ++k) builder.Link(l.track[0], l.track[k]);
    }
  }
  if (options.link_matches) {
    for (const auto& edge : graph.Edges()) {
      for (const auto& m : edge.inliers) {
        if (!on_track.contains(FeatureKey(edge.image1, m.feature1)) ||
            !on_track.contains(FeatureKey(edge.image2, m.feature2))) {
          continue;
        }
        builder.Link({edge.image1, m.feature1}, {edge.image2, m.feature2});
      }
    }
  }
  out.tracks = MakeTrackSet(builder.Build(options.min_track_length));
  out.num_conflicts_dropped = builder.NumConflictsDropped();
  return out;
}

TrackSet MatchTracks(const ViewGraph& graph, int min_track_length) {
  // Strongest pairs first; a link that would put two observations of one
  // image into a track is refused.
  std::vector<const ViewGraphEdge*> order;
  for (const auto& e : graph.Edges()) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->num_matches != b->num_matches) return a->num_matches > b->num_matches;
    return std::tie(a->image1, a->image2) < std::tie(b->image1, b->image2);
  });
  TrackBuilder builder;
  for (const ViewGraphEdge* edge : order) {
    for (const auto& m : edge->inliers) {
      builder.LinkConsistent({edge->image1, m.feature1}, {edge->image2, m.feature2});
    }
  }
  return MakeTrackSet(builder.Build(min_track_length));
}

Reconstruction Retriangulate(const TrackSet& tracks, const std::map<ImageId, Pose>& poses,
                             const CameraIntrinsics& camera, const FeatureTable& features,
                             const TriangulationOptions& options,
                             RetriangulationReport* report, int num_threads) {
  const int n = static_cast<int>(tracks.tracks.size());
  std::vector<TriangulationResult> results(n);
  std::vector<std::vector<TrackElement>> used(n);
  ParallelFor(n, num_threads, [&](int t) {
    std::vector<TriangulationObservation> obs;
    for (const auto& e : tracks.tracks[t]) {
      const auto it = poses.find(e.image);
      if (it == poses.end()) continue;
      obs.push_back({it->second, &camera, features.Pixel(e.image, e.feature)});
      used[t].push_back(e);
    }
    results[t] = TriangulatePoint(obs, options);
  });
  Reconstruction recon;
  recon.poses = poses;
  RetriangulationReport r;
  r.num_tracks = n;
  for (int t = 0; t < n; ++t) {
    ++r.status_counts[static_cast<int>(results[t].status)];
    if (!results[t].ok()) continue;
    recon.landmarks.push_back({t, results[t].point, std::move(used[t])});
  }
  if (report != nullptr) *report = r;
  return recon;
}

BundleAdjustmentOptions GlobalBundleAdjustmentOptions::Default() {
  BundleAdjustmentOptions o;
  o.prior.weights = ResidualWeights::Isotropic(180.0 / M_PI, 2.0);
  o.refine_intrinsics = true;
  // The rig translation is nearly unobservable on level lawnmower surveys
  // (it trades against a global shift of the scene); opt-in only.
  o.refine_rig = false;
  o.solver.max_iterations = 100;
  return o;
}

GlobalBundleAdjustmentReport GlobalBundleAdjust(Reconstruction& recon, CameraIntrinsics& camera,
                                                RigExtrinsics& rig,
                                                const std::vector<Pose>& nav_priors,
                                                const FeatureTable& features,
                                                const GlobalBundleAdjustmentOptions& options) {
  GlobalBundleAdjustmentReport report;
  for (int pass = 0; pass <= options.max_filter_passes; ++pass) {
    report.passes.push_back(BundleAdjust(recon, camera, rig, nav_priors, features, options.ba));
    if (pass == options.max_filter_passes) break;
    const int removed =
        FilterByReprojection(recon, camera, features, options.max_reprojection_error);
    report.observations_removed += removed;
    if (removed == 0) break;
  }
  return report;
}

int GlobalReconstruction::NumRegistered() const {
  int n = 0;
  for (const bool r : registered) n += r;
  return n;
}

double AbsoluteTrajectoryError(const std::map<ImageId, Pose>& poses,
                               const std::vector<Pose>& reference) {
  if (poses.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [image, pose] : poses) {
    if (image < 0 || image >= static_cast<int>(reference.size())) {
      throw std::out_of_range("trajectory reference misses an image");
    }
    sum += (pose.Center() - reference[image].Center()).squaredNorm();
  }
  return std::sqrt(sum / poses.size());
}

ReconstructionMetrics ComputeMetrics(const Reconstruction& recon, const CameraIntrinsics& camera,
                                     const FeatureTable& features, int num_images,
                                     const std::vector<Pose>& reference) {
  ReconstructionMetrics m;
  m.num_images = num_images;
  m.num_registered = static_cast<int>(recon.poses.size());
  m.num_landmarks = static_cast<int>(recon.landmarks.size());
  m.num_observations = static_cast<int>(recon.NumObservations());
  m.mean_track_length = recon.MeanTrackLength();
  m.mean_reprojection_error = recon.MeanReprojectionError(camera, features);
  m.ate_rmse = AbsoluteTrajectoryError(recon.poses, reference);
  return m;
}

std::string ToString(DirectTriangulationMode mode) {
  switch (mode) {
    case DirectTriangulationMode::kPriors: return "priors";
    case DirectTriangulationMode::kPgo: return "pgo";
    case DirectTriangulationMode::kPgoInlier: return "pgo_inlier";
  }
  return "unknown";
}

DirectTriangulationResult DirectTriangulation(DirectTriangulationMode mode,
                                              const TrackSet& match_tracks,
                                              const TrackSet& inlier_tracks,
                                              const std::vector<Pose>& camera_priors,
                                              const std::vector<Pose>& pgo_poses,
                                              const CameraIntrinsics& camera,
                                              const FeatureTable& features, int num_threads) {
  const std::vector<Pose>& source =
      mode == DirectTriangulationMode::kPriors ? camera_priors : pgo_poses;
  const TrackSet& tracks = mode == DirectTriangulationMode::kPgoInlier ? inlier_tracks : match_tracks;
  std::map<ImageId, Pose> poses;
  for (ImageId i = 0; i < static_cast<ImageId>(source.size()); ++i) poses[i] = source[i];
  // No reprojection gate: the error is what is being measured.
  TriangulationOptions gates;
  gates.max_reprojection_error = 0.0;
  DirectTriangulationResult r;
  r.mode = mode;
  const Reconstruction recon =
      Retriangulate(tracks, poses, camera, features, gates, &r.report, num_threads);
  r.mean_reprojection_error = recon.MeanReprojectionError(camera, features);
  r.mean_track_length = recon.MeanTrackLength();
  r.num_landmarks = static_cast<int>(recon.landmarks.size());
  return r;
}

}  // namespace navsfm
