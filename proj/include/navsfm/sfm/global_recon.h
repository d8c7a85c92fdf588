#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "navsfm/geom/triangulation.h"
#include "navsfm/scene.h"
#include "navsfm/sfm/bundle_adjustment.h"
#include "navsfm/sfm/reconstruction.h"
#include "navsfm/sfm/tracks.h"
#include "navsfm/viewgraph/view_graph.h"

namespace navsfm {

struct TrackMergeOptions {
  int min_track_length = 2;
  // Also join tracks through verified matches whose two features both lie
  // on reconstructed tracks.
  bool link_matches = false;
};

struct MergedTracks {
  TrackSet tracks;
  int num_input_tracks = 0;
  int num_conflicts_dropped = 0;
};

// Union of the landmark tracks of all sub-reconstructions.
MergedTracks MergeTracks(const std::vector<SubReconstruction>& subs, const ViewGraph& graph,
                         const TrackMergeOptions& options = {});

// Tracks from all verified matches of the view graph.
TrackSet MatchTracks(const ViewGraph& graph, int min_track_length = 2);

struct RetriangulationReport {
  int num_tracks = 0;
  std::array<int, 5> status_counts{};  // indexed by TriangulationStatus

  int NumSucceeded() const { return status_counts[0]; }
  double DropRate() const {
    return num_tracks == 0 ? 0.0 : 1.0 - static_cast<double>(NumSucceeded()) / num_tracks;
  }
};

// Triangulates every track against the given poses; observations in images
// without a pose are ignored. Landmark id = track index.
Reconstruction Retriangulate(const TrackSet& tracks, const std::map<ImageId, Pose>& poses,
                             const CameraIntrinsics& camera, const FeatureTable& features,
                             const TriangulationOptions& options,
                             RetriangulationReport* report = nullptr, int num_threads = 1);

struct GlobalBundleAdjustmentOptions {
  BundleAdjustmentOptions ba = Default();
  double max_reprojection_error = 4.0;  // px, post-BA observation filter
  int max_filter_passes = 2;

  static BundleAdjustmentOptions Default();
};

struct GlobalBundleAdjustmentReport {
  std::vector<BundleAdjustmentReport> passes;
  int observations_removed = 0;
};

// BA with intrinsics and rig refinement, alternated with outlier filtering.
GlobalBundleAdjustmentReport GlobalBundleAdjust(Reconstruction& recon, CameraIntrinsics& camera,
                                                RigExtrinsics& rig,
                                                const std::vector<Pose>& nav_priors,
                                                const FeatureTable& features,
                                                const GlobalBundleAdjustmentOptions& options = {});

struct GlobalReconstruction {
  Reconstruction recon;  // registered images only
  std::vector<Pose> trajectory;  // every image; unregistered ones from the pose graph
  std::vector<bool> registered;
  CameraIntrinsics camera;
  RigExtrinsics rig;

  int NumRegistered() const;
};

// RMSE of camera-centre differences over the given poses (identity
// alignment: both are metric and in the same frame).
double AbsoluteTrajectoryError(const std::map<ImageId, Pose>& poses,
                               const std::vector<Pose>& reference);

struct ReconstructionMetrics {
  int num_images = 0;
  int num_registered = 0;
  int num_landmarks = 0;
  int num_observations = 0;
  double mean_track_length = 0.0;
  double mean_reprojection_error = 0.0;  // px
  double ate_rmse = 0.0;                 // m
};

ReconstructionMetrics ComputeMetrics(const Reconstruction& recon, const CameraIntrinsics& camera,
                                     const FeatureTable& features, int num_images,
                                     const std::vector<Pose>& reference);

enum class DirectTriangulationMode { kPriors, kPgo, kPgoInlier };
std::string ToString(DirectTriangulationMode mode);

struct DirectTriangulationResult {
  DirectTriangulationMode mode = DirectTriangulationMode::kPriors;
  double mean_reprojection_error = 0.0;
  double mean_track_length = 0.0;
  int num_landmarks = 0;
  RetriangulationReport report;
};

// Triangulation without any bundle adjustment: verified-match tracks against
// the priors or the pose-graph poses, or the reconstructed (inlier) tracks
// against the pose-graph poses.
DirectTriangulationResult DirectTriangulation(DirectTriangulationMode mode,
                                              const TrackSet& match_tracks,
                                              const TrackSet& inlier_tracks,
                                              const std::vector<Pose>& camera_priors,
                                              const std::vector<Pose>& pgo_poses,
                                              const CameraIntrinsics& camera,
                                              const FeatureTable& features,
                                              int num_threads = 1);

}  // namespace navsfm
