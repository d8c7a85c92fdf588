#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "navsfm/geom/camera.h"
#include "navsfm/geom/pose.h"
#include "navsfm/scene.h"
#include "navsfm/util/random.h"

namespace navsfm::sim {

// Lawnmower survey over a smooth random heightfield. World frame is local
// North-East-Down; the vehicle body is x forward, y starboard, z down.
struct SurveyConfig {
  int num_tracks = 4;
  double track_length = 48.0;   // m
  double track_spacing = 5.0;   // m
  double altitude = 8.0;        // m above the mean seafloor
  double image_interval = 2.0;  // m between exposures
  bool cross_track = true;
  double terrain_amplitude = 1.0;  // m, peak bump height
  double terrain_roughness = 2.0;  // bumps per 100 m^2
  double landmark_density = 0.5;   // points per m^2
  double fov_margin = 10.0;        // px excluded along the image border
  uint64_t seed = 1;

  int image_width = 800;
  int image_height = 600;
  double horizontal_fov_deg = 88.0;
  double seafloor_depth = 50.0;   // m
  double vehicle_speed = 1.0;     // m/s, for timestamps and drift
  double attitude_wobble_deg = 2.0;
  RigExtrinsics rig = DefaultRig();

  static RigExtrinsics DefaultRig();
  // Ground swath width across track at the nominal altitude.
  double SwathWidth() const;
  // Throws std::invalid_argument with a diagnostic when invalid.
  void Validate() const;
};

struct Observation {
  LandmarkId landmark = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

struct SurveyTruth {
  SurveyConfig config;
  CameraIntrinsics camera;
  RigExtrinsics rig;
  std::vector<Pose> camera_poses;  // ^cT_w
  std::vector<Pose> nav_poses;     // ^pT_w, exact
  std::vector<double> timestamps;  // s
  std::vector<int> track_index;    // num_tracks for the cross-track
  std::vector<Eigen::Vector3d> landmarks;  // id = index
  // Noise-free observations per image sorted by landmark id. The feature id
  // of an observation is its index in this list.
  std::vector<std::vector<Observation>> observations;

  int NumImages() const { return static_cast<int>(camera_poses.size()); }
  // Landmark observed by a feature, or -1.
  LandmarkId LandmarkOf(ImageId image, FeatureId feature) const;
};

struct WeakStrip {
  Eigen::Vector2d min_ne = Eigen::Vector2d::Zero();  // north, east (m)
  Eigen::Vector2d max_ne = Eigen::Vector2d::Zero();
  double dropout = 0.0;  // extra dropout probability inside the strip

  bool Contains(const Eigen::Vector3d& position) const;
};

struct NoiseModel {
  double nav_position_sigma = 0.0;      // m, per axis
  double nav_rotation_sigma_deg = 0.0;  // deg, per axis
  double nav_position_drift = 0.0;      // m / sqrt(s)
  double nav_rotation_drift_deg = 0.0;  // deg / sqrt(s)
  double pixel_sigma = 0.0;             // px
  double outlier_fraction = 0.0;
  double dropout = 0.0;
  std::vector<WeakStrip> weak_strips;

  void Validate() const;
};

// Per-pair ground-truth labels, aligned with MatchSet::pairs[i].matches.
struct SimulatedMatches {
  MatchSet matches;
  std::vector<std::vector<bool>> inlier;
};

SurveyTruth GenerateSurvey(const SurveyConfig& config);

// Noisy navigation priors ^pT_w (vehicle frame).
std::vector<Pose> CorruptNavigation(const SurveyTruth& truth,
                                    const NoiseModel& noise, uint64_t seed);

SimulatedMatches RenderObservations(const SurveyTruth& truth,
                                    const NoiseModel& noise, uint64_t seed);

// Convenience: priors + matches bundled as pipeline input.
SurveyInput MakeSurveyInput(const SurveyTruth& truth,
                            const std::vector<Pose>& nav_priors,
                            const SimulatedMatches& matches);

using navsfm::StreamEngine;

enum Stream : uint64_t {
  kStreamTerrain = 1,
  kStreamLandmarks = 2,
  kStreamNavigation = 3,
  kStreamPixel = 4,
  kStreamDropout = 5,
  kStreamOutlier = 6,
};

}  // namespace navsfm::sim
