#pragma once

#include <string>
#include <vector>

#include "navsfm/io/navigation.h"
#include "navsfm/scene.h"
#include "navsfm/sim/survey_sim.h"

namespace navsfm::io {

// The files describing one survey.
struct SurveyFiles {
  std::string navigation;  // navigation CSV
  std::string matches;     // binary match file
  std::string camera;      // camera.json (intrinsics and rig)
  std::string truth;       // exact navigation CSV, simulation only

  static SurveyFiles InDirectory(const std::string& dir);
};

struct LoadedSurvey {
  SurveyInput input;
  Navigation navigation;
};

// Throws FormatError / ConfigError / std::runtime_error; also rejects
// match files whose image count differs from the navigation.
LoadedSurvey LoadSurvey(const SurveyFiles& files);

// Camera-frame reference poses from a truth navigation file, converted with
// the anchor of the survey being evaluated.
std::vector<Pose> LoadTruthCameraPoses(const std::string& path, const GeoAnchor& anchor,
                                       const RigExtrinsics& rig);

// Writes a simulated survey. Positions are shifted so the true track has
// zero mean north/east before geodetic conversion around `origin`; the
// centroid anchor used when reading then differs from `origin` only by the
// mean navigation error, and priors and truth share that frame.
void ExportSimulation(const SurveyFiles& files, const sim::SurveyTruth& truth,
                      const std::vector<Pose>& nav_priors, const MatchSet& matches,
                      const GeoAnchor& origin);

// Offset subtracted from simulation-frame positions by ExportSimulation.
Eigen::Vector3d ExportOffset(const sim::SurveyTruth& truth);

}  // namespace navsfm::io
