#include "navsfm/io/survey_io.h"

#include <filesystem>

#include "navsfm/io/config.h"
#include "navsfm/io/matches.h"

namespace navsfm::io {
namespace {

std::vector<NavigationRecord> ToRecords(const std::vector<Pose>& poses,
                                        const std::vector<double>& timestamps,
                                        const Eigen::Vector3d& offset, const GeoAnchor& origin) {
  std::vector<NavigationRecord> records;
  for (size_t i = 0; i < poses.size(); ++i) {
    const Pose shifted = Pose::FromCenter(poses[i].rotation(), poses[i].Center() - offset);
    records.push_back(PoseToRecord(shifted, static_cast<ImageId>(i), timestamps[i], origin));
  }
  return records;
}

}  // namespace

SurveyFiles SurveyFiles::InDirectory(const std::string& dir) {
  const std::filesystem::path d(dir);
  return {(d / "navigation.csv").string(), (d / "matches.nsfm").string(),
          (d / "camera.json").string(), (d / "truth.csv").string()};
}

LoadedSurvey LoadSurvey(const SurveyFiles& files) {
  LoadedSurvey s;
  s.navigation = ReadNavigationFile(files.navigation);
  ReadCameraFile(files.camera, &s.input.camera, &s.input.rig);
  s.input.nav_priors = s.navigation.poses;
  s.input.matches = ReadMatchesFile(files.matches);
  if (s.input.matches.num_images != s.input.NumImages()) {
    throw FormatError("match file covers " + std::to_string(s.input.matches.num_images) +
                      " images but the navigation has " + std::to_string(s.input.NumImages()));
  }
  return s;
}

std::vector<Pose> LoadTruthCameraPoses(const std::string& path, const GeoAnchor& anchor,
                                       const RigExtrinsics& rig) {
  const Navigation truth = ReadNavigationFile(path, anchor);
  std::vector<Pose> poses;
  for (const Pose& p : truth.poses) poses.push_back(NavToCameraPrior(p, rig));
  return poses;
}

Eigen::Vector3d ExportOffset(const sim::SurveyTruth& truth) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const Pose& p : truth.nav_poses) mean += p.Center();
  if (!truth.nav_poses.empty()) mean /= static_cast<double>(truth.nav_poses.size());
  mean.z() = 0.0;
  return mean;
}

void ExportSimulation(const SurveyFiles& files, const sim::SurveyTruth& truth,
                      const std::vector<Pose>& nav_priors, const MatchSet& matches,
                      const GeoAnchor& origin) {
  for (const std::string& f : {files.navigation, files.matches, files.camera, files.truth}) {
    const auto parent = std::filesystem::path(f).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
  }
  const Eigen::Vector3d offset = ExportOffset(truth);
  WriteNavigationFile(files.navigation, ToRecords(nav_priors, truth.timestamps, offset, origin));
  WriteNavigationFile(files.truth, ToRecords(truth.nav_poses, truth.timestamps, offset, origin));
  WriteMatchesFile(files.matches, matches);
  WriteCameraFile(files.camera, truth.camera, truth.rig);
}

}  // namespace navsfm::io
