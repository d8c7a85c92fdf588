#include "navsfm/sfm/reconstruction.h"

namespace navsfm {

size_t Reconstruction::NumObservations() const {
  size_t n = 0;
  for (const auto& l : landmarks) n += l.track.size();
  return n;
}

double Reconstruction::MeanTrackLength() const {
  if (landmarks.empty()) return 0.0;
  return static_cast<double>(NumObservations()) / landmarks.size();
}

double Reconstruction::MeanReprojectionError(
    const CameraIntrinsics& camera, const FeatureTable& features) const {
  double sum = 0.0;
  size_t count = 0;
  for (const auto& l : landmarks) {
    for (const auto& e : l.track) {
      const auto it = poses.find(e.image);
      if (it == poses.end()) continue;
      const auto proj = Project(l.position, camera, it->second);
      if (!proj) continue;
      sum += (*proj - features.Pixel(e.image, e.feature)).norm();
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / count;
}

int FilterByReprojection(Reconstruction& recon, const CameraIntrinsics& camera,
                         const FeatureTable& features, double max_error) {
  const double t2 = max_error * max_error;
  size_t removed = 0;
  for (auto& l : recon.landmarks) {
    removed += std::erase_if(l.track, [&](const TrackElement& e) {
      const auto it = recon.poses.find(e.image);
      if (it == recon.poses.end()) return true;
      const auto px = Project(l.position, camera, it->second);
      return !px || (*px - features.Pixel(e.image, e.feature)).squaredNorm() > t2;
    });
  }
  for (const auto& l : recon.landmarks) {
    if (l.track.size() < 2) removed += l.track.size();
  }
  std::erase_if(recon.landmarks, [](const Landmark& l) { return l.track.size() < 2; });
  return static_cast<int>(removed);
}

}  // namespace navsfm
