#pragma once

#include <map>
#include <vector>

#include "navsfm/geom/camera.h"
#include "navsfm/geom/pose.h"
#include "navsfm/scene.h"

namespace navsfm {

// Registered poses (metric, prior frame) plus landmarks with their tracks.
struct Reconstruction {
  std::map<ImageId, Pose> poses;
  std::vector<Landmark> landmarks;

  bool IsRegistered(ImageId image) const { return poses.contains(image); }
  size_t NumObservations() const;
  double MeanTrackLength() const;
  // Mean pixel distance between observations and projected landmarks.
  // Observations that project behind their camera count as missing.
  double MeanReprojectionError(const CameraIntrinsics& camera,
                               const FeatureTable& features) const;
};

// Removes observations reprojecting further than max_error px (or behind the
// camera) and landmarks left with fewer than two observations. Returns the
// number of observations removed.
int FilterByReprojection(Reconstruction& recon, const CameraIntrinsics& camera,
                         const FeatureTable& features, double max_error);

struct SubReconstruction {
  int cluster_id = -1;
  std::vector<ImageId> members;
  std::vector<ImageId> unregistered;
  Reconstruction recon;
};

}  // namespace navsfm
