#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "navsfm/geom/camera.h"
#include "navsfm/geom/pose.h"

namespace navsfm {

// Images are identified by their capture-order index.
using ImageId = int;
using FeatureId = uint32_t;
using LandmarkId = int64_t;

struct FeatureMatch {
  FeatureId feature1 = 0;
  FeatureId feature2 = 0;
  Eigen::Vector2d pixel1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d pixel2 = Eigen::Vector2d::Zero();

  bool operator==(const FeatureMatch&) const = default;
};

// Putative correspondences of one image pair, image1 < image2.
struct PairMatches {
  ImageId image1 = 0;
  ImageId image2 = 0;
  std::vector<FeatureMatch> matches;

  bool operator==(const PairMatches&) const = default;
};

struct MatchSet {
  int num_images = 0;
  std::vector<PairMatches> pairs;

  bool operator==(const MatchSet&) const = default;
};

// Per-image feature pixels reassembled from the match lists.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(const MatchSet& matches);

  int NumImages() const { return static_cast<int>(pixels_.size()); }
  int NumFeatures(ImageId image) const {
    return static_cast<int>(pixels_[image].size());
  }
  const Eigen::Vector2d& Pixel(ImageId image, FeatureId feature) const {
    return pixels_[image][feature];
  }
  bool Has(ImageId image, FeatureId feature) const {
    return feature < valid_[image].size() && valid_[image][feature];
  }
  void Set(ImageId image, FeatureId feature, const Eigen::Vector2d& pixel);

 private:
  std::vector<std::vector<Eigen::Vector2d>> pixels_;
  std::vector<std::vector<bool>> valid_;
};

struct TrackElement {
  ImageId image = 0;
  FeatureId feature = 0;

  auto operator<=>(const TrackElement&) const = default;
};

struct Landmark {
  LandmarkId id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::vector<TrackElement> track;
};

// Everything the reconstruction stages consume: calibrated camera, rig
// offset, navigation priors ^pT_w per image (capture order) and matches.
struct SurveyInput {
  CameraIntrinsics camera;
  RigExtrinsics rig;
  std::vector<Pose> nav_priors;
  MatchSet matches;

  int NumImages() const { return static_cast<int>(nav_priors.size()); }
  // Camera-frame priors ^c'T_w.
  std::vector<Pose> CameraPriors() const;
};

}  // namespace navsfm
