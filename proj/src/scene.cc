#include "navsfm/scene.h"

namespace navsfm {

FeatureTable::FeatureTable(const MatchSet& matches)
    : pixels_(matches.num_images), valid_(matches.num_images) {
  for (const auto& pair : matches.pairs) {
    for (const auto& m : pair.matches) {
      if (!Has(pair.image1, m.feature1)) Set(pair.image1, m.feature1, m.pixel1);
      if (!Has(pair.image2, m.feature2)) Set(pair.image2, m.feature2, m.pixel2);
    }
  }
}

void FeatureTable::Set(ImageId image, FeatureId feature,
                       const Eigen::Vector2d& pixel) {
  if (image >= NumImages()) {
    pixels_.resize(image + 1);
    valid_.resize(image + 1);
  }
  if (feature >= pixels_[image].size()) {
    pixels_[image].resize(feature + 1, Eigen::Vector2d::Zero());
    valid_[image].resize(feature + 1, false);
  }
  pixels_[image][feature] = pixel;
  valid_[image][feature] = true;
}

std::vector<Pose> SurveyInput::CameraPriors() const {
  std::vector<Pose> priors;
  priors.reserve(nav_priors.size());
  for (const Pose& nav : nav_priors) priors.push_back(NavToCameraPrior(nav, rig));
  return priors;
}

}  // namespace navsfm
