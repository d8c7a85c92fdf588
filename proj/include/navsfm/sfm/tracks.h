#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "navsfm/scene.h"

namespace navsfm {

inline uint64_t FeatureKey(ImageId image, FeatureId feature) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(image)) << 32) | feature;
}

// Union-find over (image, feature) observations. Every observation carries
// the order in which it first joined a link, which decides conflicts.
class TrackBuilder {
 public:
  void Link(const TrackElement& a, const TrackElement& b);
  // Links only if the two components share no image. Returns false (and
  // leaves both untouched) on conflict.
  bool LinkConsistent(const TrackElement& a, const TrackElement& b);
  // Adds an observation without linking it.
  void Add(const TrackElement& e) { Index(e); }

  // Connected components with at least min_size elements. When a component
  // holds two observations of one image, only the earliest-joined is kept.
  // Tracks are sorted by image; the list is sorted by first element.
  std::vector<std::vector<TrackElement>> Build(int min_size = 2) const;

  int NumConflictsDropped() const { return conflicts_dropped_; }

 private:
  int Index(const TrackElement& e);
  int Find(int i) const;
  void Unite(int ra, int rb);

  std::unordered_map<uint64_t, int> index_;
  std::vector<TrackElement> elements_;
  mutable std::vector<int> parent_;
  std::vector<int> rank_;
  // Sorted images per root; maintained by LinkConsistent only.
  std::unordered_map<int, std::vector<ImageId>> images_;
  mutable int conflicts_dropped_ = 0;
};

struct TrackSet {
  std::vector<std::vector<TrackElement>> tracks;
  std::unordered_map<uint64_t, int> track_of;

  // Track containing the observation, or -1.
  int TrackOf(ImageId image, FeatureId feature) const {
    const auto it = track_of.find(FeatureKey(image, feature));
    return it == track_of.end() ? -1 : it->second;
  }
};

TrackSet MakeTrackSet(std::vector<std::vector<TrackElement>> tracks);

}  // namespace navsfm
