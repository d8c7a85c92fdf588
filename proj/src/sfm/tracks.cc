#include "navsfm/sfm/tracks.h"

#include <algorithm>
#include <map>

namespace navsfm {

int TrackBuilder::Index(const TrackElement& e) {
  const auto [it, inserted] =
      index_.emplace(FeatureKey(e.image, e.feature), static_cast<int>(elements_.size()));
  if (inserted) {
    elements_.push_back(e);
    parent_.push_back(it->second);
    rank_.push_back(0);
  }
  return it->second;
}

int TrackBuilder::Find(int i) const {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

void TrackBuilder::Unite(int ra, int rb) {
  if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
  parent_[rb] = ra;
  if (rank_[ra] == rank_[rb]) ++rank_[ra];
}

void TrackBuilder::Link(const TrackElement& a, const TrackElement& b) {
  const int ra = Find(Index(a));
  const int rb = Find(Index(b));
  if (ra != rb) Unite(ra, rb);
}

bool TrackBuilder::LinkConsistent(const TrackElement& a, const TrackElement& b) {
  const int ia = Index(a);
  const int ib = Index(b);
  const int ra = Find(ia);
  const int rb = Find(ib);
  if (ra == rb) return true;
  auto images_of = [&](int root, int element) -> std::vector<ImageId>& {
    auto [it, inserted] = images_.try_emplace(root);
    if (inserted) it->second = {elements_[element].image};
    return it->second;
  };
  std::vector<ImageId> ia_images = std::move(images_of(ra, ia));
  std::vector<ImageId> ib_images = std::move(images_of(rb, ib));
  images_.erase(ra);
  images_.erase(rb);
  std::vector<ImageId> merged;
  std::set_union(ia_images.begin(), ia_images.end(), ib_images.begin(), ib_images.end(),
                 std::back_inserter(merged));
  if (merged.size() != ia_images.size() + ib_images.size()) {
    images_[ra] = std::move(ia_images);
    images_[rb] = std::move(ib_images);
    return false;
  }
  Unite(ra, rb);
  images_[Find(ra)] = std::move(merged);
  return true;
}

std::vector<std::vector<TrackElement>> TrackBuilder::Build(int min_size) const {
  // Element index order is join order.
  std::map<int, std::vector<int>> components;
  for (int i = 0; i < static_cast<int>(elements_.size()); ++i) {
    components[Find(i)].push_back(i);
  }
  conflicts_dropped_ = 0;
  std::vector<std::vector<TrackElement>> tracks;
  for (const auto& [root, members] : components) {
    std::vector<TrackElement> track;
    std::vector<ImageId> seen;
    for (const int i : members) {
      const ImageId image = elements_[i].image;
      if (std::find(seen.begin(), seen.end(), image) != seen.end()) {
        ++conflicts_dropped_;
        continue;
      }
      seen.push_back(image);
      track.push_back(elements_[i]);
    }
    if (static_cast<int>(track.size()) < min_size) continue;
    std::sort(track.begin(), track.end());
    tracks.push_back(std::move(track));
  }
  std::sort(tracks.begin(), tracks.end());
  return tracks;
}

TrackSet MakeTrackSet(std::vector<std::vector<TrackElement>> tracks) {
  TrackSet set;
  set.tracks = std::move(tracks);
  for (int t = 0; t < static_cast<int>(set.tracks.size()); ++t) {
    for (const auto& e : set.tracks[t]) set.track_of[FeatureKey(e.image, e.feature)] = t;
  }
  return set;
}

}  // namespace navsfm
