#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "navsfm/io/format.h"
#include "navsfm/sfm/global_recon.h"

namespace navsfm::io {

// Plain-text poses file:
//   # comment lines
//   CAMERA width height fx fy cx cy k1 k2 k3 k4
//   RIG qw qx qy qz tx ty tz
//   POSE image registered qw qx qy qz tx ty tz
void WritePoses(std::ostream& out, const GlobalReconstruction& recon);
// Fills camera, rig, trajectory, registered and recon.poses.
void ReadPoses(std::istream& in, GlobalReconstruction* recon);

// Binary landmarks: "NSFL" | u32 version | u64 count | per landmark:
//   i64 id | 3 x f64 position | u32 track length | length x (u32 image, u32 feature)
void WriteLandmarks(std::ostream& out, const std::vector<Landmark>& landmarks);
std::vector<Landmark> ReadLandmarks(std::istream& in);

// poses.txt and landmarks.bin inside a directory.
void WriteReconstruction(const std::string& dir, const GlobalReconstruction& recon);
GlobalReconstruction ReadReconstruction(const std::string& dir);

}  // namespace navsfm::io
