#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "navsfm/io/format.h"
#include "navsfm/scene.h"

namespace navsfm::io {

// Little-endian binary match file:
//   "NSFM" | u32 version | u32 num_images
//   per pair: u32 image1 | u32 image2 | u32 count |
//             count x (u32 feature1, u32 feature2, f32 x1, f32 y1, f32 x2, f32 y2)
// Pixels are stored as 32-bit floats.
constexpr uint32_t kMatchFileVersion = 1;
constexpr size_t kMatchHeaderSize = 12;

void WriteMatches(std::ostream& out, const MatchSet& matches);
MatchSet ReadMatches(std::istream& in);
void WriteMatchesFile(const std::string& path, const MatchSet& matches);
MatchSet ReadMatchesFile(const std::string& path);

// Rounds every pixel to float precision (what a write/read cycle does).
MatchSet RoundToStoredPrecision(MatchSet matches);

}  // namespace navsfm::io
