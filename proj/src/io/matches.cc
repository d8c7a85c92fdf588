#include "navsfm/io/matches.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace navsfm::io {
namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

constexpr char kMagic[4] = {'N', 'S', 'F', 'M'};

void PutU32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void PutF32(std::ostream& out, double v) {
  const float f = static_cast<float>(v);
  out.write(reinterpret_cast<const char*>(&f), 4);
}

bool GetBytes(std::istream& in, void* dst, size_t n) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<size_t>(in.gcount()) == n;
}

}  // namespace

void WriteMatches(std::ostream& out, const MatchSet& matches) {
  out.write(kMagic, 4);
  PutU32(out, kMatchFileVersion);
  PutU32(out, static_cast<uint32_t>(matches.num_images));
  for (const auto& p : matches.pairs) {
    if (p.image1 >= p.image2) throw std::invalid_argument("match pair ids must satisfy i < j");
    PutU32(out, static_cast<uint32_t>(p.image1));
    PutU32(out, static_cast<uint32_t>(p.image2));
    PutU32(out, static_cast<uint32_t>(p.matches.size()));
    for (const auto& m : p.matches) {
      PutU32(out, m.feature1);
      PutU32(out, m.feature2);
      PutF32(out, m.pixel1.x());
      PutF32(out, m.pixel1.y());
      PutF32(out, m.pixel2.x());
      PutF32(out, m.pixel2.y());
    }
  }
}

MatchSet ReadMatches(std::istream& in) {
  char magic[4];
  uint32_t version = 0, num_images = 0;
  if (!GetBytes(in, magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("match file: bad magic");
  }
  if (!GetBytes(in, &version, 4)) throw FormatError("match file: truncated header");
  if (version != kMatchFileVersion) {
    throw FormatError("match file: unsupported version " + std::to_string(version));
  }
  if (!GetBytes(in, &num_images, 4)) throw FormatError("match file: truncated header");
  MatchSet set;
  set.num_images = static_cast<int>(num_images);
  while (true) {
    uint32_t head[3];
    in.read(reinterpret_cast<char*>(head), 12);
    if (in.gcount() == 0) break;
    if (in.gcount() != 12) throw FormatError("match file: truncated pair header");
    const std::string name = "pair (" + std::to_string(head[0]) + ", " + std::to_string(head[1]) + ")";
    if (head[0] >= head[1] || head[1] >= num_images) {
      throw FormatError("match file: invalid " + name);
    }
    PairMatches p;
    p.image1 = static_cast<ImageId>(head[0]);
    p.image2 = static_cast<ImageId>(head[1]);
    p.matches.resize(head[2]);
    for (auto& m : p.matches) {
      uint32_t ids[2];
      float px[4];
      if (!GetBytes(in, ids, 8) || !GetBytes(in, px, 16)) {
        throw FormatError("match file: truncated block of " + name);
      }
      m.feature1 = ids[0];
      m.feature2 = ids[1];
      m.pixel1 = {px[0], px[1]};
      m.pixel2 = {px[2], px[3]};
    }
    set.pairs.push_back(std::move(p));
  }
  return set;
}

void WriteMatchesFile(const std::string& path, const MatchSet& matches) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  WriteMatches(out, matches);
}

MatchSet ReadMatchesFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ReadMatches(in);
}

MatchSet RoundToStoredPrecision(MatchSet matches) {
  for (auto& p : matches.pairs) {
    for (auto& m : p.matches) {
      m.pixel1 = m.pixel1.cast<float>().cast<double>();
      m.pixel2 = m.pixel2.cast<float>().cast<double>();
    }
  }
  return matches;
}

}  // namespace navsfm::io
