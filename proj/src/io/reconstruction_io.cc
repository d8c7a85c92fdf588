#include "navsfm/io/reconstruction_io.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace navsfm::io {
namespace {

constexpr char kLandmarkMagic[4] = {'N', 'S', 'F', 'L'};
constexpr uint32_t kLandmarkVersion = 1;

void PutPose(std::ostream& out, const Pose& p) {
  const auto& q = p.rotation();
  const auto& t = p.translation();
  out << ' ' << q.w() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << t.x() << ' '
      << t.y() << ' ' << t.z();
}

Pose GetPose(std::istream& in) {
  double v[7];
  for (double& x : v) {
    if (!(in >> x)) throw FormatError("truncated pose");
  }
  const Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
  if (std::abs(q.norm() - 1.0) > 1e-9) throw FormatError("quaternion is not unit length");
  return Pose::FromStored(q, Eigen::Vector3d(v[4], v[5], v[6]));
}

template <typename T>
void Put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::istream& in, const char* what) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (in.gcount() != sizeof(T)) throw FormatError(std::string("landmarks: truncated ") + what);
  return v;
}

}  // namespace

void WritePoses(std::ostream& out, const GlobalReconstruction& r) {
  out << std::setprecision(17);
  out << "# image registered qw qx qy qz tx ty tz (world-to-camera)\n";
  const auto& c = r.camera;
  out << "CAMERA " << c.width << ' ' << c.height << ' ' << c.fx << ' ' << c.fy << ' ' << c.cx
      << ' ' << c.cy;
  for (const double k : c.k) out << ' ' << k;
  out << "\nRIG";
  PutPose(out, r.rig.camera_to_vehicle);
  out << '\n';
  for (size_t i = 0; i < r.trajectory.size(); ++i) {
    const bool reg = i < r.registered.size() && r.registered[i];
    out << "POSE " << i << ' ' << reg;
    PutPose(out, reg && r.recon.poses.contains(static_cast<ImageId>(i))
                     ? r.recon.poses.at(static_cast<ImageId>(i))
                     : r.trajectory[i]);
    out << '\n';
  }
}

void ReadPoses(std::istream& in, GlobalReconstruction* r) {
  std::string line;
  int line_no = 0;
  bool have_camera = false;
  r->trajectory.clear();
  r->registered.clear();
  r->recon.poses.clear();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    try {
      if (tag == "CAMERA") {
        auto& c = r->camera;
        if (!(ls >> c.width >> c.height >> c.fx >> c.fy >> c.cx >> c.cy >> c.k[0] >> c.k[1] >>
              c.k[2] >> c.k[3])) {
          throw FormatError("bad camera");
        }
        have_camera = true;
      } else if (tag == "RIG") {
        r->rig.camera_to_vehicle = GetPose(ls);
      } else if (tag == "POSE") {
        size_t id;
        int reg;
        if (!(ls >> id >> reg) || id != r->trajectory.size()) {
          throw FormatError("pose ids must be consecutive from 0");
        }
        const Pose p = GetPose(ls);
        r->trajectory.push_back(p);
        r->registered.push_back(reg != 0);
        if (reg != 0) r->recon.poses[static_cast<ImageId>(id)] = p;
      } else {
        throw FormatError("unknown record '" + tag + "'");
      }
    } catch (const FormatError& e) {
      throw FormatError("poses line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_camera) throw FormatError("poses: missing CAMERA line");
}

void WriteLandmarks(std::ostream& out, const std::vector<Landmark>& landmarks) {
  out.write(kLandmarkMagic, 4);
  Put<uint32_t>(out, kLandmarkVersion);
  Put<uint64_t>(out, landmarks.size());
  for (const auto& l : landmarks) {
    Put<int64_t>(out, l.id);
    for (int k = 0; k < 3; ++k) Put<double>(out, l.position[k]);
    Put<uint32_t>(out, static_cast<uint32_t>(l.track.size()));
    for (const auto& e : l.track) {
      Put<uint32_t>(out, static_cast<uint32_t>(e.image));
      Put<uint32_t>(out, e.feature);
    }
  }
}

std::vector<Landmark> ReadLandmarks(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kLandmarkMagic, 4) != 0) {
    throw FormatError("landmarks: bad magic");
  }
  if (Get<uint32_t>(in, "header") != kLandmarkVersion) throw FormatError("landmarks: bad version");
  const uint64_t n = Get<uint64_t>(in, "header");
  std::vector<Landmark> out;
  for (uint64_t i = 0; i < n; ++i) {
    Landmark l;
    l.id = Get<int64_t>(in, "landmark");
    for (int k = 0; k < 3; ++k) l.position[k] = Get<double>(in, "landmark");
    const uint32_t len = Get<uint32_t>(in, "landmark");
    for (uint32_t k = 0; k < len; ++k) {
      const auto image = Get<uint32_t>(in, "track");
      const auto feature = Get<uint32_t>(in, "track");
      l.track.push_back({static_cast<ImageId>(image), feature});
    }
    out.push_back(std::move(l));
  }
  return out;
}

void WriteReconstruction(const std::string& dir, const GlobalReconstruction& recon) {
  std::filesystem::create_directories(dir);
  std::ofstream poses(dir + "/poses.txt");
  std::ofstream landmarks(dir + "/landmarks.bin", std::ios::binary);
  if (!poses || !landmarks) throw std::runtime_error("cannot write reconstruction to " + dir);
  WritePoses(poses, recon);
  WriteLandmarks(landmarks, recon.recon.landmarks);
}

GlobalReconstruction ReadReconstruction(const std::string& dir) {
  std::ifstream poses(dir + "/poses.txt");
  std::ifstream landmarks(dir + "/landmarks.bin", std::ios::binary);
  if (!poses || !landmarks) throw std::runtime_error("cannot read reconstruction from " + dir);
  GlobalReconstruction r;
  ReadPoses(poses, &r);
  r.recon.landmarks = ReadLandmarks(landmarks);
  return r;
}

}  // namespace navsfm::io
