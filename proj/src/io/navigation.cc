#include "navsfm/io/navigation.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "navsfm/io/format.h"

namespace navsfm::io {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr const char* kHeader = "image_id,t,lat,lon,depth,yaw,pitch,roll";

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double ParseDouble(const std::string& s, const char* what) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (s.empty() || used != s.size() || !std::isfinite(v)) {
    throw FormatError(std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

Eigen::Vector3d GeodeticToLocal(double latitude, double longitude, double depth,
                                const GeoAnchor& anchor) {
  const double north = kEarthRadius * (latitude - anchor.latitude) * kDeg;
  const double east =
      kEarthRadius * std::cos(anchor.latitude * kDeg) * (longitude - anchor.longitude) * kDeg;
  return {north, east, depth};
}

void LocalToGeodetic(const Eigen::Vector3d& ned, const GeoAnchor& anchor, double* latitude,
                     double* longitude, double* depth) {
  *latitude = anchor.latitude + ned.x() / (kEarthRadius * kDeg);
  *longitude = anchor.longitude + ned.y() / (kEarthRadius * std::cos(anchor.latitude * kDeg) * kDeg);
  *depth = ned.z();
}

Eigen::Quaterniond BodyToLocal(double yaw, double pitch, double roll) {
  return AxisAngle(Eigen::Vector3d::UnitZ(), yaw * kDeg) *
         AxisAngle(Eigen::Vector3d::UnitY(), pitch * kDeg) *
         AxisAngle(Eigen::Vector3d::UnitX(), roll * kDeg);
}

Pose RecordToPose(const NavigationRecord& r, const GeoAnchor& anchor) {
  const Eigen::Quaterniond body_to_local = BodyToLocal(r.yaw, r.pitch, r.roll);
  return Pose::FromCenter(body_to_local.conjugate(),
                          GeodeticToLocal(r.latitude, r.longitude, r.depth, anchor));
}

NavigationRecord PoseToRecord(const Pose& pose, ImageId image, double timestamp,
                              const GeoAnchor& anchor) {
  NavigationRecord r;
  r.image = image;
  r.timestamp = timestamp;
  LocalToGeodetic(pose.Center(), anchor, &r.latitude, &r.longitude, &r.depth);
  // ZYX angles of the body-to-local rotation.
  const Eigen::Matrix3d m = pose.RotationMatrix().transpose();
  r.yaw = std::atan2(m(1, 0), m(0, 0)) / kDeg;
  r.pitch = std::asin(std::clamp(-m(2, 0), -1.0, 1.0)) / kDeg;
  r.roll = std::atan2(m(2, 1), m(2, 2)) / kDeg;
  return r;
}

GeoAnchor Centroid(const std::vector<NavigationRecord>& records) {
  GeoAnchor a;
  if (records.empty()) return a;
  for (const auto& r : records) {
    a.latitude += r.latitude;
    a.longitude += r.longitude;
  }
  a.latitude /= records.size();
  a.longitude /= records.size();
  return a;
}

Navigation ReadNavigation(std::istream& in, std::optional<GeoAnchor> anchor) {
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw FormatError("navigation line " + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) throw FormatError("navigation: empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) fail(std::string("expected header '") + kHeader + "'");

  std::map<ImageId, NavigationRecord> by_id;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = SplitCsv(line);
    if (f.size() != 8) fail("expected 8 fields, got " + std::to_string(f.size()));
    NavigationRecord r;
    try {
      const double id = ParseDouble(f[0], "image_id");
      if (id < 0 || id != std::floor(id) || id > 1e9) {
        throw FormatError("bad image_id '" + f[0] + "'");
      }
      r.image = static_cast<ImageId>(id);
      r.timestamp = ParseDouble(f[1], "t");
      r.latitude = ParseDouble(f[2], "lat");
      r.longitude = ParseDouble(f[3], "lon");
      r.depth = ParseDouble(f[4], "depth");
      r.yaw = ParseDouble(f[5], "yaw");
      r.pitch = ParseDouble(f[6], "pitch");
      r.roll = ParseDouble(f[7], "roll");
    } catch (const std::runtime_error& e) {
      fail(e.what());
    }
    if (std::abs(r.latitude) > 90.0) fail("latitude out of range");
    if (std::abs(r.longitude) > 180.0) fail("longitude out of range");
    if (r.depth < 0.0) fail("negative depth");
    if (!by_id.emplace(r.image, r).second) fail("duplicate image_id " + std::to_string(r.image));
  }
  Navigation nav;
  for (const auto& [id, r] : by_id) {
    if (id != static_cast<ImageId>(nav.records.size())) {
      throw FormatError("navigation: image ids must be 0..N-1, missing " +
                               std::to_string(nav.records.size()));
    }
    nav.records.push_back(r);
  }
  nav.anchor = anchor ? *anchor : Centroid(nav.records);
  for (const auto& r : nav.records) nav.poses.push_back(RecordToPose(r, nav.anchor));
  return nav;
}

Navigation ReadNavigationFile(const std::string& path, std::optional<GeoAnchor> anchor) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ReadNavigation(in, anchor);
}

void WriteNavigation(std::ostream& out, const std::vector<NavigationRecord>& records) {
  out << kHeader << '\n' << std::setprecision(17);
  for (const auto& r : records) {
    out << r.image << ',' << r.timestamp << ',' << r.latitude << ',' << r.longitude << ','
        << r.depth << ',' << r.yaw << ',' << r.pitch << ',' << r.roll << '\n';
  }
}

void WriteNavigationFile(const std::string& path, const std::vector<NavigationRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  WriteNavigation(out, records);
}

}  // namespace navsfm::io
