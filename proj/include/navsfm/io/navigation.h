#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "navsfm/geom/pose.h"
#include "navsfm/io/format.h"
#include "navsfm/scene.h"

namespace navsfm::io {

struct NavigationRecord {
  ImageId image = 0;
  double timestamp = 0.0;  // s
  double latitude = 0.0;   // deg
  double longitude = 0.0;  // deg
  double depth = 0.0;      // m, positive down
  double yaw = 0.0;        // deg, about down
  double pitch = 0.0;      // deg
  double roll = 0.0;       // deg

  bool operator==(const NavigationRecord&) const = default;
};

// Origin of the local metric frame.
struct GeoAnchor {
  double latitude = 0.0;
  double longitude = 0.0;

  bool operator==(const GeoAnchor&) const = default;
};

constexpr double kEarthRadius = 6371000.0;  // m, spherical

// Local North-East-Down position (depth is the down coordinate) by the
// equirectangular approximation around the anchor.
Eigen::Vector3d GeodeticToLocal(double latitude, double longitude, double depth,
                                const GeoAnchor& anchor);
void LocalToGeodetic(const Eigen::Vector3d& ned, const GeoAnchor& anchor, double* latitude,
                     double* longitude, double* depth);

// Body-to-local rotation Rz(yaw) * Ry(pitch) * Rx(roll), angles in degrees.
Eigen::Quaterniond BodyToLocal(double yaw, double pitch, double roll);

// Vehicle pose ^pT_w of a record.
Pose RecordToPose(const NavigationRecord& record, const GeoAnchor& anchor);
// Inverse of RecordToPose; angles are recovered in (-180, 180].
NavigationRecord PoseToRecord(const Pose& pose, ImageId image, double timestamp,
                              const GeoAnchor& anchor);

GeoAnchor Centroid(const std::vector<NavigationRecord>& records);

struct Navigation {
  std::vector<NavigationRecord> records;  // sorted by image id, dense from 0
  GeoAnchor anchor;
  std::vector<Pose> poses;  // ^pT_w per image
};

// CSV with header "image_id,t,lat,lon,depth,yaw,pitch,roll". The anchor is
// the centroid unless given. Throws FormatError with the line number
// on malformed rows, duplicate or missing image ids.
Navigation ReadNavigation(std::istream& in, std::optional<GeoAnchor> anchor = std::nullopt);
Navigation ReadNavigationFile(const std::string& path,
                              std::optional<GeoAnchor> anchor = std::nullopt);
void WriteNavigation(std::ostream& out, const std::vector<NavigationRecord>& records);
void WriteNavigationFile(const std::string& path, const std::vector<NavigationRecord>& records);

}  // namespace navsfm::io
