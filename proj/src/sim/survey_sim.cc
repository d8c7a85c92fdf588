#include "navsfm/sim/survey_sim.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace navsfm::sim {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Bump {
  Eigen::Vector2d center;
  double amplitude;
  double width;
};

double TerrainHeight(const std::vector<Bump>& bumps, double north, double east) {
  double h = 0.0;
  for (const auto& b : bumps) {
    const double dx = north - b.center.x();
    const double dy = east - b.center.y();
    h += b.amplitude *
         std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width));
  }
  return h;
}

struct Waypoint {
  Eigen::Vector2d position;  // north, east
  double heading;            // rad, about the down axis
  int track;
};

std::vector<Waypoint> PlanTrajectory(const SurveyConfig& cfg) {
  std::vector<Waypoint> out;
  const int per_track =
      static_cast<int>(std::floor(cfg.track_length / cfg.image_interval + 1e-9)) + 1;
  for (int t = 0; t < cfg.num_tracks; ++t) {
    const bool forward = t % 2 == 0;
    for (int i = 0; i < per_track; ++i) {
      const double s = i * cfg.image_interval;
      const double north = forward ? s : cfg.track_length - s;
      out.push_back({{north, t * cfg.track_spacing},
                     forward ? 0.0 : std::numbers::pi, t});
    }
  }
  if (cfg.cross_track) {
    const double east_start = -cfg.track_spacing;
    const double extent = (cfg.num_tracks + 1) * cfg.track_spacing;
    const int n =
        static_cast<int>(std::floor(extent / cfg.image_interval + 1e-9)) + 1;
    // Head back across all tracks from the side where the last track ended.
    const bool eastward = false;
    for (int i = 0; i < n; ++i) {
      const double s = i * cfg.image_interval;
      const double east = eastward ? east_start + s : east_start + extent - s;
      out.push_back({{0.5 * cfg.track_length, east},
                     eastward ? 0.5 * std::numbers::pi : -0.5 * std::numbers::pi,
                     cfg.num_tracks});
    }
  }
  return out;
}

Eigen::Quaterniond BodyToWorld(double yaw, double pitch, double roll) {
  return AxisAngle(Eigen::Vector3d::UnitZ(), yaw) *
         AxisAngle(Eigen::Vector3d::UnitY(), pitch) *
         AxisAngle(Eigen::Vector3d::UnitX(), roll);
}

}  // namespace

RigExtrinsics SurveyConfig::DefaultRig() {
  return RigExtrinsics{Pose(AxisAngle(Eigen::Vector3d::UnitZ(), 0.5 * std::numbers::pi),
                            Eigen::Vector3d(0.5, 0.0, 0.3))};
}

double SurveyConfig::SwathWidth() const {
  return 2.0 * altitude * std::tan(0.5 * horizontal_fov_deg * kDeg);
}

void SurveyConfig::Validate() const {
  std::ostringstream err;
  if (num_tracks < 1) err << "num_tracks must be >= 1; ";
  if (!(track_length > 0.0)) err << "track_length must be > 0; ";
  if (!(track_spacing > 0.0)) err << "track_spacing must be > 0; ";
  if (!(altitude > 0.0)) err << "altitude must be > 0; ";
  if (!(image_interval > 0.0)) err << "image_interval must be > 0; ";
  if (!(landmark_density > 0.0)) err << "landmark_density must be > 0; ";
  if (!(vehicle_speed > 0.0)) err << "vehicle_speed must be > 0; ";
  if (terrain_amplitude < 0.0 || terrain_roughness < 0.0) {
    err << "terrain parameters must be >= 0; ";
  }
  if (!(horizontal_fov_deg > 0.0 && horizontal_fov_deg < 180.0)) {
    err << "horizontal_fov_deg must be in (0, 180); ";
  }
  if (image_width <= 0 || image_height <= 0) err << "image size must be > 0; ";
  if (fov_margin < 0.0 || 2.0 * fov_margin >= std::min(image_width, image_height)) {
    err << "fov_margin out of range; ";
  }
  if (terrain_amplitude >= altitude) err << "terrain_amplitude must be < altitude; ";
  if (err.str().empty() && track_spacing >= SwathWidth()) {
    err << "track_spacing " << track_spacing << " m >= swath width "
        << SwathWidth() << " m: adjacent tracks would not overlap; ";
  }
  if (!err.str().empty()) {
    throw std::invalid_argument("invalid survey config: " + err.str());
  }
}

bool WeakStrip::Contains(const Eigen::Vector3d& p) const {
  return p.x() >= min_ne.x() && p.x() <= max_ne.x() && p.y() >= min_ne.y() &&
         p.y() <= max_ne.y();
}

void NoiseModel::Validate() const {
  auto fraction = [](double f) { return f >= 0.0 && f <= 1.0; };
  bool ok = nav_position_sigma >= 0.0 && nav_rotation_sigma_deg >= 0.0 &&
            nav_position_drift >= 0.0 && nav_rotation_drift_deg >= 0.0 &&
            pixel_sigma >= 0.0 && fraction(outlier_fraction) && fraction(dropout);
  for (const auto& s : weak_strips) ok = ok && fraction(s.dropout);
  if (!ok) throw std::invalid_argument("invalid noise model");
}

LandmarkId SurveyTruth::LandmarkOf(ImageId image, FeatureId feature) const {
  if (image < 0 || image >= NumImages() || feature >= observations[image].size()) {
    return -1;
  }
  return observations[image][feature].landmark;
}

SurveyTruth GenerateSurvey(const SurveyConfig& cfg) {
  cfg.Validate();
  SurveyTruth truth;
  truth.config = cfg;
  truth.camera = CameraIntrinsics::FromFov(cfg.image_width, cfg.image_height,
                                           cfg.horizontal_fov_deg);
  truth.rig = cfg.rig;

  const std::vector<Waypoint> path = PlanTrajectory(cfg);
  const double vehicle_depth = cfg.seafloor_depth - cfg.altitude;
  double time = 0.0;
  for (size_t i = 0; i < path.size(); ++i) {
    if (i > 0) {
      time += (path[i].position - path[i - 1].position).norm() / cfg.vehicle_speed;
    }
    // Gentle attitude oscillation, as a vehicle never flies perfectly level.
    const double phase = 0.37 * static_cast<double>(i);
    const double roll = cfg.attitude_wobble_deg * kDeg * std::sin(phase);
    const double pitch = cfg.attitude_wobble_deg * kDeg * std::cos(1.3 * phase);
    const Eigen::Quaterniond body_to_world =
        BodyToWorld(path[i].heading, pitch, roll);
    const Eigen::Vector3d position(path[i].position.x(), path[i].position.y(),
                                   vehicle_depth);
    const Pose nav = Pose::FromCenter(body_to_world.conjugate(), position);
    truth.nav_poses.push_back(nav);
    truth.camera_poses.push_back(NavToCameraPrior(nav, truth.rig));
    truth.timestamps.push_back(time);
    truth.track_index.push_back(path[i].track);
  }

  // Area covered by all footprints.
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(1e300);
  Eigen::Vector2d hi = Eigen::Vector2d::Constant(-1e300);
  for (const Pose& p : truth.camera_poses) {
    lo = lo.cwiseMin(p.Center().head<2>());
    hi = hi.cwiseMax(p.Center().head<2>());
  }
  const double half_diag =
      cfg.altitude *
          std::tan(0.5 * std::hypot(cfg.image_width, cfg.image_height) / truth.camera.fx) +
      1.0;
  lo.array() -= half_diag;
  hi.array() += half_diag;
  const Eigen::Vector2d extent = hi - lo;
  const double area = extent.x() * extent.y();

  std::vector<Bump> bumps;
  {
    auto rng = StreamEngine(cfg.seed, kStreamTerrain);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = static_cast<int>(std::round(area * cfg.terrain_roughness / 100.0));
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d c = lo + Eigen::Vector2d(u(rng), u(rng)).cwiseProduct(extent);
      const double amp = cfg.terrain_amplitude * (2.0 * u(rng) - 1.0);
      const double width = 2.0 + 4.0 * u(rng);
      bumps.push_back({c, amp, width});
    }
  }
  {
    auto rng = StreamEngine(cfg.seed, kStreamLandmarks);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = static_cast<int>(std::round(area * cfg.landmark_density));
    truth.landmarks.reserve(n);
    for (int i = 0; i < n; ++i) {
      const double north = lo.x() + u(rng) * extent.x();
      const double east = lo.y() + u(rng) * extent.y();
      const double h = std::clamp(TerrainHeight(bumps, north, east),
                                  -cfg.terrain_amplitude, cfg.terrain_amplitude);
      truth.landmarks.emplace_back(north, east, cfg.seafloor_depth + h);
    }
  }

  const double max_range = 3.0 * cfg.altitude;
  truth.observations.resize(truth.NumImages());
  for (int img = 0; img < truth.NumImages(); ++img) {
    const Pose& pose = truth.camera_poses[img];
    const Eigen::Vector3d center = pose.Center();
    for (size_t l = 0; l < truth.landmarks.size(); ++l) {
      const Eigen::Vector3d& x = truth.landmarks[l];
      if ((x.head<2>() - center.head<2>()).squaredNorm() > half_diag * half_diag) {
        continue;
      }
      if ((x - center).norm() > max_range) continue;
      const auto px = Project(x, truth.camera, pose);
      if (!px || !truth.camera.InImage(*px, cfg.fov_margin)) continue;
      truth.observations[img].push_back({static_cast<LandmarkId>(l), *px});
    }
  }
  return truth;
}

std::vector<Pose> CorruptNavigation(const SurveyTruth& truth,
                                    const NoiseModel& noise, uint64_t seed) {
  noise.Validate();
  std::vector<Pose> priors;
  priors.reserve(truth.NumImages());
  Eigen::Vector3d walk_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d walk_rotation = Eigen::Vector3d::Zero();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < truth.NumImages(); ++i) {
    auto rng = StreamEngine(seed, kStreamNavigation, static_cast<uint64_t>(i));
    Eigen::Vector3d white_p, white_r, step_p, step_r;
    for (int k = 0; k < 3; ++k) white_p[k] = normal(rng);
    for (int k = 0; k < 3; ++k) white_r[k] = normal(rng);
    for (int k = 0; k < 3; ++k) step_p[k] = normal(rng);
    for (int k = 0; k < 3; ++k) step_r[k] = normal(rng);
    if (i > 0) {
      const double dt = truth.timestamps[i] - truth.timestamps[i - 1];
      walk_position += noise.nav_position_drift * std::sqrt(dt) * step_p;
      walk_rotation += noise.nav_rotation_drift_deg * kDeg * std::sqrt(dt) * step_r;
    }
    const Pose& nav = truth.nav_poses[i];
    const Eigen::Vector3d center =
        nav.Center() + walk_position + noise.nav_position_sigma * white_p;
    const Eigen::Vector3d rot_error =
        walk_rotation + noise.nav_rotation_sigma_deg * kDeg * white_r;
    // Perturb the body-to-world rotation in the world frame.
    const Eigen::Quaterniond body_to_world =
        ExpQuaternion(rot_error) * nav.rotation().conjugate();
    priors.push_back(Pose::FromCenter(body_to_world.conjugate(), center));
  }
  return priors;
}

SimulatedMatches RenderObservations(const SurveyTruth& truth,
                                    const NoiseModel& noise, uint64_t seed) {
  noise.Validate();
  const int n = truth.NumImages();

  // Surviving noisy detections: per image, landmark -> (feature, pixel).
  struct Detection {
    LandmarkId landmark;
    FeatureId feature;
    Eigen::Vector2d pixel;
  };
  std::vector<std::vector<Detection>> detections(n);
  for (int img = 0; img < n; ++img) {
    double dropout = noise.dropout;
    const Eigen::Vector3d center = truth.camera_poses[img].Center();
    for (const auto& strip : noise.weak_strips) {
      if (strip.Contains(center)) dropout = 1.0 - (1.0 - dropout) * (1.0 - strip.dropout);
    }
    auto drop_rng = StreamEngine(seed, kStreamDropout, static_cast<uint64_t>(img));
    auto pixel_rng = StreamEngine(seed, kStreamPixel, static_cast<uint64_t>(img));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto& obs = truth.observations[img];
    for (size_t f = 0; f < obs.size(); ++f) {
      const double draw = u(drop_rng);
      const Eigen::Vector2d e(normal(pixel_rng), normal(pixel_rng));
      if (draw < dropout) continue;
      detections[img].push_back({obs[f].landmark, static_cast<FeatureId>(f),
                                 obs[f].pixel + noise.pixel_sigma * e});
    }
  }

  SimulatedMatches out;
  out.matches.num_images = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto& di = detections[i];
      const auto& dj = detections[j];
      if (di.empty() || dj.empty()) continue;
      PairMatches pair{i, j, {}};
      // Both lists are sorted by landmark id.
      size_t a = 0, b = 0;
      while (a < di.size() && b < dj.size()) {
        if (di[a].landmark < dj[b].landmark) {
          ++a;
        } else if (dj[b].landmark < di[a].landmark) {
          ++b;
        } else {
          pair.matches.push_back(
              {di[a].feature, dj[b].feature, di[a].pixel, dj[b].pixel});
          ++a;
          ++b;
        }
      }
      if (pair.matches.empty()) continue;
      std::vector<bool> labels(pair.matches.size(), true);
      if (noise.outlier_fraction > 0.0 && dj.size() > 1) {
        auto rng = StreamEngine(seed, kStreamOutlier, static_cast<uint64_t>(i),
                                static_cast<uint64_t>(j));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::uniform_int_distribution<size_t> pick(0, dj.size() - 1);
        for (size_t k = 0; k < pair.matches.size(); ++k) {
          if (u(rng) >= noise.outlier_fraction) continue;
          const LandmarkId true_landmark =
              truth.LandmarkOf(j, pair.matches[k].feature2);
          size_t c = pick(rng);
          while (dj[c].landmark == true_landmark) c = pick(rng);
          pair.matches[k].feature2 = dj[c].feature;
          pair.matches[k].pixel2 = dj[c].pixel;
          labels[k] = false;
        }
      }
      out.matches.pairs.push_back(std::move(pair));
      out.inlier.push_back(std::move(labels));
    }
  }
  return out;
}

SurveyInput MakeSurveyInput(const SurveyTruth& truth,
                            const std::vector<Pose>& nav_priors,
                            const SimulatedMatches& matches) {
  SurveyInput input;
  input.camera = truth.camera;
  input.rig = truth.rig;
  input.nav_priors = nav_priors;
  input.matches = matches.matches;
  return input;
}

}  // namespace navsfm::sim
