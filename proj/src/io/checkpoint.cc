#include "navsfm/io/checkpoint.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/array.hpp>
#include <cereal/types/map.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/vector.hpp>

#include "navsfm/io/format.h"

namespace cereal {

template <typename Archive, int Rows, int Cols>
void serialize(Archive& ar, Eigen::Matrix<double, Rows, Cols>& m) {
  for (int i = 0; i < Rows * Cols; ++i) ar(m.data()[i]);
}

}  // namespace cereal

namespace navsfm {

template <typename Archive>
void save(Archive& ar, const Pose& p) {
  const auto& q = p.rotation();
  ar(q.w(), q.x(), q.y(), q.z(), p.translation());
}

template <typename Archive>
void load(Archive& ar, Pose& p) {
  double w, x, y, z;
  Eigen::Vector3d t;
  ar(w, x, y, z, t);
  p = Pose::FromStored(Eigen::Quaterniond(w, x, y, z), t);
}

template <typename Archive>
void serialize(Archive& ar, CameraIntrinsics& c) {
  ar(c.fx, c.fy, c.cx, c.cy, c.k, c.width, c.height);
}

template <typename Archive>
void serialize(Archive& ar, RigExtrinsics& r) {
  ar(r.camera_to_vehicle);
}

template <typename Archive>
void serialize(Archive& ar, FeatureMatch& m) {
  ar(m.feature1, m.feature2, m.pixel1, m.pixel2);
}

template <typename Archive>
void serialize(Archive& ar, RelativeMotion& m) {
  ar(m.rotation, m.translation);
}

template <typename Archive>
void serialize(Archive& ar, ViewGraphEdge& e) {
  ar(e.image1, e.image2, e.num_matches, e.inliers, e.two_view, e.num_shared_points,
     e.metric_relative);
}

template <typename Archive>
void save(Archive& ar, const ViewGraph& g) {
  ar(g.NumImages(), g.Edges());
}

template <typename Archive>
void load(Archive& ar, ViewGraph& g) {
  int n = 0;
  std::vector<ViewGraphEdge> edges;
  ar(n, edges);
  g = ViewGraph(n);
  for (auto& e : edges) g.AddEdge(std::move(e));
}

template <typename Archive>
void serialize(Archive& ar, Cluster& c) {
  ar(c.id, c.members, c.overlap);
}

template <typename Archive>
void serialize(Archive& ar, TrackElement& e) {
  ar(e.image, e.feature);
}

template <typename Archive>
void serialize(Archive& ar, Landmark& l) {
  ar(l.id, l.position, l.track);
}

template <typename Archive>
void serialize(Archive& ar, Reconstruction& r) {
  ar(r.poses, r.landmarks);
}

template <typename Archive>
void serialize(Archive& ar, SubReconstruction& s) {
  ar(s.cluster_id, s.members, s.unregistered, s.recon);
}

template <typename Archive>
void serialize(Archive& ar, WeakReport& r) {
  ar(r.weak_pairs, r.unregistered, r.constraints_per_image);
}

template <typename Archive>
void serialize(Archive& ar, RevisitRound& r) {
  ar(r.num_clusters, r.num_seeded, r.before);
}

template <typename Archive>
void serialize(Archive& ar, RevisitResult& r) {
  ar(r.rounds, r.final_report);
}

template <typename Archive>
void serialize(Archive& ar, RelativeEdge& e) {
  ar(e.i, e.j, e.measurement, e.shared_landmarks, e.weight);
}

template <typename Archive>
void serialize(Archive& ar, PgoWeights& w) {
  ar(w.relative, w.absolute, w.smooth);
}

template <typename Archive>
void serialize(Archive& ar, PoseGraph& g) {
  ar(g.vertices, g.priors, g.edges, g.weights);
}

template <typename Archive>
void serialize(Archive& ar, PgoTermCosts& c) {
  ar(c.relative, c.absolute, c.smooth);
}

template <typename Archive>
void save(Archive& ar, const MergedTracks& m) {
  ar(m.tracks.tracks, m.num_input_tracks, m.num_conflicts_dropped);
}

template <typename Archive>
void load(Archive& ar, MergedTracks& m) {
  std::vector<std::vector<TrackElement>> tracks;
  ar(tracks, m.num_input_tracks, m.num_conflicts_dropped);
  m.tracks = MakeTrackSet(std::move(tracks));
}

template <typename Archive>
void serialize(Archive& ar, RetriangulationReport& r) {
  ar(r.num_tracks, r.status_counts);
}

template <typename Archive>
void serialize(Archive& ar, GlobalReconstruction& g) {
  ar(g.recon, g.trajectory, g.registered, g.camera, g.rig);
}

template <typename Archive>
void serialize(Archive& ar, StageTiming& t) {
  ar(t.stage, t.seconds);
}

template <typename Archive>
void serialize(Archive& ar, PipelineState& s) {
  ar(s.completed_stages, s.graph, s.clusters, s.subs, s.first_pass_report, s.revisit,
     s.pose_graph, s.pgo_initial, s.pgo_final, s.pgo_iterations, s.tracks, s.retriangulation,
     s.result, s.timings);
}

namespace io {
namespace {

constexpr char kMagic[8] = {'N', 'S', 'F', 'M', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

class Fnv {
 public:
  void Bytes(const void* data, size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < size; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ull;
    }
  }
  template <typename T>
  void Value(const T& v) {
    Bytes(&v, sizeof(T));
  }
  void PoseValue(const Pose& p) {
    Value(p.rotation().coeffs().eval());
    Value(p.translation().eval());
  }
  uint64_t hash() const { return hash_; }

 private:
  uint64_t hash_ = 14695981039346656037ull;
};

}  // namespace

std::string CheckpointConfigKey(const RunConfig& config) {
  Json j = ToJson(config);
  j.erase("num_threads");
  j.erase("simulation");
  return j.dump();
}

uint64_t InputFingerprint(const SurveyInput& input) {
  Fnv h;
  const auto& c = input.camera;
  for (const double v : {c.fx, c.fy, c.cx, c.cy, c.k[0], c.k[1], c.k[2], c.k[3]}) h.Value(v);
  h.Value(c.width);
  h.Value(c.height);
  h.PoseValue(input.rig.camera_to_vehicle);
  for (const Pose& p : input.nav_priors) h.PoseValue(p);
  h.Value(input.matches.num_images);
  for (const auto& pair : input.matches.pairs) {
    h.Value(pair.image1);
    h.Value(pair.image2);
    for (const auto& m : pair.matches) {
      h.Value(m.feature1);
      h.Value(m.feature2);
      h.Value(m.pixel1.eval());
      h.Value(m.pixel2.eval());
    }
  }
  return h.hash();
}

std::string CheckpointPath(const std::string& dir, int completed_stages) {
  const std::string name =
      completed_stages == 0 ? "empty" : ToString(static_cast<Stage>(completed_stages - 1));
  return (std::filesystem::path(dir) /
          ("stage_" + std::to_string(completed_stages) + "_" + name + ".ckpt"))
      .string();
}

void SaveCheckpoint(const std::string& path, const PipelineState& state,
                    const std::string& config_key, uint64_t fingerprint) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
    out.write(kMagic, sizeof(kMagic));
    cereal::PortableBinaryOutputArchive ar(out);
    ar(kVersion, config_key, fingerprint, state);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

PipelineState LoadCheckpoint(const std::string& path, const std::string& config_key,
                             uint64_t fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path + ": not a checkpoint");
  }
  PipelineState state;
  try {
    cereal::PortableBinaryInputArchive ar(in);
    uint32_t version = 0;
    std::string key;
    uint64_t stored_fingerprint = 0;
    ar(version);
    if (version != kVersion) throw FormatError(path + ": unsupported checkpoint version");
    ar(key, stored_fingerprint);
    if (key != config_key) {
      throw CheckpointMismatch(path + ": written with a different configuration");
    }
    if (stored_fingerprint != fingerprint) {
      throw CheckpointMismatch(path + ": written for different input data");
    }
    ar(state);
  } catch (const cereal::Exception& e) {
    throw FormatError(path + ": truncated or corrupt checkpoint (" + e.what() + ")");
  }
  if (state.completed_stages < 0 || state.completed_stages > kNumStages) {
    throw FormatError(path + ": corrupt stage count");
  }
  return state;
}

std::optional<PipelineState> LoadLatestCheckpoint(const std::string& dir,
                                                  const std::string& config_key,
                                                  uint64_t fingerprint) {
  if (!std::filesystem::is_directory(dir)) return std::nullopt;
  const std::regex pattern(R"(stage_(\d+)_\w+\.ckpt)");
  int best = -1;
  std::string best_path;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) continue;
    const int stages = std::stoi(m[1].str());
    if (stages > best) {
      best = stages;
      best_path = entry.path().string();
    }
  }
  if (best < 0) return std::nullopt;
  return LoadCheckpoint(best_path, config_key, fingerprint);
}

}  // namespace io
}  // namespace navsfm
