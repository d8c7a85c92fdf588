// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.
//
//   navsfm_acceptance [--out DIR] [--only 1,4,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "navsfm/io/checkpoint.h"
#include "navsfm/io/config.h"
#include "navsfm/io/matches.h"
#include "navsfm/io/metrics.h"
#include "navsfm/io/navigation.h"
#include "navsfm/io/reconstruction_io.h"
#include "navsfm/io/run.h"
#include "navsfm/io/survey_io.h"
#include "navsfm/pipeline/pipeline.h"
#include "navsfm/sfm/bundle_adjustment.h"
#include "navsfm/sim/survey_sim.h"
#include "oracles.h"
#include "sim_fixture.h"
#include "test_util.h"

namespace navsfm {
namespace {

using namespace testing;
namespace fs = std::filesystem;

std::string Format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buffer[512];
  std::vsnprintf(buffer, sizeof(buffer), fmt, args);
  va_end(args);
  return buffer;
}

// Conjunction of named checks with a one-line summary.
class Outcome {
 public:
  void Check(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    if (!detail_.empty()) detail_ += "; ";
    detail_ += what;
    if (!ok) detail_ += " [failed]";
  }
  void Note(const std::string& what) {
    if (!detail_.empty()) detail_ += "; ";
    detail_ += what;
  }
  bool pass() const { return pass_; }
  const std::string& detail() const { return detail_; }

 private:
  bool pass_ = true;
  std::string detail_;
};

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Survey {
  sim::SurveyTruth truth;
  sim::SimulatedMatches matches;
  SurveyInput input;
  FeatureTable features;

  Survey(const sim::SurveyConfig& cfg, const sim::NoiseModel& noise, uint64_t seed) {
    truth = sim::GenerateSurvey(cfg);
    matches = sim::RenderObservations(truth, noise, seed);
    input = sim::MakeSurveyInput(truth, sim::CorruptNavigation(truth, noise, seed), matches);
    features = FeatureTable(input.matches);
  }

  double PriorAte() const {
    const std::vector<Pose> priors = input.CameraPriors();
    std::map<ImageId, Pose> m;
    for (int i = 0; i < input.NumImages(); ++i) m[i] = priors[i];
    return AbsoluteTrajectoryError(m, truth.camera_poses);
  }
};

// 4 tracks x 25 images plus the closing cross-track.
sim::SurveyConfig StandardSurvey(uint64_t seed = 1) {
  sim::SurveyConfig cfg;
  cfg.seed = seed;
  return cfg;
}

// 10 tracks x 49 images plus the cross-track: 518 images.
sim::SurveyConfig LargeSurvey(uint64_t seed = 1) {
  sim::SurveyConfig cfg;
  cfg.num_tracks = 10;
  cfg.track_length = 96.0;
  cfg.seed = seed;
  return cfg;
}

sim::NoiseModel NoisyNavigationAndPixels() {
  sim::NoiseModel n;
  n.nav_position_sigma = 0.5;
  n.nav_rotation_sigma_deg = 1.0;
  n.pixel_sigma = 0.5;
  n.outlier_fraction = 0.2;
  return n;
}

PipelineConfig SeededConfig(uint64_t seed) {
  PipelineConfig c;
  c.seed = seed;
  return c;
}

// --- 1: noiseless exactness ---

Outcome NoiselessExactness() {
  Outcome out;
  const Survey s(StandardSurvey(), sim::NoiseModel{}, 1);
  PipelineState state;
  const auto start = std::chrono::steady_clock::now();
  RunPipeline(s.input, PipelineConfig{}, state);
  const double seconds = Seconds(start);
  const GlobalReconstruction& g = state.result;
  const double ate = AbsoluteTrajectoryError(g.recon.poses, s.truth.camera_poses);
  const double re = g.recon.MeanReprojectionError(g.camera, s.features);
  const int n = s.truth.NumImages();
  out.Check(ate < 1e-6, Format("ATE %.2e m", ate));
  out.Check(re < 1e-6, Format("RE %.2e px", re));
  out.Check(g.NumRegistered() == n, Format("registered %d/%d", g.NumRegistered(), n));
  out.Check(seconds < 60.0, Format("%.1f s", seconds));
  return out;
}

// --- 2: gradient suites ---

constexpr int kGradientConfigs = 1000;
constexpr double kGradientTolerance = 1e-5;

// Reprojection residual (pose, point, intrinsics), prior residual (pose,
// rig) and the gradient of the complete prior-aided adjustment cost.
double ReprojectionPriorGradients(int* configs) {
  std::mt19937_64 rng(101);
  const CameraIntrinsics camera = TestCamera();
  double worst = 0.0;
  int n = 0;
  while (n < kGradientConfigs) {
    const Pose pose = RandomPose(rng, 1.0);
    const Eigen::Vector3d point =
        pose.Inverse() * Eigen::Vector3d(RandomVector(rng, 2.0).x(), RandomVector(rng, 2.0).y(),
                                         std::abs(RandomVector(rng).x()) + 3.0);
    Eigen::Matrix<double, 2, 6> jpose;
    ProjectionPointJacobian jpoint;
    ProjectionIntrinsicsJacobian jintr;
    if (!Project(point, camera, pose, &jpose, &jpoint, &jintr)) continue;
    const auto npose = NumericJacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
          return *Project(point, camera, pose.Retract(d));
        },
        6);
    const auto npoint = NumericJacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
          return *Project(point + d, camera, pose);
        },
        3);
    const auto nintr = NumericJacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
          CameraIntrinsics c = camera;
          c.SetParams(camera.Params() + d);
          return *Project(point, c, pose);
        },
        CameraIntrinsics::kNumParams);

    const Pose nav = RandomPose(rng);
    const Pose g = RandomPose(rng, 0.5);
    std::uniform_real_distribution<double> w(0.1, 10.0);
    const ResidualWeights weights = ResidualWeights::Isotropic(w(rng), w(rng));
    Matrix6d jp, jr;
    const Vector6d r = PriorResidual(pose, nav, g, weights, &jp, &jr);
    // Configurations at the quaternion sign flip have no derivative.
    if (r.head<3>().norm() > 1.9 * weights.rotation(0, 0)) continue;
    const auto np = NumericJacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
          return PriorResidual(pose.Retract(d), nav, g, weights);
        },
        6);
    const auto nr = NumericJacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
          return PriorResidual(pose, nav, g.Retract(d), weights);
        },
        6);
    worst = std::max({worst, RelativeError(jpose, npose), RelativeError(jpoint, npoint),
                      RelativeError(jintr, nintr), RelativeError(jp, np), RelativeError(jr, nr)});
    ++n;
  }

  // Whole cost: random perturbations of a small simulated scene.
  sim::SurveyConfig cfg;
  cfg.num_tracks = 1;
  cfg.track_length = 8.0;
  cfg.cross_track = false;
  const sim::SurveyTruth truth = sim::GenerateSurvey(cfg);
  const FeatureTable features(sim::RenderObservations(truth, sim::NoiseModel{}, 3).matches);
  Reconstruction base = TruthReconstruction(truth, features, Range(0, 4));
  base.landmarks.resize(std::min<size_t>(base.landmarks.size(), 10));
  for (int k = 0; k < kGradientConfigs; ++k) {
    Reconstruction recon = base;
    for (auto& [image, pose] : recon.poses) pose = Perturb(pose, rng, 0.01, 0.1);
    for (auto& l : recon.landmarks) l.position += RandomVector(rng, 0.1);
    std::vector<Pose> nav = truth.nav_poses;
    for (auto& p : nav) p = Perturb(p, rng, 0.02, 0.3);
    CameraIntrinsics cam = truth.camera;
    RigExtrinsics rig = truth.rig;
    BundleAdjustmentOptions options;
    options.prior.weights = ResidualWeights::Isotropic(50.0, 2.0);
    options.prior.loss_width = k % 2 ? 2.0 : 0.0;
    options.refine_intrinsics = k % 3 == 0;
    options.refine_rig = k % 4 == 0;
    BundleAdjustmentProblem problem(recon, cam, rig, nav, features, options);
    optim::NormalEquations normal(problem.Layout());
    problem.Evaluate(&normal);
    const Eigen::VectorXd grad = normal.Gradient();
    const int dim = problem.Layout().TotalSize();
    Eigen::VectorXd numeric(dim);
    const double h = 1e-6;
    problem.SaveState();
    for (int i = 0; i < dim; ++i) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
      d[i] = h;
      problem.Step(d);
      const double plus = problem.Evaluate(nullptr);
      problem.RestoreState();
      problem.Step(-d);
      const double minus = problem.Evaluate(nullptr);
      problem.RestoreState();
      numeric[i] = (plus - minus) / (2 * h);
    }
    worst = std::max(worst, RelativeError(grad, numeric));
  }
  *configs = n;
  return worst;
}

double PoseResidualGradients(int* configs) {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  int n = 0;
  while (n < kGradientConfigs) {
    const Pose a = RandomPose(rng), b = RandomPose(rng);
    ResidualWeights w;
    const Eigen::Matrix3d mr = Eigen::Matrix3d::Random();
    const Eigen::Matrix3d mt = Eigen::Matrix3d::Random();
    w.rotation = mr * mr.transpose();
    w.translation = mt * mt.transpose();
    Matrix6d ja, jb;
    const Vector6d r = PoseResidual(a, b, w, &ja, &jb);
    if (PoseResidual(a, b, ResidualWeights::Identity()).head<3>().norm() > 1.9) continue;
    (void)r;
    const auto na = NumericJacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd { return PoseResidual(a.Retract(d), b, w); },
        6);
    const auto nb = NumericJacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd { return PoseResidual(a, b.Retract(d), w); },
        6);
    worst = std::max({worst, RelativeError(ja, na), RelativeError(jb, nb)});
    ++n;
  }
  *configs = n;
  return worst;
}

// Relative, absolute and smoothness residuals plus the gradient of the full
// pose-graph cost on random graphs.
double PoseGraphGradients(int* configs) {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  int n = 0;
  while (n < kGradientConfigs) {
    const Pose a = RandomPose(rng);
    const Pose b = Perturb(a, rng, 0.3, 1.0);
    const Pose c = Perturb(b, rng, 0.3, 1.0);
    const Pose m = Perturb(Relative(b, a), rng, 0.1, 0.2);
    const Pose prior = Perturb(a, rng, 0.1, 0.5);
    Matrix6d ra, rb, sa, sb, sc, pa, pp;
    const Vector6d r = RelativeEdgeResidual(a, b, m, &ra, &rb);
    const Vector6d s = SmoothResidual(a, b, c, &sa, &sb, &sc);
    const Vector6d p = PoseResidual(a, prior, ResidualWeights::Identity(), &pa, &pp);
    if (r.head<3>().norm() > 1.9 || s.head<3>().norm() > 1.9 || p.head<3>().norm() > 1.9) continue;
    auto num = [](const std::function<Vector6d(const Eigen::VectorXd&)>& f) {
      return NumericJacobian([&](const Eigen::VectorXd& d) -> Eigen::VectorXd { return f(d); }, 6);
    };
    worst = std::max(
        {worst,
         RelativeError(ra, num([&](const auto& d) { return RelativeEdgeResidual(a.Retract(d), b, m); })),
         RelativeError(rb, num([&](const auto& d) { return RelativeEdgeResidual(a, b.Retract(d), m); })),
         RelativeError(sa, num([&](const auto& d) { return SmoothResidual(a.Retract(d), b, c); })),
         RelativeError(sb, num([&](const auto& d) { return SmoothResidual(a, b.Retract(d), c); })),
         RelativeError(sc, num([&](const auto& d) { return SmoothResidual(a, b, c.Retract(d)); })),
         RelativeError(pa, num([&](const auto& d) {
           return PoseResidual(a.Retract(d), prior, ResidualWeights::Identity());
         }))});

    // Whole cost on a random graph with every term family present.
    const std::vector<Pose> truth = Trajectory(rng, 8);
    PoseGraph g;
    g.weights = {1.0, 0.3, 2.0};
    for (const Pose& t : truth) {
      g.vertices.push_back(Perturb(t, rng, 0.05, 0.2));
      g.priors.push_back(Perturb(t, rng, 0.05, 0.3));
    }
    std::uniform_int_distribution<int> pick(0, 7);
    for (int k = 0; k < 6; ++k) {
      const int i = pick(rng), j = pick(rng);
      if (i == j || i == 2 || j == 2 || i == 5 || j == 5) continue;  // 2 and 5 stay isolated
      const int lo = std::min(i, j), hi = std::max(i, j);
      g.edges.push_back({lo, hi, Perturb(Relative(truth[hi], truth[lo]), rng, 0.02, 0.1), 50,
                         0.25 + 0.1 * k});
    }
    PoseGraphProblem problem(g);
    optim::NormalEquations normal(problem.Layout());
    problem.Evaluate(&normal);
    const Eigen::VectorXd grad = normal.Gradient();
    const int dim = problem.Layout().TotalSize();
    Eigen::VectorXd numeric(dim);
    const double h = 1e-6;
    problem.SaveState();
    for (int k = 0; k < dim; ++k) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
      d[k] = h;
      problem.Step(d);
      const double plus = problem.Evaluate(nullptr);
      problem.RestoreState();
      problem.Step(-d);
      const double minus = problem.Evaluate(nullptr);
      problem.RestoreState();
      numeric[k] = (plus - minus) / (2 * h);
    }
    worst = std::max(worst, RelativeError(grad, numeric));
    ++n;
  }
  *configs = n;
  return worst;
}

Outcome GradientSuites() {
  Outcome out;
  const std::vector<std::pair<const char*, double (*)(int*)>> suites = {
      {"reprojection+prior", ReprojectionPriorGradients},
      {"pose difference", PoseResidualGradients},
      {"pose graph", PoseGraphGradients}};
  for (const auto& [name, suite] : suites) {
    int configs = 0;
    const double worst = suite(&configs);
    out.Check(worst < kGradientTolerance && configs >= kGradientConfigs,
              Format("%s: %d configs, worst rel. error %.1e", name, configs, worst));
  }
  return out;
}

// --- 3: oracle equivalence ---

Outcome OracleEquivalence() {
  Outcome out;
  std::mt19937_64 rng(201);

  const CameraIntrinsics camera = TestCamera();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double tri_worst = 0.0;
  int tri_n = 0;
  while (tri_n < 1000) {
    const Eigen::Vector3d point(u(rng) * 3.0, u(rng) * 3.0, 0.0);
    std::vector<TriangulationObservation> obs;
    std::vector<Pose> poses;
    const int views = 2 + tri_n % 6;
    for (int i = 0; i < views; ++i) {
      const Eigen::Vector3d center(u(rng) * 3.0, u(rng) * 3.0, -8.0 + u(rng));
      // Optical axis near +z: looking down at the z = 0 plane.
      poses.push_back(Pose::FromCenter(ExpQuaternion(RandomVector(rng, 0.05)), center));
    }
    for (const Pose& p : poses) obs.push_back({p, &camera, Project(point, camera, p).value()});
    const TriangulationResult r = TriangulatePoint(obs);
    if (r.status == TriangulationStatus::kDegenerateAngle) continue;
    tri_worst = std::max(tri_worst, r.ok() ? (r.point - DltOracle(obs)).norm() : 1.0);
    ++tri_n;
  }
  out.Check(tri_worst < 1e-9, Format("triangulation vs DLT %.1e m over %d tracks", tri_worst, tri_n));

  int cut_equal = 0;
  double cut_worst = 0.0;
  const int cut_trials = 500;
  for (int trial = 0; trial < cut_trials; ++trial) {
    std::uniform_int_distribution<int> size(2, 6);
    std::uniform_real_distribution<double> bridge(1.0, 60.0);
    const Eigen::MatrixXd w = TwoCommunities(rng, size(rng), size(rng), bridge(rng));
    const double oracle = ExhaustiveBestCut(w, nullptr);
    const double got = NormalizedCutObjective(w, NormalizedCutBisection(w));
    cut_worst = std::max(cut_worst, std::abs(got - oracle));
    cut_equal += std::abs(got - oracle) <= 1e-9;
  }
  out.Check(cut_equal == cut_trials,
            Format("normalized cut = exhaustive on %d/%d graphs (<= 12 nodes, worst %.1e)",
                   cut_equal, cut_trials, cut_worst));

  double pgo_worst = 0.0;
  const int chains = 20;
  for (int trial = 0; trial < chains; ++trial) {
    PoseGraph g = ChainGraph(Trajectory(rng, 10));
    g.weights.absolute = 0.01;
    for (auto& p : g.priors) p = Perturb(p, rng, 0.02, 0.5);
    for (auto& v : g.vertices) v = Perturb(v, rng, 0.01, 0.1);
    const std::vector<Pose> oracle = DenseGaussNewton(g);
    optim::SolverOptions options;
    options.max_iterations = 200;
    OptimizePoseGraph(g, options);
    pgo_worst = std::max(pgo_worst, MaxPoseDifference(g.vertices, oracle));
  }
  out.Check(pgo_worst < 1e-4, Format("PGO chain vs dense GLS %.1e over %d chains", pgo_worst, chains));
  return out;
}

// --- 4 and 8: the noisy survey ---

struct NoisyRun {
  uint64_t seed = 0;
  std::map<std::string, double> direct;  // direct-triangulation RE by mode
  double prior_ate = 0.0;
  double final_ate = 0.0;
};

const std::vector<NoisyRun>& NoisyRuns() {
  static const std::vector<NoisyRun> runs = [] {
    std::vector<NoisyRun> r;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
      const Survey s(StandardSurvey(seed), NoisyNavigationAndPixels(), seed);
      PipelineState state;
      RunPipeline(s.input, SeededConfig(seed), state);
      NoisyRun run;
      run.seed = seed;
      run.direct = io::EvaluateDirectTriangulation(s.input, state, 1);
      run.prior_ate = s.PriorAte();
      run.final_ate = AbsoluteTrajectoryError(state.result.recon.poses, s.truth.camera_poses);
      r.push_back(run);
    }
    return r;
  }();
  return runs;
}

Outcome DirectTriangulationOrdering() {
  Outcome out;
  for (const NoisyRun& r : NoisyRuns()) {
    const double priors = r.direct.at("priors"), pgo = r.direct.at("pgo"),
                 inlier = r.direct.at("pgo_inlier");
    out.Check(priors > 5.0 * pgo && inlier <= pgo,
              Format("seed %d: %.2f -> %.2f -> %.2f px", static_cast<int>(r.seed), priors, pgo, inlier));
  }
  return out;
}

// --- 5: weak-area elimination ---

Outcome WeakAreaElimination() {
  Outcome out;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    // Low-texture band across every track.
    sim::NoiseModel noise = NoisyNavigationAndPixels();
    noise.outlier_fraction = 0.0;
    sim::WeakStrip strip;
    strip.min_ne = {18.0, -100.0};
    strip.max_ne = {30.0, 100.0};
    strip.dropout = 0.9;
    noise.weak_strips.push_back(strip);
    const Survey s(StandardSurvey(seed), noise, seed);
    PipelineState state;
    RunPipeline(s.input, SeededConfig(seed), state);
    const int n = s.truth.NumImages();
    const size_t pairs = state.graph.Edges().size();
    const WeakReport& first = state.first_pass_report;
    const WeakReport& last = state.revisit.final_report;
    const double fraction = static_cast<double>(first.weak_pairs.size()) / pairs;
    const int reg_first = n - static_cast<int>(first.unregistered.size());
    const int reg_final = state.result.NumRegistered();
    out.Check(fraction >= 0.05 && state.revisit.rounds.size() <= 2 && last.weak_pairs.empty() &&
                  reg_final >= reg_first,
              Format("seed %d: weak %zu/%zu (%.1f%%) -> %zu in %zu rounds, registered %d -> %d",
                     static_cast<int>(seed), first.weak_pairs.size(), pairs, 100 * fraction,
                     last.weak_pairs.size(), state.revisit.rounds.size(), reg_first, reg_final));
  }
  return out;
}

// --- 6: drift mitigation ---

// Drift of `rate` times the path length travelled since the first image of
// each sub-reconstruction, along a random direction per cluster.
void InjectDrift(std::vector<SubReconstruction>& subs, double rate, std::mt19937_64& rng) {
  for (auto& sub : subs) {
    const Eigen::Vector3d direction = RandomVector(rng).normalized();
    double path = 0.0;
    std::optional<Eigen::Vector3d> last;
    for (auto& [image, pose] : sub.recon.poses) {
      const Eigen::Vector3d c = pose.Center();
      if (last) path += (c - *last).norm();
      last = c;
      pose = Pose::FromCenter(pose.rotation(), c + rate * path * direction);
    }
  }
}

Outcome DriftMitigation() {
  Outcome out;
  std::vector<double> reductions;
  bool all_lower = true;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const Survey s(LargeSurvey(seed), sim::NoiseModel{}, seed);
    const PipelineConfig config = SeededConfig(seed);
    PipelineState state;
    RunPipeline(s.input, config, state, {}, static_cast<int>(Stage::kPoseGraph));
    std::mt19937_64 rng(seed);
    std::vector<SubReconstruction> subs = state.subs;
    InjectDrift(subs, 0.002, rng);
    PoseGraph graph = MakePoseGraph(subs, s.input.CameraPriors(),
                                    CollectRelativeEdges(subs, config.pgo_edges), config.pgo);
    auto ate = [&] {
      std::map<ImageId, Pose> m;
      for (const auto& sub : subs)
        for (const auto& [i, p] : sub.recon.poses) m[i] = graph.vertices[i];
      return AbsoluteTrajectoryError(m, s.truth.camera_poses);
    };
    const double before = ate();
    OptimizePoseGraph(graph, config.pgo_solver);
    const double after = ate();
    all_lower = all_lower && after < before;
    reductions.push_back(1.0 - after / before);
    out.Note(Format("seed %d: %.3f -> %.3f m (%zu clusters)", static_cast<int>(seed), before, after,
                    state.subs.size()));
  }
  out.Check(all_lower, "post-PGO ATE lower in every seed");
  const double median = Median(reductions);
  out.Check(median >= 0.5, Format("median reduction %.1f%%", 100 * median));
  return out;
}

// --- 7: efficiency ordering ---

Outcome EfficiencyOrdering(const std::string& out_dir) {
  Outcome out;
  const Survey s(LargeSurvey(), NoisyNavigationAndPixels(), 1);
  io::RunConfig config;
  auto run = [&](bool hierarchical, PipelineState& state) {
    PipelineConfig c = config.pipeline;
    c.hierarchical = hierarchical;
    const auto start = std::chrono::steady_clock::now();
    RunPipeline(s.input, c, state);
    return Seconds(start);
  };
  PipelineState hierarchical, single;
  io::EfficiencyReport e;
  e.hierarchical_seconds = run(true, hierarchical);
  e.single_cluster_seconds = run(false, single);

  io::MetricsReport report =
      io::MakeMetricsReport(config, s.input, hierarchical, s.truth.camera_poses);
  report.efficiency = e;
  const std::string path = (fs::path(out_dir) / "efficiency_metrics.json").string();
  io::WriteMetricsFile(path, report);
  const io::MetricsReport back = io::ReadMetricsFile(path);
  out.Check(e.hierarchical_seconds < e.single_cluster_seconds,
            Format("%d images: hierarchical %.1f s, single cluster %.1f s, ratio %.3f",
                   s.truth.NumImages(), e.hierarchical_seconds, e.single_cluster_seconds,
                   e.Ratio()));
  out.Check(back.efficiency.has_value() && back.efficiency->Ratio() == e.Ratio(),
            "ratio recorded in " + path);
  return out;
}

// --- 8: robustness ---

Outcome RansacRobustness() {
  Outcome out;
  sim::NoiseModel noise;
  noise.outlier_fraction = 0.3;
  noise.pixel_sigma = 0.5;

  // Two-view verification: one pair per trial from seeded surveys.
  {
    long agree = 0, total = 0;
    int trials = 0;
    for (uint64_t seed = 1; trials < 100; ++seed) {
      sim::SurveyConfig cfg;
      cfg.num_tracks = 2;
      cfg.track_length = 30.0;
      cfg.cross_track = false;
      cfg.seed = seed;
      const sim::SurveyTruth truth = sim::GenerateSurvey(cfg);
      const sim::SimulatedMatches m = sim::RenderObservations(truth, noise, seed);
      for (size_t p = 0; p < m.matches.pairs.size() && trials < 100; p += 7) {
        const PairMatches& pair = m.matches.pairs[p];
        if (pair.matches.size() < 40) continue;
        const TwoViewResult r = VerifyTwoView(pair, truth.camera, TwoViewOptions{}, seed);
        for (size_t k = 0; k < pair.matches.size(); ++k) {
          agree += r.inlier_mask.size() == pair.matches.size() && r.inlier_mask[k] == m.inlier[p][k];
        }
        total += pair.matches.size();
        ++trials;
      }
    }
    const double rate = static_cast<double>(agree) / total;
    out.Check(rate >= 0.99, Format("two-view agreement %.2f%% over %d trials", 100 * rate, trials));
  }

  // Absolute pose: 30% of 2D-3D correspondences point at wrong landmarks.
  {
    sim::SurveyConfig cfg;
    cfg.num_tracks = 2;
    cfg.track_length = 28.0;
    cfg.cross_track = false;
    const sim::SurveyTruth t = sim::GenerateSurvey(cfg);
    std::mt19937_64 rng(301);
    std::bernoulli_distribution is_outlier(0.3);
    std::normal_distribution<double> pixel_noise(0.0, 0.5);
    std::uniform_int_distribution<size_t> any(0, t.landmarks.size() - 1);
    long agree = 0, total = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const ImageId image = trial % t.NumImages();
      std::vector<Eigen::Vector2d> pixels;
      std::vector<Eigen::Vector3d> points;
      std::vector<bool> inlier;
      for (const auto& o : t.observations[image]) {
        const Eigen::Vector2d px = o.pixel + Eigen::Vector2d(pixel_noise(rng), pixel_noise(rng));
        Eigen::Vector3d x = t.landmarks[o.landmark];
        const bool bad = is_outlier(rng);
        while (bad) {
          const Eigen::Vector3d y = t.landmarks[any(rng)];
          const auto q = Project(y, t.camera, t.camera_poses[image]);
          if (!q || (*q - px).norm() > 10.0) {
            x = y;
            break;
          }
        }
        pixels.push_back(px);
        points.push_back(x);
        inlier.push_back(!bad);
      }
      const RegisterResult r = RegisterImage(t.camera, pixels, points, LocalSfmOptions{}, trial);
      for (size_t k = 0; k < inlier.size(); ++k) {
        agree += r.ok() && r.inlier_mask[k] == inlier[k];
      }
      total += inlier.size();
    }
    const double rate = static_cast<double>(agree) / total;
    out.Check(rate >= 0.99, Format("absolute-pose agreement %.2f%% over 100 trials", 100 * rate));
  }

  for (const NoisyRun& r : NoisyRuns()) {
    out.Check(r.final_ate < r.prior_ate, Format("seed %d ATE %.3f m (priors %.3f m)",
                                                static_cast<int>(r.seed), r.final_ate, r.prior_ate));
  }
  return out;
}

// --- 9: formats and resume ---

std::string ReadBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string FreshDir(const std::string& parent, const std::string& name) {
  const fs::path dir = fs::path(parent) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

bool SamePose(const Pose& a, const Pose& b) {
  return a.rotation().coeffs() == b.rotation().coeffs() && a.translation() == b.translation();
}

Outcome FormatsAndResume(const std::string& out_dir) {
  Outcome out;
  const std::string root = FreshDir(out_dir, "formats");
  sim::SurveyConfig cfg;
  cfg.num_tracks = 2;
  cfg.track_length = 28.0;
  cfg.cross_track = false;
  sim::NoiseModel noise = NoisyNavigationAndPixels();
  noise.outlier_fraction = 0.1;
  const sim::SurveyTruth truth = sim::GenerateSurvey(cfg);
  const std::vector<Pose> priors = sim::CorruptNavigation(truth, noise, 1);
  const sim::SimulatedMatches matches = sim::RenderObservations(truth, noise, 1);
  const io::SurveyFiles files = io::SurveyFiles::InDirectory(FreshDir(root, "survey"));
  io::ExportSimulation(files, truth, priors, matches.matches, {54.0, 10.0});

  // Navigation CSV: records and bytes survive a read/write cycle.
  {
    const io::Navigation nav = io::ReadNavigationFile(files.navigation);
    const std::string again = (fs::path(root) / "navigation_again.csv").string();
    io::WriteNavigationFile(again, nav.records);
    out.Check(io::ReadNavigationFile(again).records == nav.records &&
                  ReadBytes(again) == ReadBytes(files.navigation),
              Format("navigation CSV (%zu records)", nav.records.size()));
  }
  // Matches: equal to the stored-precision original, byte-identical rewrite.
  {
    const MatchSet back = io::ReadMatchesFile(files.matches);
    const std::string again = (fs::path(root) / "matches_again.nsfm").string();
    io::WriteMatchesFile(again, back);
    out.Check(back == io::RoundToStoredPrecision(matches.matches) &&
                  ReadBytes(again) == ReadBytes(files.matches),
              Format("match file (%zu pairs)", back.pairs.size()));
  }

  const io::LoadedSurvey loaded = io::LoadSurvey(files);
  const std::vector<Pose> reference =
      io::LoadTruthCameraPoses(files.truth, loaded.navigation.anchor, loaded.input.rig);
  io::RunConfig config;
  config.pipeline.partition.target_cluster_size = 12;
  const std::string full_dir = FreshDir(root, "checkpoints_full");
  const PipelineState full = io::RunWithCheckpoints(loaded.input, config, {.checkpoint_dir = full_dir});
  const io::MetricsReport metrics = io::MakeMetricsReport(config, loaded.input, full, reference);
  const std::string expected_dir = FreshDir(root, "outputs_full");
  io::WriteRunOutputs(expected_dir, loaded.input, full, metrics, reference);

  // Reconstruction: exact poses, landmarks and byte-identical rewrite.
  {
    const GlobalReconstruction back =
        io::ReadReconstruction((fs::path(expected_dir) / "reconstruction").string());
    bool same = back.camera == full.result.camera && back.registered == full.result.registered &&
                back.trajectory.size() == full.result.trajectory.size() &&
                back.recon.landmarks.size() == full.result.recon.landmarks.size();
    for (size_t i = 0; same && i < back.trajectory.size(); ++i) {
      same = SamePose(back.trajectory[i], full.result.trajectory[i]);
    }
    for (size_t k = 0; same && k < back.recon.landmarks.size(); ++k) {
      const Landmark &a = back.recon.landmarks[k], &b = full.result.recon.landmarks[k];
      same = a.id == b.id && a.position == b.position && a.track == b.track;
    }
    const std::string again = FreshDir(root, "reconstruction_again");
    io::WriteReconstruction(again, back);
    for (const char* f : {"poses.txt", "landmarks.bin"}) {
      same = same && ReadBytes(again + "/" + f) ==
                         ReadBytes((fs::path(expected_dir) / "reconstruction" / f).string());
    }
    out.Check(same, Format("reconstruction (%zu landmarks)", back.recon.landmarks.size()));
  }
  // Metrics JSON.
  {
    const io::MetricsReport back =
        io::ReadMetricsFile((fs::path(expected_dir) / "metrics.json").string());
    out.Check(io::ToJson(back) == io::ToJson(metrics), "metrics JSON");
  }
  // Resume from every intermediate checkpoint.
  {
    const io::Json expected = io::ToJson(metrics, false);
    int identical = 0;
    for (int stop = 1; stop < kNumStages; ++stop) {
      const std::string dir = FreshDir(root, "checkpoints_" + std::to_string(stop));
      fs::copy_file(io::CheckpointPath(full_dir, stop), io::CheckpointPath(dir, stop));
      const PipelineState resumed = io::RunWithCheckpoints(loaded.input, config, {.checkpoint_dir = dir});
      const io::MetricsReport m = io::MakeMetricsReport(config, loaded.input, resumed, reference);
      const std::string outputs = FreshDir(root, "outputs_" + std::to_string(stop));
      io::WriteRunOutputs(outputs, loaded.input, resumed, m, reference);
      bool same = io::ToJson(m, false) == expected;
      for (const char* f : {"reconstruction/poses.txt", "reconstruction/landmarks.bin",
                            "view_graph.txt"}) {
        same = same && ReadBytes(outputs + "/" + f) == ReadBytes(expected_dir + "/" + f);
      }
      identical += same;
    }
    out.Check(identical == kNumStages - 1,
              Format("resume bit-identical from %d/%d checkpoints", identical, kNumStages - 1));
  }
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace navsfm

int main(int argc, char** argv) {
  using namespace navsfm;
  CLI::App app{"navsfm acceptance run"};
  std::string out_dir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--out", out_dir, "Directory for artefacts");
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(out_dir);

  const std::vector<Criterion> criteria = {
      {1, "noiseless exactness", NoiselessExactness},
      {2, "gradient suites", GradientSuites},
      {3, "oracle equivalence", OracleEquivalence},
      {4, "direct triangulation ordering", DirectTriangulationOrdering},
      {5, "weak-area elimination", WeakAreaElimination},
      {6, "drift mitigation", DriftMitigation},
      {7, "efficiency ordering", [&] { return EfficiencyOrdering(out_dir); }},
      {8, "robustness", RansacRobustness},
      {9, "formats and resume", [&] { return FormatsAndResume(out_dir); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.Check(false, std::string("error: ") + e.what());
    }
    failures += !o.pass();
    std::printf("criterion %d (%s): %s  %s  [%.1f s]\n", c.id, c.name, o.pass() ? "PASS" : "FAIL",
                o.detail().c_str(), Seconds(start));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
