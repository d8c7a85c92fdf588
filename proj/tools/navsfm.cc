// Command-line front end: simulate, reconstruct, evaluate, plot.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "navsfm/io/checkpoint.h"
#include "navsfm/io/config.h"
#include "navsfm/io/format.h"
#include "navsfm/io/metrics.h"
#include "navsfm/io/run.h"
#include "navsfm/io/survey_io.h"
#include "navsfm/sim/survey_sim.h"

namespace {

using namespace navsfm;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kInput = 3,
  kConfig = 4,
  kStageBase = 5,  // + stage index
  kCheckpointMismatch = 11,
};

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::string checkpoint_dir;
};

void AddCommon(CLI::App* app, CommonArgs* args, bool checkpoints) {
  app->add_option("--config", args->config_path,
                  std::string("JSON configuration (default: $") + io::kConfigEnv + ")");
  app->add_option("--set", args->overrides, "Override an option, e.g. weak_area.min_matches=40");
  app->add_option("--seed", args->seed, "Random seed");
  app->add_option("--threads", args->threads, "Worker threads")->check(CLI::PositiveNumber);
  if (checkpoints) {
    app->add_option("--checkpoint-dir", args->checkpoint_dir,
                    "Stage checkpoints; an existing run resumes from its latest one");
  }
}

io::RunConfig ResolveConfig(const CommonArgs& args) {
  io::RunConfig config = io::LoadConfig(args.config_path);
  for (const auto& o : args.overrides) config = io::ApplyOverride(config, o);
  if (args.seed) {
    config.pipeline.seed = *args.seed;
    config.noise_seed = *args.seed;
  }
  if (args.threads) config.pipeline.num_threads = *args.threads;
  config.pipeline.Validate();
  return config;
}

std::optional<std::vector<Pose>> LoadReference(const std::string& path,
                                               const io::LoadedSurvey& survey) {
  if (path.empty() || !std::filesystem::exists(path)) return std::nullopt;
  return io::LoadTruthCameraPoses(path, survey.navigation.anchor, survey.input.rig);
}

void PrintSummary(const io::MetricsReport& m) {
  std::cout << "registered " << m.metrics.num_registered << "/" << m.metrics.num_images
            << ", landmarks " << m.metrics.num_landmarks << ", mean reprojection error "
            << m.metrics.mean_reprojection_error << " px";
  if (m.has_reference) std::cout << ", ATE " << m.metrics.ate_rmse << " m";
  if (m.prior_ate) std::cout << " (prior " << *m.prior_ate << " m)";
  std::cout << '\n';
  for (const auto& [mode, re] : m.direct_triangulation_re) {
    std::cout << "direct triangulation [" << mode << "]: " << re << " px\n";
  }
  if (m.efficiency) {
    std::cout << "hierarchical " << m.efficiency->hierarchical_seconds << " s, single cluster "
              << m.efficiency->single_cluster_seconds << " s, ratio " << m.efficiency->Ratio()
              << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navigation-aided hierarchical structure from motion for seafloor surveys"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  std::string sim_out;
  double origin_lat = 54.0, origin_lon = 10.0;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic survey");
  AddCommon(simulate, &sim_args, false);
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--origin-lat", origin_lat, "Survey latitude (deg)");
  simulate->add_option("--origin-lon", origin_lon, "Survey longitude (deg)");

  CommonArgs rec_args;
  std::string survey_dir, out_dir, truth_path, stop_after;
  io::SurveyFiles files;
  bool no_resume = false;
  auto* reconstruct = app.add_subcommand("reconstruct", "Run the reconstruction pipeline");
  AddCommon(reconstruct, &rec_args, true);
  reconstruct->add_option("--survey", survey_dir, "Directory with the survey files");
  reconstruct->add_option("--navigation", files.navigation, "Navigation CSV");
  reconstruct->add_option("--matches", files.matches, "Binary match file");
  reconstruct->add_option("--camera", files.camera, "camera.json");
  reconstruct->add_option("--truth", truth_path, "Reference navigation CSV for ATE");
  reconstruct->add_option("--out", out_dir, "Output directory")->required();
  reconstruct->add_option("--stop-after", stop_after, "Last stage to run");
  reconstruct->add_flag("--no-resume", no_resume, "Ignore existing checkpoints");

  CommonArgs eval_args;
  bool efficiency = false;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Reconstruct, then add direct-triangulation ablations and timing comparison");
  AddCommon(evaluate, &eval_args, true);
  evaluate->add_option("--survey", survey_dir, "Directory with the survey files")->required();
  evaluate->add_option("--truth", truth_path, "Reference navigation CSV for ATE");
  evaluate->add_option("--out", out_dir, "Output directory")->required();
  evaluate->add_flag("--efficiency", efficiency,
                     "Also time a hierarchical and a single-cluster run");

  CommonArgs plot_args;
  auto* plot = app.add_subcommand("plot", "Redraw outputs from a completed checkpoint");
  AddCommon(plot, &plot_args, true);
  plot->add_option("--survey", survey_dir, "Directory with the survey files")->required();
  plot->add_option("--truth", truth_path, "Reference navigation CSV");
  plot->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) {
      const io::RunConfig config = ResolveConfig(sim_args);
      const sim::SurveyTruth truth = sim::GenerateSurvey(config.survey);
      const auto priors = sim::CorruptNavigation(truth, config.noise, config.noise_seed);
      const auto matches = sim::RenderObservations(truth, config.noise, config.noise_seed);
      io::ExportSimulation(io::SurveyFiles::InDirectory(sim_out), truth, priors,
                           matches.matches, {origin_lat, origin_lon});
      std::cout << "wrote " << truth.NumImages() << " images, " << matches.matches.pairs.size()
                << " match pairs to " << sim_out << '\n';
      return kOk;
    }

    CommonArgs& args = reconstruct->parsed() ? rec_args : evaluate->parsed() ? eval_args
                                                                             : plot_args;
    const io::RunConfig config = ResolveConfig(args);
    if (!survey_dir.empty()) {
      const io::SurveyFiles d = io::SurveyFiles::InDirectory(survey_dir);
      if (files.navigation.empty()) files.navigation = d.navigation;
      if (files.matches.empty()) files.matches = d.matches;
      if (files.camera.empty()) files.camera = d.camera;
      if (truth_path.empty()) truth_path = d.truth;
    }
    if (files.navigation.empty() || files.matches.empty() || files.camera.empty()) {
      std::cerr << "error: give --survey or all of --navigation, --matches and --camera\n";
      return kUsage;
    }
    const io::LoadedSurvey survey = io::LoadSurvey(files);
    const auto reference = LoadReference(truth_path, survey);

    io::RunOptions options;
    options.checkpoint_dir = args.checkpoint_dir;
    options.resume = !no_resume;
    if (!stop_after.empty()) {
      options.stop_after = -1;
      for (int s = 0; s < kNumStages; ++s) {
        if (ToString(static_cast<Stage>(s)) == stop_after) options.stop_after = s + 1;
      }
      if (options.stop_after < 0) {
        std::cerr << "error: unknown stage '" << stop_after << "'\n";
        return kUsage;
      }
    }
    if (plot->parsed() && options.checkpoint_dir.empty()) {
      std::cerr << "error: plot needs --checkpoint-dir of a completed run\n";
      return kUsage;
    }

    const PipelineState state = io::RunWithCheckpoints(survey.input, config, options);
    if (!state.Done()) {
      std::cout << "stopped after stage " << ToString(static_cast<Stage>(state.completed_stages - 1))
                << '\n';
      return kOk;
    }
    io::MetricsReport metrics = io::MakeMetricsReport(config, survey.input, state, reference);
    if (evaluate->parsed()) {
      metrics.direct_triangulation_re =
          io::EvaluateDirectTriangulation(survey.input, state, config.pipeline.num_threads);
      if (efficiency) metrics.efficiency = io::MeasureEfficiency(survey.input, config);
    }
    io::WriteRunOutputs(out_dir, survey.input, state, metrics, reference);
    PrintSummary(metrics);
    return kOk;
  } catch (const StageError& e) {
    std::cerr << "stage failure: " << e.what() << '\n';
    return kStageBase + static_cast<int>(e.stage());
  } catch (const io::CheckpointMismatch& e) {
    std::cerr << "checkpoint mismatch: " << e.what() << '\n';
    return kCheckpointMismatch;
  } catch (const io::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const io::FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
}
