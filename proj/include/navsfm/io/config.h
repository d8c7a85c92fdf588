#pragma once

#include <string>

#include "json.hpp"
#include "navsfm/pipeline/pipeline.h"
#include "navsfm/sim/survey_sim.h"

namespace navsfm::io {

using Json = nlohmann::ordered_json;

// Invalid configuration: unknown key, wrong type or out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a run is parameterized by. The simulation block is only read
// by the simulate subcommand.
struct RunConfig {
  PipelineConfig pipeline;
  sim::SurveyConfig survey;
  sim::NoiseModel noise;
  uint64_t noise_seed = 1;
};

// Environment variable naming the configuration file.
inline constexpr const char* kConfigEnv = "NAVSFM_CONFIG";

// Complete JSON form; every option appears.
Json ToJson(const RunConfig& config);
// Applies a (partial) JSON object on top of the defaults. Throws ConfigError
// on unknown keys, type mismatches and failed validation.
RunConfig RunConfigFromJson(const Json& json);
// Applies `patch` on top of `base`, with the same checks.
RunConfig ApplyConfig(const RunConfig& base, const Json& patch);

RunConfig LoadConfigFile(const std::string& path);
// Path given explicitly, else $NAVSFM_CONFIG, else the defaults.
RunConfig LoadConfig(const std::string& path = "");

// Sets one option from "a.b.c=value" (value parsed as JSON, else taken as a
// string).
RunConfig ApplyOverride(const RunConfig& base, const std::string& assignment);

Json ToJson(const Pose& pose);
Pose PoseFromJson(const Json& json);

// camera.json: {"camera": {...}, "rig": {...}}.
Json CameraToJson(const CameraIntrinsics& camera, const RigExtrinsics& rig);
void CameraFromJson(const Json& json, CameraIntrinsics* camera, RigExtrinsics* rig);
void WriteCameraFile(const std::string& path, const CameraIntrinsics& camera,
                     const RigExtrinsics& rig);
void ReadCameraFile(const std::string& path, CameraIntrinsics* camera, RigExtrinsics* rig);

}  // namespace navsfm::io
