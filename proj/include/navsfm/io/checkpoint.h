#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "navsfm/io/config.h"
#include "navsfm/pipeline/pipeline.h"

namespace navsfm::io {

// A checkpoint written by a different configuration or for different input.
class CheckpointMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything except thread count and the simulation block: the options that
// change stage results.
std::string CheckpointConfigKey(const RunConfig& config);
// FNV-1a over camera, rig, priors and matches.
uint64_t InputFingerprint(const SurveyInput& input);

// <dir>/stage_<completed>_<name>.ckpt
std::string CheckpointPath(const std::string& dir, int completed_stages);

// Atomic (write then rename).
void SaveCheckpoint(const std::string& path, const PipelineState& state,
                    const std::string& config_key, uint64_t fingerprint);
// Throws CheckpointMismatch when the key or fingerprint differ, FormatError
// when unreadable.
PipelineState LoadCheckpoint(const std::string& path, const std::string& config_key,
                             uint64_t fingerprint);
// The checkpoint with the most completed stages in dir, if any.
std::optional<PipelineState> LoadLatestCheckpoint(const std::string& dir,
                                                  const std::string& config_key,
                                                  uint64_t fingerprint);

}  // namespace navsfm::io
