#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vidprint/run_config.hpp"

namespace vidprint {

std::string tool_version();

/// Files written by one command, all validated after writing.
using Written = std::vector<std::filesystem::path>;

Written cmd_synth(const RunConfig& config);
Written cmd_preprocess(const RunConfig& config);
Written cmd_train(const RunConfig& config);
Written cmd_embed(const RunConfig& config);
/// mode: closed, open, grid, sweep or binary.
Written cmd_eval(const RunConfig& config, const std::string& mode);

}  // namespace vidprint
