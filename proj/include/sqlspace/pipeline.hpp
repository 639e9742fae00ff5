#pragma once

#include <string>
#include <vector>

#include "sqlspace/config.hpp"

namespace sqlspace::pipeline {

/// The stages in execution order.
const std::vector<std::string>& stage_names();
bool is_stage(const std::string& name);

/// Runs a single stage (or "all"), writing its artifacts under cfg.run_dir
/// and recording them in the run manifest. Missing upstream artifacts error
/// with the name of the stage that produces them.
void run_stage(const std::string& stage, const RunConfig& cfg);

}  // namespace sqlspace::pipeline
