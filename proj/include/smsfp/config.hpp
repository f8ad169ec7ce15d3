#pragma once

#include <string>

#include <json.hpp>

#include "smsfp/pipeline.hpp"

namespace smsfp {

nlohmann::json config_to_json(const ReconstructionConfig& config);

// Starts from defaults and overrides whatever keys are present.
ReconstructionConfig config_from_json(const nlohmann::json& j);

ReconstructionConfig load_config_file(const std::string& path);

}  // namespace smsfp
