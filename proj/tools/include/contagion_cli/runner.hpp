#pragma once

#include <filesystem>
#include <string>

#include "contagion_cli/config.hpp"

namespace contagion::cli {

inline constexpr const char* kVersion = "0.3.0";

struct RunSummary {
    std::size_t files = 0;
    std::string headline;  // one-line description of the result
};

// Executes a validated scenario and writes its output tree, manifest last.
RunSummary run(const ScenarioConfig& config, const std::filesystem::path& out_dir);

}  // namespace contagion::cli
