#pragma once

#include "tagprof/diagnostics.hpp"
#include "tagprof/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tagprof::detail {

struct StageContext {
    const PipelineConfig& config;
    std::string_view stage;
    std::filesystem::path dir;
    std::function<std::filesystem::path(std::string_view)> dir_of;
    std::uint64_t seed = 0;
    Diagnostics diag;
    std::vector<std::string> artifacts;

    /// Opens `<dir>/<name>` for writing and records it as an artifact.
    std::ofstream create(const std::string& name);
    /// Opens an artifact of another stage for reading.
    std::ifstream open(std::string_view stage_name, const std::string& name) const;
    std::filesystem::path path_of(std::string_view stage_name, const std::string& name) const {
        return dir_of(stage_name) / name;
    }
};

using StageBody = std::function<void(StageContext&)>;

/// Throws std::out_of_range for unknown stage names.
const StageBody& stage_body(std::string_view name);

/// External files (beyond other stages' artifacts) a stage reads, by role.
std::map<std::string, std::filesystem::path> stage_inputs(std::string_view name, const PipelineConfig& config);

}  // namespace tagprof::detail
