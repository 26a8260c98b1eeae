#pragma once

#include <filesystem>

#include <json.hpp>

#include "oblv/harness.hpp"

namespace oblv {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Run description for the `erase` subcommand. Parsed from a JSON document
// with a strict schema: unknown keys are rejected anywhere in the tree.
struct RunConfig {
    std::filesystem::path x_path;
    std::filesystem::path s_path;
    std::optional<std::filesystem::path> y_path;
    std::filesystem::path output_dir;
    ErasureConfig erasure;
    EvaluatorConfig evaluator;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

// Fully-resolved round-trippable view of a config; embedded in manifests.
nlohmann::json run_config_to_json(const RunConfig& config);

}  // namespace oblv
