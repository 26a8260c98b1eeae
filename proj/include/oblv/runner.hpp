#pragma once

#include "oblv/config.hpp"
#include "oblv/io.hpp"

namespace oblv {

struct EraseOutputs {
    ErasureResult result;
    std::filesystem::path tradeoff_path;
    std::filesystem::path manifest_path;
    std::filesystem::path state_dir;
};

// Load the dataset named by the config, run the erasure with the probe
// evaluator, and write tradeoff.csv, manifest.json and state/ under
// output_dir. extra_manifest is merged into the manifest document.
EraseOutputs run_erase_job(const RunConfig& config,
                           const nlohmann::json& extra_manifest = nlohmann::json::object());

// In-memory variant used when the dataset is already loaded.
EraseOutputs run_erase_job(const RunConfig& config, const EmbeddingDataset& dataset,
                           const nlohmann::json& extra_manifest = nlohmann::json::object());

void save_state(const std::filesystem::path& dir, const ErasureState& state);

// Reload the per-step transforms; enough to drive transform().
ErasureState load_state(const std::filesystem::path& dir);

}  // namespace oblv
