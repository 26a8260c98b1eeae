#include "oblv/runner.hpp"

#include <fstream>

namespace oblv {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    require(out.is_open(), ErrorCode::ConfigError, path.string() + ": cannot open for write");
    out << text;
    require(static_cast<bool>(out), ErrorCode::ConfigError, path.string() + ": write failed");
}

std::string step_dir_name(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "step_%03u", static_cast<unsigned>(index + 1));
    return buf;
}

}  // namespace

void save_state(const std::filesystem::path& dir, const ErasureState& state) {
    std::filesystem::create_directories(dir);
    json root;
    root["format_version"] = 1;
    root["library_version"] = kLibraryVersion;
    root["steps"] = state.steps.size();
    root["original_dim"] = state.original_dim;
    write_text(dir / "state.json", root.dump(2) + "\n");

    for (std::size_t i = 0; i < state.steps.size(); ++i) {
        const auto& step = state.steps[i];
        const auto sdir = dir / step_dir_name(i);
        std::filesystem::create_directories(sdir);
        for (std::size_t l = 0; l < step.encoder.weights.size(); ++l) {
            write_embeddings_binary(sdir / ("w" + std::to_string(l) + ".bin"),
                                    step.encoder.weights[l]);
            write_embeddings_binary(sdir / ("b" + std::to_string(l) + ".bin"),
                                    step.encoder.biases[l].transpose());
        }
        write_embeddings_binary(sdir / "omega.bin", step.z_map.frequencies);
        write_embeddings_binary(sdir / "projection.bin", step.projection);
        json meta;
        meta["layers"] = step.encoder.weights.size();
        meta["sigma"] = step.z_map.sigma;
        meta["rff_seed"] = step.z_map.seed;
        meta["threshold_used"] = step.threshold_used;
        meta["csz_norm"] = step.csz_norm;
        meta["nullspace_residual"] = step.nullspace_residual;
        meta["constraint_residual"] = step.constraint_residual;
        write_text(sdir / "step.json", meta.dump(2) + "\n");
    }
}

ErasureState load_state(const std::filesystem::path& dir) {
    std::ifstream in(dir / "state.json");
    require(in.is_open(), ErrorCode::EmptyState, (dir / "state.json").string() + ": cannot open");
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, "state.json: " + std::string(e.what()));
    }

    ErasureState state;
    state.original_dim = root.at("original_dim").get<Index>();
    const auto steps = root.at("steps").get<std::size_t>();
    require(steps >= 1, ErrorCode::EmptyState, "state holds no steps");

    for (std::size_t i = 0; i < steps; ++i) {
        const auto sdir = dir / step_dir_name(i);
        std::ifstream meta_in(sdir / "step.json");
        require(meta_in.is_open(), ErrorCode::TruncatedFile,
                (sdir / "step.json").string() + ": cannot open");
        json meta;
        meta_in >> meta;

        StepArtifact art;
        const auto layers = meta.at("layers").get<std::size_t>();
        for (std::size_t l = 0; l < layers; ++l) {
            art.encoder.weights.push_back(read_embeddings(sdir / ("w" + std::to_string(l) + ".bin")));
            Matrix b = read_embeddings(sdir / ("b" + std::to_string(l) + ".bin"));
            art.encoder.biases.push_back(b.transpose().col(0));
        }
        art.z_map.frequencies = read_embeddings(sdir / "omega.bin");
        art.z_map.input_dim = art.z_map.frequencies.rows();
        art.z_map.feature_dim = art.z_map.frequencies.cols() * 2;
        art.z_map.sigma = meta.at("sigma").get<double>();
        art.z_map.seed = meta.at("rff_seed").get<std::uint64_t>();
        art.projection = read_embeddings(sdir / "projection.bin");
        art.threshold_used = meta.at("threshold_used").get<double>();
        art.csz_norm = meta.at("csz_norm").get<double>();
        art.nullspace_residual = meta.at("nullspace_residual").get<double>();
        art.constraint_residual = meta.at("constraint_residual").get<double>();
        state.steps.push_back(std::move(art));
    }
    state.completed = static_cast<int>(steps);
    return state;
}

EraseOutputs run_erase_job(const RunConfig& config, const EmbeddingDataset& dataset,
                           const json& extra_manifest) {
    dataset.validate();
    ErasureResult result = run_erasure(dataset, config.erasure, make_probe_evaluator(config.evaluator));

    std::filesystem::create_directories(config.output_dir);
    EraseOutputs out;
    out.tradeoff_path = config.output_dir / "tradeoff.csv";
    out.manifest_path = config.output_dir / "manifest.json";
    out.state_dir = config.output_dir / "state";

    write_text(out.tradeoff_path, tradeoff_csv(result.records));
    save_state(out.state_dir, result.state);

    json manifest;
    manifest["config"] = run_config_to_json(config);
    manifest["library_version"] = kLibraryVersion;
    manifest["format_version"] = 1;
    manifest["data"] = {{"samples", dataset.samples()},
                        {"dim", dataset.dim()},
                        {"s_classes", dataset.s_classes},
                        {"y_classes", dataset.y_classes},
                        {"has_y", dataset.y.has_value()}};
    manifest["completed_steps"] = result.state.completed;
    for (const auto& [key, value] : extra_manifest.items()) manifest[key] = value;
    write_text(out.manifest_path, manifest.dump(2) + "\n");

    out.result = std::move(result);
    return out;
}

EraseOutputs run_erase_job(const RunConfig& config, const json& extra_manifest) {
    EmbeddingDataset dataset;
    dataset.x = read_embeddings(config.x_path);
    LabelColumn s = read_labels(config.s_path);
    dataset.s = s.values;
    dataset.s_classes = s.classes;
    json extra = extra_manifest;
    json s_map = json::object();
    for (const auto& [orig, dense] : s.mapping) s_map[std::to_string(orig)] = dense;
    extra["label_maps"]["s"] = s_map;
    if (config.y_path) {
        LabelColumn y = read_labels(*config.y_path);
        dataset.y = y.values;
        dataset.y_classes = y.classes;
        json y_map = json::object();
        for (const auto& [orig, dense] : y.mapping) y_map[std::to_string(orig)] = dense;
        extra["label_maps"]["y"] = y_map;
    }
    return run_erase_job(config, dataset, extra);
}

}  // namespace oblv
