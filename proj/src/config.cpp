#include "oblv/config.hpp"

#include <fstream>
#include <set>

namespace oblv {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    require(obj.is_object(), ErrorCode::ConfigError, where + " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        require(allowed.count(key) > 0, ErrorCode::ConfigError,
                "unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::ConfigError, "key '" + key + "' has the wrong type");
    }
}

std::string get_required_string(const json& obj, const std::string& key, const std::string& where) {
    require(obj.contains(key), ErrorCode::ConfigError, "missing key '" + key + "' in " + where);
    require(obj.at(key).is_string(), ErrorCode::ConfigError, "key '" + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc) {
    check_keys(doc, "config",
               {"dataset", "mode", "output_dir", "seed", "steps", "stop_delta", "encoder",
                "loss_weights", "evp_weights", "eig_threshold", "rff", "split", "probes", "jobs",
                "evaluate_baseline", "constraint_tol"});

    RunConfig cfg;

    require(doc.contains("dataset"), ErrorCode::ConfigError, "missing key 'dataset'");
    const auto& ds = doc.at("dataset");
    check_keys(ds, "dataset", {"x", "s", "y"});
    cfg.x_path = get_required_string(ds, "x", "dataset");
    cfg.s_path = get_required_string(ds, "s", "dataset");
    if (ds.contains("y") && !ds.at("y").is_null())
        cfg.y_path = std::filesystem::path(get_required_string(ds, "y", "dataset"));

    cfg.output_dir = get_required_string(doc, "output_dir", "config");

    const std::string mode = get_or<std::string>(doc, "mode", "supervised");
    if (mode == "supervised")
        cfg.erasure.mode = ErasureMode::Supervised;
    else if (mode == "unsupervised")
        cfg.erasure.mode = ErasureMode::Unsupervised;
    else
        fail(ErrorCode::ConfigError, "mode must be 'supervised' or 'unsupervised'");

    cfg.erasure.seed = get_or<std::uint64_t>(doc, "seed", 0);
    cfg.erasure.steps = get_or<int>(doc, "steps", cfg.erasure.steps);
    if (doc.contains("stop_delta")) {
        if (doc.at("stop_delta").is_null())
            cfg.erasure.stop_delta.reset();
        else
            cfg.erasure.stop_delta = doc.at("stop_delta").get<double>();
    }
    cfg.erasure.eig_threshold = get_or<double>(doc, "eig_threshold", cfg.erasure.eig_threshold);
    cfg.erasure.evaluate_baseline =
        get_or<bool>(doc, "evaluate_baseline", cfg.erasure.evaluate_baseline);
    cfg.erasure.constraint_tol = get_or<double>(doc, "constraint_tol", cfg.erasure.constraint_tol);

    if (doc.contains("encoder")) {
        const auto& e = doc.at("encoder");
        check_keys(e, "encoder",
                   {"iterations_first", "iterations_later", "learning_rate", "weight_decay",
                    "clip_norm", "hidden_width", "hidden_layers", "output_dim"});
        cfg.erasure.encoder_iterations_first =
            get_or<int>(e, "iterations_first", cfg.erasure.encoder_iterations_first);
        cfg.erasure.encoder_iterations_later =
            get_or<int>(e, "iterations_later", cfg.erasure.encoder_iterations_later);
        cfg.erasure.learning_rate = get_or<double>(e, "learning_rate", cfg.erasure.learning_rate);
        cfg.erasure.weight_decay = get_or<double>(e, "weight_decay", cfg.erasure.weight_decay);
        cfg.erasure.clip_norm = get_or<double>(e, "clip_norm", cfg.erasure.clip_norm);
        cfg.erasure.hidden_width = get_or<Index>(e, "hidden_width", cfg.erasure.hidden_width);
        cfg.erasure.hidden_layers = get_or<int>(e, "hidden_layers", cfg.erasure.hidden_layers);
        cfg.erasure.encoder_output_dim =
            get_or<Index>(e, "output_dim", cfg.erasure.encoder_output_dim);
    }

    auto parse_weights = [&](const char* key, LossWeights& w, bool has_xi) {
        if (!doc.contains(key)) return;
        const auto& obj = doc.at(key);
        check_keys(obj, key,
                   has_xi ? std::set<std::string>{"tau_xi", "tau_x", "tau_y"}
                          : std::set<std::string>{"tau_x", "tau_y"});
        w.tau_xi = get_or<double>(obj, "tau_xi", w.tau_xi);
        w.tau_x = get_or<double>(obj, "tau_x", w.tau_x);
        w.tau_y = get_or<double>(obj, "tau_y", w.tau_y);
    };
    parse_weights("loss_weights", cfg.erasure.encoder_weights, true);
    parse_weights("evp_weights", cfg.erasure.evp_weights, false);

    if (doc.contains("rff")) {
        const auto& r = doc.at("rff");
        check_keys(r, "rff", {"dim_first", "dim_later", "hsic_dim"});
        cfg.erasure.rff.first = get_or<Index>(r, "dim_first", cfg.erasure.rff.first);
        cfg.erasure.rff.later = get_or<Index>(r, "dim_later", cfg.erasure.rff.later);
        cfg.evaluator.hsic_dim = get_or<Index>(r, "hsic_dim", cfg.evaluator.hsic_dim);
    }

    if (doc.contains("split")) {
        const auto& s = doc.at("split");
        check_keys(s, "split", {"train", "val", "test"});
        cfg.erasure.split.train = get_or<double>(s, "train", cfg.erasure.split.train);
        cfg.erasure.split.val = get_or<double>(s, "val", cfg.erasure.split.val);
        cfg.erasure.split.test = get_or<double>(s, "test", cfg.erasure.split.test);
    }

    if (doc.contains("probes")) {
        const auto& p = doc.at("probes");
        check_keys(p, "probes",
                   {"mlp_seeds", "mlp_epochs", "mlp_lr", "mlp_batch", "mlp_hidden", "kernel_grid",
                    "kernel_rff_dim", "kernel_max_iters", "kernel_tol", "kernel_lr"});
        auto& mlp = cfg.evaluator.probes.mlp;
        auto& ker = cfg.evaluator.probes.kernel;
        mlp.seeds = get_or<int>(p, "mlp_seeds", mlp.seeds);
        mlp.epochs = get_or<int>(p, "mlp_epochs", mlp.epochs);
        mlp.learning_rate = get_or<double>(p, "mlp_lr", mlp.learning_rate);
        mlp.batch = get_or<Index>(p, "mlp_batch", mlp.batch);
        if (p.contains("mlp_hidden")) {
            mlp.hidden.clear();
            for (const auto& h : p.at("mlp_hidden")) mlp.hidden.push_back(h.get<Index>());
            require(!mlp.hidden.empty(), ErrorCode::ConfigError, "mlp_hidden must be non-empty");
        }
        if (p.contains("kernel_grid")) {
            ker.grid.clear();
            for (const auto& cell : p.at("kernel_grid")) {
                require(cell.is_array() && cell.size() == 2, ErrorCode::ConfigError,
                        "kernel_grid entries must be [gamma, C] pairs");
                ker.grid.emplace_back(cell[0].get<double>(), cell[1].get<double>());
            }
            require(!ker.grid.empty(), ErrorCode::ConfigError, "kernel_grid must be non-empty");
        }
        ker.rff_dim = get_or<Index>(p, "kernel_rff_dim", ker.rff_dim);
        ker.max_iters = get_or<int>(p, "kernel_max_iters", ker.max_iters);
        ker.tol = get_or<double>(p, "kernel_tol", ker.tol);
        ker.learning_rate = get_or<double>(p, "kernel_lr", ker.learning_rate);
    }

    cfg.evaluator.jobs = get_or<int>(doc, "jobs", cfg.evaluator.jobs);
    require(cfg.evaluator.jobs >= 1, ErrorCode::ConfigError, "jobs must be >= 1");
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.is_open(), ErrorCode::ConfigError, path.string() + ": cannot open");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    return parse_run_config(doc);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    nlohmann::json doc;
    doc["dataset"]["x"] = cfg.x_path.string();
    doc["dataset"]["s"] = cfg.s_path.string();
    if (cfg.y_path) doc["dataset"]["y"] = cfg.y_path->string();
    doc["output_dir"] = cfg.output_dir.string();
    doc["mode"] = cfg.erasure.mode == ErasureMode::Supervised ? "supervised" : "unsupervised";
    doc["seed"] = cfg.erasure.seed;
    doc["steps"] = cfg.erasure.steps;
    if (cfg.erasure.stop_delta)
        doc["stop_delta"] = *cfg.erasure.stop_delta;
    else
        doc["stop_delta"] = nullptr;
    doc["eig_threshold"] = cfg.erasure.eig_threshold;
    doc["evaluate_baseline"] = cfg.erasure.evaluate_baseline;
    doc["constraint_tol"] = cfg.erasure.constraint_tol;
    doc["encoder"] = {{"iterations_first", cfg.erasure.encoder_iterations_first},
                      {"iterations_later", cfg.erasure.encoder_iterations_later},
                      {"learning_rate", cfg.erasure.learning_rate},
                      {"weight_decay", cfg.erasure.weight_decay},
                      {"clip_norm", cfg.erasure.clip_norm},
                      {"hidden_width", cfg.erasure.hidden_width},
                      {"hidden_layers", cfg.erasure.hidden_layers},
                      {"output_dim", cfg.erasure.encoder_output_dim}};
    doc["loss_weights"] = {{"tau_xi", cfg.erasure.encoder_weights.tau_xi},
                           {"tau_x", cfg.erasure.encoder_weights.tau_x},
                           {"tau_y", cfg.erasure.encoder_weights.tau_y}};
    doc["evp_weights"] = {{"tau_x", cfg.erasure.evp_weights.tau_x},
                          {"tau_y", cfg.erasure.evp_weights.tau_y}};
    doc["rff"] = {{"dim_first", cfg.erasure.rff.first},
                  {"dim_later", cfg.erasure.rff.later},
                  {"hsic_dim", cfg.evaluator.hsic_dim}};
    doc["split"] = {{"train", cfg.erasure.split.train},
                    {"val", cfg.erasure.split.val},
                    {"test", cfg.erasure.split.test}};
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& [g, c] : cfg.evaluator.probes.kernel.grid) grid.push_back({g, c});
    doc["probes"] = {{"mlp_seeds", cfg.evaluator.probes.mlp.seeds},
                     {"mlp_epochs", cfg.evaluator.probes.mlp.epochs},
                     {"mlp_lr", cfg.evaluator.probes.mlp.learning_rate},
                     {"mlp_batch", cfg.evaluator.probes.mlp.batch},
                     {"mlp_hidden", cfg.evaluator.probes.mlp.hidden},
                     {"kernel_grid", grid},
                     {"kernel_rff_dim", cfg.evaluator.probes.kernel.rff_dim},
                     {"kernel_max_iters", cfg.evaluator.probes.kernel.max_iters},
                     {"kernel_tol", cfg.evaluator.probes.kernel.tol},
                     {"kernel_lr", cfg.evaluator.probes.kernel.learning_rate}};
    doc["jobs"] = cfg.evaluator.jobs;
    return doc;
}

}  // namespace oblv
