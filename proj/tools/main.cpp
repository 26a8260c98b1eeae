#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "oblv/config.hpp"
#include "oblv/harness.hpp"
#include "oblv/io.hpp"
#include "oblv/metrics.hpp"
#include "oblv/probes.hpp"
#include "oblv/rng.hpp"
#include "oblv/runner.hpp"
#include "oblv/synthetic.hpp"

namespace {

using namespace oblv;
using nlohmann::json;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    require(out.is_open(), ErrorCode::ConfigError, path.string() + ": cannot open for write");
    out << text;
}

std::vector<long> originals_of(const LabelColumn& col) {
    std::map<int, long> inverse;
    for (const auto& [orig, dense] : col.mapping) inverse[dense] = orig;
    std::vector<long> out;
    out.reserve(col.values.size());
    for (int v : col.values) out.push_back(inverse.at(v));
    return out;
}

std::vector<std::pair<double, double>> parse_grid(const std::string& text) {
    if (text == "default") return KernelProbeSpec{}.grid;
    std::vector<std::pair<double, double>> grid;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto colon = cell.find(':');
        require(colon != std::string::npos, ErrorCode::ConfigError,
                "--grid entries must look like gamma:C");
        grid.emplace_back(std::stod(cell.substr(0, colon)), std::stod(cell.substr(colon + 1)));
    }
    require(!grid.empty(), ErrorCode::ConfigError, "--grid must name at least one entry");
    return grid;
}

int cmd_hsic(const std::string& x_path, const std::string& y_path, bool exact, Index rff_dim,
             std::uint64_t seed) {
    Matrix x = read_embeddings(x_path);
    Matrix y = read_embeddings(y_path);
    require(x.rows() == y.rows(), ErrorCode::SampleCountMismatch,
            "--x and --y hold different sample counts");
    HsicReading reading;
    if (exact) {
        const double sx = median_heuristic(x, 2000, seed);
        const double sy = median_heuristic(y, 2000, derive_seed(seed, 1));
        reading = hsic_exact(rbf_kernel_matrix(x, sx), rbf_kernel_matrix(y, sy));
    } else {
        KernelSpec kx{KernelFamily::RBF, std::nullopt, rff_dim, seed};
        KernelSpec ky{KernelFamily::RBF, std::nullopt, rff_dim, derive_seed(seed, 1)};
        reading = hsic_feature(rff_features(make_rff_map(kx, x), x),
                               rff_features(make_rff_map(ky, y), y));
    }
    std::cout << "hsic=" << format_double(reading.value)
              << " estimator=" << (reading.estimator == HsicEstimator::ExactKernel ? "exact" : "rff")
              << " n=" << reading.n << "\n";
    return 0;
}

int cmd_probe(const std::string& x_path, const std::string& labels_path, const std::string& grid,
              double test_frac, std::uint64_t seed, int jobs, const std::string& out_path) {
    Matrix x = read_embeddings(x_path);
    LabelColumn labels = read_labels(labels_path);
    require(x.rows() == static_cast<Index>(labels.values.size()), ErrorCode::SampleCountMismatch,
            "--x and --labels hold different sample counts");
    require(test_frac > 0.0 && test_frac < 1.0, ErrorCode::ConfigError,
            "--test-frac must lie in (0, 1)");

    SplitFractions f{1.0 - test_frac, 0.0, test_frac};
    auto split = assign_splits(x.rows(), f, seed);
    const auto idx_train = split_indices(split, Split::Train);
    const auto idx_test = split_indices(split, Split::Test);

    ProbeSuite suite;
    suite.kernel.grid = parse_grid(grid);
    ProbeData train{take_rows(x, idx_train), take_labels(labels.values, idx_train), labels.classes};
    ProbeData test{take_rows(x, idx_test), take_labels(labels.values, idx_test), labels.classes};
    ProbeReport report = probe_max(train, test, suite, seed, jobs);

    std::ostringstream csv;
    csv << "kind,gamma,c,seed,train_acc,test_acc\n";
    for (const auto& e : report.entries) {
        csv << e.kind << ',' << format_double(e.gamma) << ',' << format_double(e.c) << ','
            << e.seed << ',' << format_double(e.train_acc) << ',' << format_double(e.test_acc)
            << '\n';
    }
    csv << "max,,,," << format_double(report.max_train_acc) << ','
        << format_double(report.max_test_acc) << '\n';
    write_text_file(out_path, csv.str());

    std::cout << "max_test_acc=" << format_double(report.max_test_acc)
              << " max_train_acc=" << format_double(report.max_train_acc)
              << " chance=" << format_double(report.chance) << " report=" << out_path << "\n";
    return 0;
}

int cmd_fairness(const std::string& preds_path, const std::string& y_path,
                 const std::string& s_path) {
    LabelColumn preds_col = read_labels(preds_path);
    LabelColumn y_col = read_labels(y_path);
    LabelColumn s_col = read_labels(s_path);
    require(preds_col.values.size() == y_col.values.size() &&
                y_col.values.size() == s_col.values.size(),
            ErrorCode::SampleCountMismatch, "--preds, --y and --s must have equal length");

    // shared dense mapping across predictions and targets
    auto preds_orig = originals_of(preds_col);
    auto y_orig = originals_of(y_col);
    std::map<long, int> unified;
    for (long v : preds_orig) unified.emplace(v, 0);
    for (long v : y_orig) unified.emplace(v, 0);
    int next = 0;
    for (auto& [k, v] : unified) v = next++;
    std::vector<int> preds, y;
    for (long v : preds_orig) preds.push_back(unified.at(v));
    for (long v : y_orig) y.push_back(unified.at(v));

    FairnessReport rep = fairness_report(preds, y, s_col.values, next);
    std::cout << "dp=" << format_double(rep.dp) << " gap_rms=" << format_double(rep.gap_rms)
              << " classes=" << next << " skipped_classes=" << rep.skipped_classes << "\n";
    return 0;
}

int cmd_synth(Index n, Index d, std::uint64_t seed, const std::string& out_dir, double noise,
              int depth, double rho, double scale) {
    SynthSpec spec;
    spec.n = n;
    spec.d = d;
    spec.seed = seed;
    spec.noise = noise;
    spec.depth = depth;
    spec.rho = rho;
    spec.signal_scale = scale;
    EmbeddingDataset data = generate_synthetic(spec);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_embeddings_binary(dir / "x.bin", data.x);
    write_labels(dir / "s.csv", data.s);
    write_labels(dir / "y.csv", *data.y);

    json manifest;
    manifest["generator"] = {{"kind", "synthetic"}, {"n", spec.n},     {"d", spec.d},
                             {"noise", spec.noise}, {"depth", spec.depth}, {"rho", spec.rho},
                             {"signal_scale", spec.signal_scale}, {"seed", spec.seed}};
    manifest["recipe"] =
        "binary y/s drive separate coordinate blocks (d/4 each) with uniform amplitudes in "
        "[0.5,1.5]; remaining block is N(0,1) noise; `depth` rounds of rotate-then-tanh mixing "
        "plus a final rotation";
    manifest["files"] = {{"x", "x.bin"}, {"s", "s.csv"}, {"y", "y.csv"}};
    manifest["library_version"] = kLibraryVersion;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << out_dir << " (n=" << n << ", d=" << d << ")\n";
    return 0;
}

int cmd_resample(const std::string& x_path, const std::string& y_path, const std::string& s_path,
                 double split, std::uint64_t seed, const std::string& out_dir) {
    EmbeddingDataset data;
    data.x = read_embeddings(x_path);
    LabelColumn s = read_labels(s_path);
    LabelColumn y = read_labels(y_path);
    data.s = s.values;
    data.s_classes = s.classes;
    data.y = y.values;
    data.y_classes = y.classes;
    require(data.x.rows() == static_cast<Index>(data.s.size()) &&
                data.s.size() == y.values.size(),
            ErrorCode::SampleCountMismatch, "--x, --y and --s must have equal length");

    EmbeddingDataset out = controlled_resample(data, split, seed);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_embeddings_binary(dir / "x.bin", out.x);
    write_labels(dir / "s.csv", out.s);
    write_labels(dir / "y.csv", *out.y);

    json manifest;
    manifest["resample"] = {{"split", split}, {"seed", seed}, {"source_x", x_path},
                            {"source_y", y_path}, {"source_s", s_path},
                            {"samples", out.samples()}};
    manifest["library_version"] = kLibraryVersion;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << out_dir << " (n=" << out.samples() << ")\n";
    return 0;
}

int cmd_transform(const std::string& state_dir, const std::string& x_path,
                  const std::string& out_path) {
    ErasureState state = load_state(state_dir);
    Matrix x = read_embeddings(x_path);
    Matrix out = transform(state, x);
    const std::filesystem::path p(out_path);
    if (p.extension() == ".csv")
        write_embeddings_csv(p, out);
    else
        write_embeddings_binary(p, out);
    std::cout << "wrote " << out_path << " (" << out.rows() << " x " << out.cols() << ")\n";
    return 0;
}

int cmd_erase(const std::string& config_path, int jobs_override) {
    RunConfig cfg = load_run_config(config_path);
    if (jobs_override > 0) cfg.evaluator.jobs = jobs_override;
    EraseOutputs out = run_erase_job(cfg);
    const auto& records = out.result.records;
    for (const auto& r : records) {
        std::cout << "step " << r.step << ": s_test_max=" << format_double(r.s_acc_test_max)
                  << " s_train_max=" << format_double(r.s_acc_train_max)
                  << " y_test=" << format_double(r.y_acc_test)
                  << " hsic_s=" << format_double(r.hsic_s) << " dim=" << r.dim << "\n";
    }
    std::cout << "tradeoff=" << out.tradeoff_path << " manifest=" << out.manifest_path
              << " state=" << out.state_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlinear concept erasure toolkit"};
    app.require_subcommand(1);

    // hsic
    std::string hsic_x, hsic_y;
    bool hsic_exact_flag = false;
    Index hsic_rff = 1024;
    std::uint64_t hsic_seed = 0;
    auto* hsic_cmd = app.add_subcommand("hsic", "dependence between two embedding matrices");
    hsic_cmd->add_option("--x", hsic_x)->required();
    hsic_cmd->add_option("--y", hsic_y)->required();
    auto* exact_opt = hsic_cmd->add_flag("--exact", hsic_exact_flag, "exact kernel estimator");
    hsic_cmd->add_option("--rff", hsic_rff, "feature-map estimator with D features")
        ->excludes(exact_opt);
    hsic_cmd->add_option("--seed", hsic_seed);

    // erase
    std::string erase_config;
    int erase_jobs = 0;
    auto* erase_cmd = app.add_subcommand("erase", "run the iterative erasure pipeline");
    erase_cmd->add_option("--config", erase_config)->required();
    erase_cmd->add_option("--jobs", erase_jobs, "override the probe-grid parallelism");

    // transform
    std::string tr_state, tr_x, tr_out;
    auto* tr_cmd = app.add_subcommand("transform", "apply a saved erasure chain");
    tr_cmd->add_option("--state", tr_state)->required();
    tr_cmd->add_option("--x", tr_x)->required();
    tr_cmd->add_option("--out", tr_out)->required();

    // probe
    std::string pr_x, pr_labels, pr_grid = "default", pr_out = "probe_report.csv";
    double pr_test_frac = 0.3;
    std::uint64_t pr_seed = 0;
    int pr_jobs = 1;
    auto* pr_cmd = app.add_subcommand("probe", "max-probe leakage measurement");
    pr_cmd->add_option("--x", pr_x)->required();
    pr_cmd->add_option("--labels", pr_labels)->required();
    pr_cmd->add_option("--grid", pr_grid, "kernel grid: 'default' or gamma:C list");
    pr_cmd->add_option("--test-frac", pr_test_frac);
    pr_cmd->add_option("--seed", pr_seed);
    pr_cmd->add_option("--jobs", pr_jobs);
    pr_cmd->add_option("--out", pr_out);

    // fairness
    std::string fa_preds, fa_y, fa_s;
    auto* fa_cmd = app.add_subcommand("fairness", "demographic parity and TPR-gap metrics");
    fa_cmd->add_option("--preds", fa_preds)->required();
    fa_cmd->add_option("--y", fa_y)->required();
    fa_cmd->add_option("--s", fa_s)->required();

    // synth
    Index sy_n = 6000, sy_d = 64;
    std::uint64_t sy_seed = 0;
    std::string sy_out;
    double sy_noise = 0.3, sy_rho = 0.0, sy_scale = 1.0;
    int sy_depth = 1;
    auto* sy_cmd = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
    sy_cmd->add_option("--n", sy_n);
    sy_cmd->add_option("--d", sy_d);
    sy_cmd->add_option("--seed", sy_seed);
    sy_cmd->add_option("--out", sy_out)->required();
    sy_cmd->add_option("--noise", sy_noise);
    sy_cmd->add_option("--depth", sy_depth);
    sy_cmd->add_option("--rho", sy_rho);
    sy_cmd->add_option("--scale", sy_scale);

    // resample
    std::string rs_x, rs_y, rs_s, rs_out;
    double rs_split = 0.8;
    std::uint64_t rs_seed = 0;
    auto* rs_cmd = app.add_subcommand("resample", "controlled biased subsampling");
    rs_cmd->add_option("--x", rs_x)->required();
    rs_cmd->add_option("--y", rs_y)->required();
    rs_cmd->add_option("--s", rs_s)->required();
    rs_cmd->add_option("--split", rs_split)->required();
    rs_cmd->add_option("--seed", rs_seed);
    rs_cmd->add_option("--out", rs_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // validation failure
    }

    try {
        if (hsic_cmd->parsed())
            return cmd_hsic(hsic_x, hsic_y, hsic_exact_flag, hsic_rff, hsic_seed);
        if (erase_cmd->parsed()) return cmd_erase(erase_config, erase_jobs);
        if (tr_cmd->parsed()) return cmd_transform(tr_state, tr_x, tr_out);
        if (pr_cmd->parsed())
            return cmd_probe(pr_x, pr_labels, pr_grid, pr_test_frac, pr_seed, pr_jobs, pr_out);
        if (fa_cmd->parsed()) return cmd_fairness(fa_preds, fa_y, fa_s);
        if (sy_cmd->parsed())
            return cmd_synth(sy_n, sy_d, sy_seed, sy_out, sy_noise, sy_depth, sy_rho, sy_scale);
        if (rs_cmd->parsed())
            return cmd_resample(rs_x, rs_y, rs_s, rs_split, rs_seed, rs_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_numerical(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
