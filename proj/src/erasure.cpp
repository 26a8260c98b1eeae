#include "oblv/erasure.hpp"

#include <cmath>

#include "oblv/rng.hpp"

namespace oblv {

void ErasureConfig::validate(bool has_y) const {
    require(steps >= 1, ErrorCode::ConfigError, "steps must be >= 1");
    if (mode == ErasureMode::Supervised)
        require(has_y, ErrorCode::ConfigError, "supervised erasure requires Y labels");
    require(eig_threshold > 0.0 && eig_threshold < 1.0, ErrorCode::ConfigError,
            "eig_threshold must lie in (0, 1)");
    require(rff.first >= 2 && rff.first % 2 == 0 && rff.later >= 2 && rff.later % 2 == 0,
            ErrorCode::ConfigError, "rff dimensions must be even and >= 2");
    encoder_weights.validate();
    evp_weights.validate();
    if (stop_delta) require(*stop_delta >= 0.0, ErrorCode::ConfigError, "stop_delta must be >= 0");
}

namespace {

// stream tags for per-step seed derivation
enum : std::uint64_t {
    kTagInit = 1,
    kTagZ = 2,
    kTagX = 3,
    kTagXi = 4,
    kTagDisZ = 5,
    kTagDisX = 6,
    kTagDisXi = 7,
    kTagEval = 8,
};

std::uint64_t step_seed(std::uint64_t base, int step, std::uint64_t tag) {
    return derive_seed(derive_seed(base, static_cast<std::uint64_t>(step)), tag);
}

KernelSpec rbf_spec(Index dim, std::uint64_t seed) {
    KernelSpec s;
    s.family = KernelFamily::RBF;
    s.rff_dim = dim;
    s.seed = seed;
    return s;
}

}  // namespace

Matrix apply_step(const StepArtifact& step, const Eigen::Ref<const Matrix>& rows) {
    Matrix z = encoder_forward(step.encoder, rows);
    FeatureMatrix phi = rff_features(step.z_map, z, Provenance::Z);
    return normalize_rows(phi.data * step.projection);
}

Matrix transform(const ErasureState& state, const Eigen::Ref<const Matrix>& x_new) {
    require(!state.steps.empty(), ErrorCode::EmptyState, "transform on an empty erasure state");
    require(x_new.cols() == state.original_dim, ErrorCode::ShapeMismatch,
            "transform input has " + std::to_string(x_new.cols()) + " columns, expected " +
                std::to_string(state.original_dim));
    Matrix cur = x_new;
    for (const auto& step : state.steps) cur = apply_step(step, cur);
    return cur;
}

ErasureResult run_erasure(const EmbeddingDataset& dataset, const ErasureConfig& config,
                          const Evaluator& evaluator) {
    dataset.validate();
    config.validate(dataset.y.has_value());
    const bool use_y = config.mode == ErasureMode::Supervised;

    ErasureResult result;
    ErasureState& state = result.state;
    state.split = dataset.split.empty()
                      ? assign_splits(dataset.samples(), config.split, config.seed)
                      : dataset.split;
    require(static_cast<Index>(state.split.size()) == dataset.samples(), ErrorCode::ShapeMismatch,
            "split assignment size mismatch");

    const auto idx_train = split_indices(state.split, Split::Train);
    const auto idx_test = split_indices(state.split, Split::Test);
    require(idx_train.size() >= 2 && !idx_test.empty(), ErrorCode::ConfigError,
            "train and test splits must be non-empty");

    const Matrix x_train = take_rows(dataset.x, idx_train);
    const Matrix x_test = take_rows(dataset.x, idx_test);
    const std::vector<int> s_train = take_labels(dataset.s, idx_train);
    const std::vector<int> s_test = take_labels(dataset.s, idx_test);
    std::optional<std::vector<int>> y_train, y_test;
    if (dataset.y) {
        y_train = take_labels(*dataset.y, idx_train);
        y_test = take_labels(*dataset.y, idx_test);
    }

    state.x_original = x_train;
    state.original_dim = dataset.dim();

    auto evaluate = [&](int step, const Matrix& tr, const Matrix& te) {
        EvalInput in{step,
                     tr,
                     te,
                     s_train,
                     s_test,
                     y_train ? &*y_train : nullptr,
                     y_test ? &*y_test : nullptr,
                     dataset.s_classes,
                     dataset.y_classes,
                     step_seed(config.seed, step, kTagEval)};
        TradeoffRecord rec = evaluator(in);
        rec.step = step;
        return rec;
    };

    if (config.evaluate_baseline) result.records.push_back(evaluate(0, x_train, x_test));

    Matrix cur_train = x_train;
    Matrix cur_test = x_test;
    const std::optional<std::vector<int>> no_labels;

    for (int step = 1; step <= config.steps; ++step) {
        const Index d_rff = config.rff.at(step);
        try {
            EncoderTrainConfig enc;
            enc.iterations = step == 1 ? config.encoder_iterations_first
                                       : config.encoder_iterations_later;
            enc.learning_rate = config.learning_rate;
            enc.weight_decay = config.weight_decay;
            enc.clip_norm = config.clip_norm;
            enc.hidden_width = config.hidden_width;
            enc.hidden_layers = config.hidden_layers;
            enc.output_dim = config.encoder_output_dim;
            enc.init_seed = step_seed(config.seed, step, kTagInit);
            enc.z_spec = rbf_spec(d_rff, step_seed(config.seed, step, kTagZ));
            enc.x_spec = rbf_spec(d_rff, step_seed(config.seed, step, kTagX));
            enc.xi_spec = rbf_spec(d_rff, step_seed(config.seed, step, kTagXi));
            enc.weights = config.encoder_weights;
            if (!use_y) enc.weights.tau_y = 0.0;

            TrainResult trained = train_encoder(cur_train, x_train, use_y ? y_train : no_labels,
                                                dataset.y_classes, s_train, dataset.s_classes, enc);

            DisentangleSpecs specs;
            specs.z = rbf_spec(d_rff, step_seed(config.seed, step, kTagDisZ));
            specs.x = rbf_spec(d_rff, step_seed(config.seed, step, kTagDisX));
            specs.xi = rbf_spec(d_rff, step_seed(config.seed, step, kTagDisXi));
            LossWeights evp = config.evp_weights;
            if (!use_y) evp.tau_y = 0.0;

            DisentangleResult dis =
                solve_disentangle(trained.z, x_train, cur_train, use_y ? y_train : no_labels,
                                  dataset.y_classes, s_train, dataset.s_classes, specs, evp,
                                  config.eig_threshold);

            const double bound = config.constraint_tol * std::max(dis.csz_norm, 1e-20);
            require(dis.constraint_residual <= bound, ErrorCode::ConstraintViolation,
                    "nullspace constraint violated: residual " +
                        std::to_string(dis.constraint_residual) + " exceeds " +
                        std::to_string(bound));

            StepArtifact art;
            art.encoder = trained.params;
            art.z_map = dis.z_map;
            art.projection = dis.q * dis.v;
            art.eigenvalues = dis.eigenvalues;
            art.threshold_used = dis.threshold_used;
            art.csz_norm = dis.csz_norm;
            art.nullspace_residual = dis.nullspace_residual;
            art.constraint_residual = dis.constraint_residual;
            art.q = dis.q;

            // the same projection matrix object is used for train rows here and
            // for replay in apply_step, so transform() reproduces the chain
            cur_train = normalize_rows(dis.l_z.data * art.projection);
            cur_test = apply_step(art, cur_test);
            state.z_current = std::move(trained.z);
            state.steps.push_back(std::move(art));
        } catch (const Error& e) {
            throw Error(e.code(), "step " + std::to_string(step) + ": " + e.what());
        }

        TradeoffRecord rec = evaluate(step, cur_train, cur_test);
        state.history.push_back(rec);
        result.records.push_back(rec);
        state.completed = step;

        if (config.stop_delta && rec.s_acc_test_max <= rec.chance_s + *config.stop_delta) break;
    }

    state.x_current = std::move(cur_train);
    return result;
}

}  // namespace oblv
