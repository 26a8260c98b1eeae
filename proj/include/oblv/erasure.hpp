#pragma once

#include <functional>

#include "oblv/dataset.hpp"
#include "oblv/disentangle.hpp"
#include "oblv/encoder.hpp"
#include "oblv/metrics.hpp"

namespace oblv {

enum class ErasureMode { Supervised, Unsupervised };

struct RffSchedule {
    Index first = 2500;
    Index later = 1500;

    Index at(int step) const { return step <= 1 ? first : later; }
};

struct ErasureConfig {
    int steps = 8;  // M
    ErasureMode mode = ErasureMode::Supervised;

    int encoder_iterations_first = 30;
    int encoder_iterations_later = 25;
    double learning_rate = 5e-4;
    double weight_decay = 1e-3;
    double clip_norm = 10.0;
    Index hidden_width = 256;
    int hidden_layers = 1;
    Index encoder_output_dim = 0;  // 0 -> min(d_in, 256)

    LossWeights encoder_weights{0.05, 0.02, 4.0};  // tau_xi, tau_x, tau_y
    LossWeights evp_weights{0.0, 0.2, 3.0};        // tau_xi unused in the EVP
    double eig_threshold = 1e-4;
    RffSchedule rff;

    SplitFractions split;
    std::uint64_t seed = 0;
    std::optional<double> stop_delta = 0.01;  // stop when S acc <= chance + delta
    bool evaluate_baseline = true;
    double constraint_tol = 1e-6;  // per-step relative bound on ||C_sz Q V||

    void validate(bool has_y) const;
};

// Everything the evaluator callback sees after each erasure step. step == 0
// is the pre-erasure baseline on the raw representation.
struct EvalInput {
    int step = 0;
    const Matrix& train_repr;
    const Matrix& test_repr;
    const std::vector<int>& s_train;
    const std::vector<int>& s_test;
    const std::vector<int>* y_train = nullptr;  // null when the dataset has no Y
    const std::vector<int>* y_test = nullptr;
    int s_classes = 0;
    int y_classes = 0;
    std::uint64_t seed = 0;  // derived per step
};

using Evaluator = std::function<TradeoffRecord(const EvalInput&)>;

// Per-step transform: the trained encoder, the Z feature map of the
// disentanglement, and the projection Q V.
struct StepArtifact {
    EncoderParams encoder;
    RffMap z_map;
    Matrix projection;  // D_z x m, equals Q * V
    Vector eigenvalues;
    double threshold_used = 0.0;
    double csz_norm = 0.0;
    double nullspace_residual = 0.0;
    double constraint_residual = 0.0;
    Matrix q;  // retained for constraint audits
};

struct ErasureState {
    int completed = 0;
    Matrix x_original;       // train-split input at step 1
    Matrix x_current;        // train-split X^{i+1}
    Matrix z_current;        // last encoder output on the train split
    std::vector<StepArtifact> steps;
    std::vector<TradeoffRecord> history;  // one record per completed step
    std::vector<Split> split;
    Index original_dim = 0;
};

struct ErasureResult {
    ErasureState state;
    std::vector<TradeoffRecord> records;  // baseline (step 0) + history
};

// Algorithm: for j = 1..M, train the encoder against the multi-objective
// loss, solve the nullspace-constrained eigenvalue problem, project, then
// evaluate; stops early once the S probe reaches chance + delta.
ErasureResult run_erasure(const EmbeddingDataset& dataset, const ErasureConfig& config,
                          const Evaluator& evaluator);

// Apply one stored step to arbitrary rows.
Matrix apply_step(const StepArtifact& step, const Eigen::Ref<const Matrix>& rows);

// Replay the whole stored chain on unseen embeddings with original width.
Matrix transform(const ErasureState& state, const Eigen::Ref<const Matrix>& x_new);

}  // namespace oblv
