#pragma once

#include <vector>

#include "oblv/hsic.hpp"

namespace oblv {

enum class Activation { SiLU, Identity };  // Identity exists for tests only

// One-hidden-layer perceptron by default; up to 4 hidden layers for the
// depth ablation. weights[l] maps layer l to l+1, the last layer is linear,
// and the forward pass ends with sample-wise L2 normalization.
struct EncoderParams {
    std::vector<Matrix> weights;  // weights[l]: fan_in x fan_out
    std::vector<Vector> biases;
    Activation activation = Activation::SiLU;

    Index input_dim() const { return weights.front().rows(); }
    Index output_dim() const { return weights.back().cols(); }
    std::size_t layers() const { return weights.size(); }
    bool all_finite() const;
};

// Gradient container with the same shapes as EncoderParams.
struct EncoderGrad {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    double squared_norm() const;
    void scale(double c);
};

// tau weights of the multi-objective loss
//   HSIC(Z,S) - tau_x HSIC(Z,X) - tau_xi HSIC(Z,X^i) - tau_y HSIC(Z,Y).
// The same struct carries the eigenvalue-problem weights, where the X^i term
// has fixed unit weight and tau_xi is ignored.
struct LossWeights {
    double tau_xi = 0.0;
    double tau_x = 0.0;
    double tau_y = 0.0;

    void validate() const {
        require(tau_xi >= 0 && tau_x >= 0 && tau_y >= 0, ErrorCode::ConfigError,
                "loss weights must be non-negative");
    }
};

// AdamW: adaptive moment estimation with decoupled weight decay.
struct OptimizerState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
    long step = 0;
    double learning_rate = 5e-4;
    double weight_decay = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static OptimizerState init(const EncoderParams& params, double lr, double wd);
    void apply(EncoderParams& params, const EncoderGrad& grad);
};

EncoderParams init_encoder(Index input_dim, Index hidden_width, Index output_dim,
                           int hidden_layers, std::uint64_t seed,
                           Activation activation = Activation::SiLU);

// Forward pass without the final row normalization.
Matrix encoder_forward_prenorm(const EncoderParams& params, const Eigen::Ref<const Matrix>& x);

// Full forward pass: MLP followed by sample-wise normalization. Rows with
// zero pre-normalization norm stay zero.
Matrix encoder_forward(const EncoderParams& params, const Eigen::Ref<const Matrix>& x);

Matrix normalize_rows(const Eigen::Ref<const Matrix>& m);

// Fixed context of one erasure step: the target feature matrices are
// constants, and the Z feature map (frequencies and bandwidth) is frozen.
struct LossContext {
    RffMap z_map;
    FeatureMatrix phi_s;            // centered
    FeatureMatrix phi_x;            // centered
    FeatureMatrix phi_xi;           // centered
    std::optional<FeatureMatrix> phi_y;  // centered; present iff tau_y > 0
    LossWeights weights;

    void validate(Index n) const;
};

// Loss of Eq-style bi-objective on feature maps; phi_z is the (uncentered or
// centered) feature matrix of the encoder output.
double erasure_loss(const FeatureMatrix& phi_z, const LossContext& ctx);

// Loss and its analytic gradient w.r.t. all encoder parameters at `params`.
struct LossAndGrad {
    double loss = 0.0;
    EncoderGrad grad;
};
LossAndGrad loss_gradient(const EncoderParams& params, const Eigen::Ref<const Matrix>& x_i,
                          const LossContext& ctx);

struct EncoderTrainConfig {
    int iterations = 30;
    double learning_rate = 5e-4;
    double weight_decay = 1e-3;
    double clip_norm = 10.0;
    Index hidden_width = 256;
    int hidden_layers = 1;
    Index output_dim = 0;  // 0 -> min(input_dim, 256)
    std::uint64_t init_seed = 0;
    KernelSpec z_spec;   // bandwidth resolved on the initial Z, then frozen
    KernelSpec x_spec;
    KernelSpec xi_spec;
    LossWeights weights;
};

struct TrainResult {
    EncoderParams params;
    Matrix z;                       // final normalized encoder output
    std::vector<double> loss_trace; // loss at each iteration + final loss
    LossContext context;            // frozen maps/features used by the step
};

// Full-batch training against the multi-objective loss. S (and Y when
// tau_y > 0) enter through one-hot feature maps; X and X^i through RFF maps
// with median-heuristic bandwidths resolved on their own data.
TrainResult train_encoder(const Eigen::Ref<const Matrix>& x_i,
                          const Eigen::Ref<const Matrix>& x,
                          const std::optional<std::vector<int>>& y, int y_classes,
                          const std::vector<int>& s, int s_classes,
                          const EncoderTrainConfig& config);

}  // namespace oblv
