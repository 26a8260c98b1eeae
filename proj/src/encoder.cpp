#include "oblv/encoder.hpp"

#include <cmath>

#include "oblv/rng.hpp"

namespace oblv {

namespace {

double silu(double x) {
    const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return x * s;
}

double silu_grad(double x) {
    const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return s * (1.0 + x * (1.0 - s));
}

Matrix activate(const Matrix& pre, Activation act) {
    if (act == Activation::Identity) return pre;
    return pre.unaryExpr([](double v) { return silu(v); });
}

Matrix activate_grad(const Matrix& pre, Activation act) {
    if (act == Activation::Identity) return Matrix::Ones(pre.rows(), pre.cols());
    return pre.unaryExpr([](double v) { return silu_grad(v); });
}

}  // namespace

bool EncoderParams::all_finite() const {
    for (const auto& w : weights)
        if (!w.allFinite()) return false;
    for (const auto& b : biases)
        if (!b.allFinite()) return false;
    return true;
}

double EncoderGrad::squared_norm() const {
    double s = 0.0;
    for (const auto& w : weights) s += w.squaredNorm();
    for (const auto& b : biases) s += b.squaredNorm();
    return s;
}

void EncoderGrad::scale(double c) {
    for (auto& w : weights) w *= c;
    for (auto& b : biases) b *= c;
}

EncoderParams init_encoder(Index input_dim, Index hidden_width, Index output_dim,
                           int hidden_layers, std::uint64_t seed, Activation activation) {
    require(hidden_layers >= 1 && hidden_layers <= 4, ErrorCode::ConfigError,
            "hidden_layers must be in [1, 4]");
    require(input_dim >= 1 && hidden_width >= 1 && output_dim >= 1, ErrorCode::ConfigError,
            "encoder dimensions must be positive");
    Rng rng(derive_seed(seed, 0x656e63));
    EncoderParams p;
    p.activation = activation;
    std::vector<Index> dims;
    dims.push_back(input_dim);
    for (int l = 0; l < hidden_layers; ++l) dims.push_back(hidden_width);
    dims.push_back(output_dim);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
        Matrix w(dims[l], dims[l + 1]);
        for (Index i = 0; i < w.rows(); ++i)
            for (Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
        Vector b(dims[l + 1]);
        for (Index j = 0; j < b.size(); ++j) b(j) = rng.uniform(-bound, bound);
        p.weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
    }
    return p;
}

Matrix encoder_forward_prenorm(const EncoderParams& params, const Eigen::Ref<const Matrix>& x) {
    require(x.cols() == params.input_dim(), ErrorCode::DimensionMismatch,
            "encoder input has " + std::to_string(x.cols()) + " columns, expected " +
                std::to_string(params.input_dim()));
    Matrix a = x;
    const std::size_t last = params.layers() - 1;
    for (std::size_t l = 0; l < last; ++l) {
        Matrix pre = a * params.weights[l];
        pre.rowwise() += params.biases[l].transpose();
        a = activate(pre, params.activation);
    }
    Matrix out = a * params.weights[last];
    out.rowwise() += params.biases[last].transpose();
    return out;
}

Matrix normalize_rows(const Eigen::Ref<const Matrix>& m) {
    Matrix out = m;
    for (Index i = 0; i < out.rows(); ++i) {
        const double r = out.row(i).norm();
        if (r > 0.0) out.row(i) /= r;
    }
    return out;
}

Matrix encoder_forward(const EncoderParams& params, const Eigen::Ref<const Matrix>& x) {
    return normalize_rows(encoder_forward_prenorm(params, x));
}

void LossContext::validate(Index n) const {
    require(phi_s.samples() == n && phi_x.samples() == n && phi_xi.samples() == n,
            ErrorCode::SampleCountMismatch, "loss context features disagree on sample count");
    weights.validate();
    if (weights.tau_y > 0.0)
        require(phi_y.has_value() && phi_y->samples() == n, ErrorCode::MissingTargetFeatures,
                "tau_y > 0 requires Y features");
}

double erasure_loss(const FeatureMatrix& phi_z, const LossContext& ctx) {
    ctx.validate(phi_z.samples());
    double loss = hsic_feature(phi_z, ctx.phi_s).value;
    if (ctx.weights.tau_x > 0) loss -= ctx.weights.tau_x * hsic_feature(phi_z, ctx.phi_x).value;
    if (ctx.weights.tau_xi > 0) loss -= ctx.weights.tau_xi * hsic_feature(phi_z, ctx.phi_xi).value;
    if (ctx.weights.tau_y > 0) loss -= ctx.weights.tau_y * hsic_feature(phi_z, *ctx.phi_y).value;
    return loss;
}

namespace {

// dLoss/dPhi_z for the weighted sum of squared cross-covariance norms.
// For one term c * ||(1/n) Phi_a^T H Phi_z||_F^2 the derivative is
// (2 c / n) (H Phi_a) C_az with C_az the cross covariance.
Matrix loss_and_feature_grad(const FeatureMatrix& phi_z, const LossContext& ctx, double& loss_out) {
    const double n = static_cast<double>(phi_z.samples());
    FeatureMatrix zc = center_features(phi_z);
    Matrix g = Matrix::Zero(zc.data.rows(), zc.data.cols());
    double loss = 0.0;
    auto add_term = [&](const FeatureMatrix& phi_a, double coeff) {
        Matrix c = (phi_a.data.transpose() * zc.data) / n;  // D_a x D_z
        loss += coeff * c.squaredNorm();
        g.noalias() += (2.0 * coeff / n) * (phi_a.data * c);
    };
    add_term(ctx.phi_s, 1.0);
    if (ctx.weights.tau_x > 0) add_term(ctx.phi_x, -ctx.weights.tau_x);
    if (ctx.weights.tau_xi > 0) add_term(ctx.phi_xi, -ctx.weights.tau_xi);
    if (ctx.weights.tau_y > 0) add_term(*ctx.phi_y, -ctx.weights.tau_y);
    loss_out = loss;
    // gradient w.r.t. uncentered Phi_z is H g; g is built from centered
    // factors so one more centering is exact
    return center_columns(g);
}

}  // namespace

LossAndGrad loss_gradient(const EncoderParams& params, const Eigen::Ref<const Matrix>& x_i,
                          const LossContext& ctx) {
    ctx.validate(x_i.rows());
    const Index n = x_i.rows();
    const std::size_t last = params.layers() - 1;

    // forward, keeping the per-layer pre-activations
    std::vector<Matrix> acts;  // acts[l] = input to layer l
    std::vector<Matrix> pres;  // pres[l] = pre-activation of layer l (hidden only)
    acts.reserve(params.layers());
    acts.push_back(x_i);
    for (std::size_t l = 0; l < last; ++l) {
        Matrix pre = acts.back() * params.weights[l];
        pre.rowwise() += params.biases[l].transpose();
        acts.push_back(activate(pre, params.activation));
        pres.push_back(std::move(pre));
    }
    Matrix p = acts.back() * params.weights[last];
    p.rowwise() += params.biases[last].transpose();

    // sample-wise normalization
    Vector norms(n);
    Matrix z(n, p.cols());
    for (Index i = 0; i < n; ++i) {
        const double r = p.row(i).norm();
        norms(i) = r;
        z.row(i) = r > 0.0 ? (p.row(i) / r).eval() : p.row(i);
    }

    // frozen RFF features of Z
    const Index half = ctx.z_map.feature_dim / 2;
    Matrix proj = z * ctx.z_map.frequencies;
    const double scale = std::sqrt(2.0 / static_cast<double>(ctx.z_map.feature_dim));
    Matrix cos_part = proj.array().cos();
    Matrix sin_part = proj.array().sin();
    FeatureMatrix phi_z;
    phi_z.data.resize(n, ctx.z_map.feature_dim);
    phi_z.data.leftCols(half) = scale * cos_part;
    phi_z.data.rightCols(half) = scale * sin_part;
    phi_z.provenance = Provenance::Z;

    double loss = 0.0;
    Matrix g_phi = loss_and_feature_grad(phi_z, ctx, loss);

    // back through the feature map: dphi_cos = -scale sin .* dA, dphi_sin = scale cos .* dA
    Matrix g_proj = scale * (g_phi.rightCols(half).cwiseProduct(cos_part) -
                             g_phi.leftCols(half).cwiseProduct(sin_part));
    Matrix g_z = g_proj * ctx.z_map.frequencies.transpose();

    // back through row normalization: (I - z z^T)/r applied per row
    Matrix g_p(n, p.cols());
    for (Index i = 0; i < n; ++i) {
        const double r = norms(i);
        if (r > 0.0) {
            const double dot = g_z.row(i).dot(z.row(i));
            g_p.row(i) = (g_z.row(i) - dot * z.row(i)) / r;
        } else {
            g_p.row(i).setZero();
        }
    }

    // back through the MLP
    LossAndGrad out;
    out.loss = loss;
    out.grad.weights.resize(params.layers());
    out.grad.biases.resize(params.layers());
    Matrix delta = std::move(g_p);
    for (std::size_t l = params.layers(); l-- > 0;) {
        out.grad.weights[l].noalias() = acts[l].transpose() * delta;
        out.grad.biases[l] = delta.colwise().sum();
        if (l > 0) {
            Matrix back = delta * params.weights[l].transpose();
            delta = back.cwiseProduct(activate_grad(pres[l - 1], params.activation));
        }
    }
    return out;
}

OptimizerState OptimizerState::init(const EncoderParams& params, double lr, double wd) {
    OptimizerState st;
    st.learning_rate = lr;
    st.weight_decay = wd;
    for (const auto& w : params.weights) {
        st.m_w.push_back(Matrix::Zero(w.rows(), w.cols()));
        st.v_w.push_back(Matrix::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : params.biases) {
        st.m_b.push_back(Vector::Zero(b.size()));
        st.v_b.push_back(Vector::Zero(b.size()));
    }
    return st;
}

void OptimizerState::apply(EncoderParams& params, const EncoderGrad& grad) {
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
        using T = std::decay_t<decltype(m)>;
        T m_hat = m / bc1;
        T denom = (v / bc2).cwiseSqrt();
        denom.array() += eps;
        p -= learning_rate * (m_hat.cwiseQuotient(denom) + weight_decay * p);
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l)
        update(params.weights[l], m_w[l], v_w[l], grad.weights[l]);
    for (std::size_t l = 0; l < params.biases.size(); ++l)
        update(params.biases[l], m_b[l], v_b[l], grad.biases[l]);
}

TrainResult train_encoder(const Eigen::Ref<const Matrix>& x_i, const Eigen::Ref<const Matrix>& x,
                          const std::optional<std::vector<int>>& y, int y_classes,
                          const std::vector<int>& s, int s_classes,
                          const EncoderTrainConfig& config) {
    const Index n = x_i.rows();
    require(x.rows() == n, ErrorCode::SampleCountMismatch, "train_encoder: X rows != X^i rows");
    require(static_cast<Index>(s.size()) == n, ErrorCode::SampleCountMismatch,
            "train_encoder: S label count != rows");
    require(config.iterations >= 1, ErrorCode::ConfigError, "iterations must be >= 1");
    config.weights.validate();
    if (config.weights.tau_y > 0)
        require(y.has_value() && static_cast<Index>(y->size()) == n,
                ErrorCode::MissingTargetFeatures, "tau_y > 0 requires Y labels");

    const Index d_out = config.output_dim > 0 ? config.output_dim : std::min<Index>(x_i.cols(), 256);
    EncoderParams params = init_encoder(x_i.cols(), config.hidden_width, d_out,
                                        config.hidden_layers, config.init_seed);

    LossContext ctx;
    ctx.weights = config.weights;
    ctx.phi_s = center_features(one_hot_features(s, s_classes, Provenance::S));
    ctx.phi_x = center_features(rff_features(make_rff_map(config.x_spec, x), x, Provenance::X));
    ctx.phi_xi =
        center_features(rff_features(make_rff_map(config.xi_spec, x_i), x_i, Provenance::Xi));
    if (config.weights.tau_y > 0)
        ctx.phi_y = center_features(one_hot_features(*y, y_classes, Provenance::Y));

    // bandwidth for Z comes from the initial output and stays frozen for the step
    Matrix z0 = encoder_forward(params, x_i);
    ctx.z_map = make_rff_map(config.z_spec, z0);

    OptimizerState opt = OptimizerState::init(params, config.learning_rate, config.weight_decay);
    TrainResult result;
    result.loss_trace.reserve(static_cast<std::size_t>(config.iterations) + 1);
    for (int it = 0; it < config.iterations; ++it) {
        LossAndGrad lg = loss_gradient(params, x_i, ctx);
        if (!std::isfinite(lg.loss))
            fail(ErrorCode::NonFiniteLoss, "loss became non-finite at iteration " +
                                               std::to_string(it));
        result.loss_trace.push_back(lg.loss);
        const double gn = std::sqrt(lg.grad.squared_norm());
        if (gn > config.clip_norm) lg.grad.scale(config.clip_norm / gn);
        opt.apply(params, lg.grad);
        if (!params.all_finite())
            fail(ErrorCode::NonFiniteLoss, "parameters became non-finite at iteration " +
                                               std::to_string(it));
    }

    result.z = encoder_forward(params, x_i);
    FeatureMatrix phi_z = rff_features(ctx.z_map, result.z, Provenance::Z);
    result.loss_trace.push_back(erasure_loss(phi_z, ctx));
    result.params = std::move(params);
    result.context = std::move(ctx);
    return result;
}

}  // namespace oblv
