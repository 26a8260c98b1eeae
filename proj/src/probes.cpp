#include "oblv/probes.hpp"

#include <algorithm>
#include <cmath>

#include "oblv/parallel.hpp"
#include "oblv/rng.hpp"

namespace oblv {

double random_chance(const std::vector<int>& labels) {
    require(!labels.empty(), ErrorCode::EmptyLabels, "random_chance of empty labels");
    std::vector<long> counts;
    for (int v : labels) {
        require(v >= 0, ErrorCode::LabelOutOfRange, "negative label");
        if (static_cast<std::size_t>(v) >= counts.size()) counts.resize(static_cast<std::size_t>(v) + 1, 0);
        counts[static_cast<std::size_t>(v)]++;
    }
    const long best = *std::max_element(counts.begin(), counts.end());
    return static_cast<double>(best) / static_cast<double>(labels.size());
}

namespace {

struct MlpNet {
    std::vector<Matrix> w;
    std::vector<Vector> b;
};

MlpNet init_net(const std::vector<Index>& dims, Rng& rng) {
    MlpNet net;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
        Matrix w(dims[l], dims[l + 1]);
        for (Index i = 0; i < w.rows(); ++i)
            for (Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
        Vector b(dims[l + 1]);
        for (Index j = 0; j < b.size(); ++j) b(j) = rng.uniform(-bound, bound);
        net.w.push_back(std::move(w));
        net.b.push_back(std::move(b));
    }
    return net;
}

Matrix net_logits(const MlpNet& net, const Eigen::Ref<const Matrix>& x) {
    Matrix a = x;
    for (std::size_t l = 0; l + 1 < net.w.size(); ++l) {
        Matrix pre = a * net.w[l];
        pre.rowwise() += net.b[l].transpose();
        a = pre.cwiseMax(0.0);
    }
    Matrix out = a * net.w.back();
    out.rowwise() += net.b.back().transpose();
    return out;
}

// softmax cross-entropy; returns mean loss and writes dLoss/dlogits
double softmax_ce(const Matrix& logits, const std::vector<int>& labels, Index lo, Matrix& grad) {
    const Index n = logits.rows();
    grad.resize(n, logits.cols());
    double loss = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double mx = logits.row(i).maxCoeff();
        Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
        const double z = e.sum();
        const int target = labels[static_cast<std::size_t>(lo + i)];
        loss -= std::log(std::max(e(target) / z, 1e-300));
        grad.row(i) = e / z;
        grad(i, target) -= 1.0;
    }
    grad /= static_cast<double>(n);
    return loss / static_cast<double>(n);
}

std::vector<int> argmax_rows(const Matrix& logits) {
    std::vector<int> out(static_cast<std::size_t>(logits.rows()));
    for (Index i = 0; i < logits.rows(); ++i) {
        Index best = 0;
        logits.row(i).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
    double hit = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == labels[i]) hit += 1.0;
    return preds.empty() ? 0.0 : hit / static_cast<double>(preds.size());
}

struct AdamBuf {
    std::vector<Matrix> mw, vw;
    std::vector<Vector> mb, vb;
    long t = 0;
};

void adam_step(MlpNet& net, const MlpNet& grad, AdamBuf& buf, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (buf.t == 0) {
        for (const auto& w : net.w) {
            buf.mw.push_back(Matrix::Zero(w.rows(), w.cols()));
            buf.vw.push_back(Matrix::Zero(w.rows(), w.cols()));
        }
        for (const auto& b : net.b) {
            buf.mb.push_back(Vector::Zero(b.size()));
            buf.vb.push_back(Vector::Zero(b.size()));
        }
    }
    ++buf.t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(buf.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(buf.t));
    auto upd = [&](auto& p, auto& m, auto& v, const auto& g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        using T = std::decay_t<decltype(m)>;
        T denom = (v / c2).cwiseSqrt();
        denom.array() += eps;
        p -= lr * (m / c1).cwiseQuotient(denom);
    };
    for (std::size_t l = 0; l < net.w.size(); ++l) upd(net.w[l], buf.mw[l], buf.vw[l], grad.w[l]);
    for (std::size_t l = 0; l < net.b.size(); ++l) upd(net.b[l], buf.mb[l], buf.vb[l], grad.b[l]);
}

// forward + backward on one minibatch; returns mean loss
double mlp_batch_step(MlpNet& net, const Eigen::Ref<const Matrix>& x,
                      const std::vector<int>& labels, Index lo, MlpNet& grad) {
    std::vector<Matrix> acts{Matrix(x)};
    std::vector<Matrix> pres;
    for (std::size_t l = 0; l + 1 < net.w.size(); ++l) {
        Matrix pre = acts.back() * net.w[l];
        pre.rowwise() += net.b[l].transpose();
        acts.push_back(pre.cwiseMax(0.0));
        pres.push_back(std::move(pre));
    }
    Matrix logits = acts.back() * net.w.back();
    logits.rowwise() += net.b.back().transpose();

    Matrix delta;
    const double loss = softmax_ce(logits, labels, lo, delta);

    grad.w.assign(net.w.size(), Matrix());
    grad.b.assign(net.b.size(), Vector());
    for (std::size_t l = net.w.size(); l-- > 0;) {
        grad.w[l].noalias() = acts[l].transpose() * delta;
        grad.b[l] = delta.colwise().sum();
        if (l > 0) {
            Matrix back = delta * net.w[l].transpose();
            delta = back.cwiseProduct(
                (pres[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return loss;
}

MlpNet train_mlp(const ProbeData& train, const MlpProbeSpec& spec, std::uint64_t seed) {
    require(!train.labels.empty(), ErrorCode::EmptyLabels, "mlp probe: empty training labels");
    require(train.x.rows() == static_cast<Index>(train.labels.size()),
            ErrorCode::SampleCountMismatch, "mlp probe: rows != labels");
    std::vector<Index> dims;
    dims.push_back(train.x.cols());
    for (Index h : spec.hidden) dims.push_back(h);
    dims.push_back(train.num_classes);

    Rng rng(derive_seed(seed, 0x6d6c70));
    MlpNet net = init_net(dims, rng);
    AdamBuf buf;
    const Index n = train.x.rows();
    const Index batch = std::max<Index>(1, spec.batch);
    MlpNet grad;
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        auto perm = rng.permutation(n);
        Matrix shuffled(n, train.x.cols());
        std::vector<int> lab(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            shuffled.row(i) = train.x.row(perm[static_cast<std::size_t>(i)]);
            lab[static_cast<std::size_t>(i)] =
                train.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        }
        for (Index lo = 0; lo < n; lo += batch) {
            const Index hi = std::min(lo + batch, n);
            const double loss =
                mlp_batch_step(net, shuffled.middleRows(lo, hi - lo), lab, lo, grad);
            if (!std::isfinite(loss)) fail(ErrorCode::NonFiniteLoss, "mlp probe loss");
            adam_step(net, grad, buf, spec.learning_rate);
        }
    }
    return net;
}

}  // namespace

MlpPrediction mlp_classify(const ProbeData& train, const ProbeData& test,
                           const MlpProbeSpec& spec, std::uint64_t seed) {
    MlpNet net = train_mlp(train, spec, seed);
    MlpPrediction out;
    out.train_preds = argmax_rows(net_logits(net, train.x));
    out.test_preds = argmax_rows(net_logits(net, test.x));
    out.train_acc = accuracy(out.train_preds, train.labels);
    out.test_acc = accuracy(out.test_preds, test.labels);
    return out;
}

ProbeEntry fit_mlp_probe(const ProbeData& train, const ProbeData& test, const MlpProbeSpec& spec,
                         std::uint64_t seed) {
    MlpPrediction pred = mlp_classify(train, test, spec, seed);
    ProbeEntry e;
    e.kind = "mlp";
    e.seed = seed;
    e.train_acc = pred.train_acc;
    e.test_acc = pred.test_acc;
    return e;
}

ProbeEntry fit_kernel_probe(const ProbeData& train, const ProbeData& test, double gamma, double c,
                            const KernelProbeSpec& spec, std::uint64_t seed) {
    require(gamma > 0.0 && c > 0.0, ErrorCode::ConfigError, "gamma and C must be positive");
    require(train.x.rows() == static_cast<Index>(train.labels.size()),
            ErrorCode::SampleCountMismatch, "kernel probe: rows != labels");

    const double sigma = 1.0 / std::sqrt(2.0 * gamma);
    RffMap map = make_rff_map(train.x.cols(), spec.rff_dim, sigma, derive_seed(seed, 0x6b70));
    Matrix ftr = rff_features(map, train.x).data;
    Matrix fte = rff_features(map, test.x).data;

    const Index n = ftr.rows();
    const int classes = train.num_classes;
    Matrix w = Matrix::Zero(ftr.cols(), classes);
    Vector b = Vector::Zero(classes);
    Matrix mw = w, vw = w;
    Vector mb = b, vb = b;
    const double reg = 1.0 / (c * static_cast<double>(n));

    double prev = std::numeric_limits<double>::infinity();
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int it = 1; it <= spec.max_iters; ++it) {
        Matrix logits = ftr * w;
        logits.rowwise() += b.transpose();
        Matrix delta;
        double loss = softmax_ce(logits, train.labels, 0, delta);
        loss += 0.5 * reg * w.squaredNorm();
        if (!std::isfinite(loss)) fail(ErrorCode::NonFiniteLoss, "kernel probe loss");

        Matrix gw = ftr.transpose() * delta + reg * w;
        Vector gb = delta.colwise().sum();

        const double c1 = 1.0 - std::pow(b1, it);
        const double c2 = 1.0 - std::pow(b2, it);
        mw = b1 * mw + (1 - b1) * gw;
        vw = b2 * vw + (1 - b2) * gw.cwiseProduct(gw);
        Matrix dw = (vw / c2).cwiseSqrt();
        dw.array() += eps;
        w -= spec.learning_rate * (mw / c1).cwiseQuotient(dw);
        mb = b1 * mb + (1 - b1) * gb;
        vb = b2 * vb + (1 - b2) * gb.cwiseProduct(gb);
        Vector db = (vb / c2).cwiseSqrt();
        db.array() += eps;
        b -= spec.learning_rate * (mb / c1).cwiseQuotient(db);

        if (std::abs(prev - loss) < spec.tol) break;
        prev = loss;
    }

    Matrix ltr = ftr * w;
    ltr.rowwise() += b.transpose();
    Matrix lte = fte * w;
    lte.rowwise() += b.transpose();

    ProbeEntry e;
    e.kind = "kernel";
    e.gamma = gamma;
    e.c = c;
    e.seed = seed;
    e.train_acc = accuracy(argmax_rows(ltr), train.labels);
    e.test_acc = accuracy(argmax_rows(lte), test.labels);
    return e;
}

ProbeReport probe_max(const ProbeData& train, const ProbeData& test, const ProbeSuite& suite,
                      std::uint64_t base_seed, int jobs) {
    require(suite.mlp.seeds > 0 || !suite.kernel.grid.empty(), ErrorCode::ConfigError,
            "probe_max needs at least one probe");
    std::vector<ProbeEntry> entries(static_cast<std::size_t>(suite.mlp.seeds) +
                                    suite.kernel.grid.size());
    std::vector<std::function<void()>> tasks;
    for (int i = 0; i < suite.mlp.seeds; ++i) {
        tasks.push_back([&, i] {
            entries[static_cast<std::size_t>(i)] =
                fit_mlp_probe(train, test, suite.mlp, derive_seed(base_seed, static_cast<std::uint64_t>(i)));
        });
    }
    // kernel probes are deterministic per (gamma, C) setting: one shared seed
    const std::uint64_t kernel_seed = derive_seed(base_seed, 0x6b65726e);
    for (std::size_t g = 0; g < suite.kernel.grid.size(); ++g) {
        tasks.push_back([&, g] {
            const auto [gamma, c] = suite.kernel.grid[g];
            entries[static_cast<std::size_t>(suite.mlp.seeds) + g] =
                fit_kernel_probe(train, test, gamma, c, suite.kernel, kernel_seed);
        });
    }
    run_tasks(jobs, tasks);

    ProbeReport rep;
    rep.entries = std::move(entries);
    rep.chance = random_chance(test.labels);
    rep.chance_train = random_chance(train.labels);
    rep.max_test_acc = 0.0;
    rep.max_train_acc = 0.0;
    for (const auto& e : rep.entries) {
        rep.max_test_acc = std::max(rep.max_test_acc, e.test_acc);
        rep.max_train_acc = std::max(rep.max_train_acc, e.train_acc);
    }
    return rep;
}

}  // namespace oblv
