#include "oblv/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "oblv/rng.hpp"

namespace oblv {

double median_heuristic(const Eigen::Ref<const Matrix>& rows, Index subsample_cap,
                        std::uint64_t seed) {
    const Index n = rows.rows();
    require(n >= 2, ErrorCode::ConfigError, "median heuristic needs at least 2 rows");

    Matrix sub;
    const bool use_sub = n > subsample_cap;
    if (use_sub) {
        Rng rng(derive_seed(seed, 0x6d656469));
        auto perm = rng.permutation(n);
        sub.resize(subsample_cap, rows.cols());
        for (Index i = 0; i < subsample_cap; ++i) sub.row(i) = rows.row(perm[static_cast<std::size_t>(i)]);
    }
    Eigen::Ref<const Matrix> m = use_sub ? Eigen::Ref<const Matrix>(sub) : rows;

    const Index k = m.rows();
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(k * (k - 1) / 2));
    const Vector sq = m.rowwise().squaredNorm();
    for (Index i = 0; i < k; ++i) {
        for (Index j = i + 1; j < k; ++j) {
            double d2 = sq(i) + sq(j) - 2.0 * m.row(i).dot(m.row(j));
            dist.push_back(std::sqrt(std::max(d2, 0.0)));
        }
    }

    if (*std::max_element(dist.begin(), dist.end()) == 0.0)
        fail(ErrorCode::AllRowsIdentical, "all pairwise distances are zero");

    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    double med = dist[mid];
    if (dist.size() % 2 == 0) {
        // even count: average the two central order statistics
        double lo = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (lo + med);
    }
    return med;
}

Matrix rbf_kernel_matrix(const Eigen::Ref<const Matrix>& rows, double sigma) {
    require(sigma > 0.0, ErrorCode::ConfigError, "sigma must be positive");
    if (!rows.allFinite()) fail(ErrorCode::NonFiniteInput, "rbf_kernel_matrix input");

    const Index n = rows.rows();
    const Vector sq = rows.rowwise().squaredNorm();
    Matrix k = rows * rows.transpose();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Index j = i + 1; j < n; ++j) {
            double d2 = std::max(sq(i) + sq(j) - 2.0 * k(i, j), 0.0);
            double v = std::exp(-d2 * inv);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

RffMap make_rff_map(Index input_dim, Index feature_dim, double sigma, std::uint64_t seed) {
    require(feature_dim >= 2 && feature_dim % 2 == 0, ErrorCode::ConfigError,
            "feature_dim must be an even integer >= 2");
    require(sigma > 0.0, ErrorCode::ConfigError, "sigma must be positive");
    Rng rng(seed);
    RffMap map;
    map.frequencies = rng.normal_matrix(input_dim, feature_dim / 2, 1.0 / sigma);
    map.input_dim = input_dim;
    map.feature_dim = feature_dim;
    map.sigma = sigma;
    map.seed = seed;
    return map;
}

RffMap make_rff_map(const KernelSpec& spec, const Eigen::Ref<const Matrix>& rows) {
    spec.validate();
    require(spec.family == KernelFamily::RBF, ErrorCode::ConfigError,
            "RFF maps exist for the RBF family only");
    const double sigma = spec.bandwidth ? *spec.bandwidth : median_heuristic(rows, 2000, spec.seed);
    return make_rff_map(rows.cols(), spec.rff_dim, sigma, spec.seed);
}

FeatureMatrix rff_features(const RffMap& map, const Eigen::Ref<const Matrix>& rows,
                           Provenance provenance) {
    require(rows.cols() == map.input_dim, ErrorCode::DimensionMismatch,
            "rff_features: input has " + std::to_string(rows.cols()) + " columns, map expects " +
                std::to_string(map.input_dim));
    const Index n = rows.rows();
    const Index half = map.feature_dim / 2;
    Matrix proj = rows * map.frequencies;  // n x D/2
    FeatureMatrix out;
    out.data.resize(n, map.feature_dim);
    const double scale = std::sqrt(2.0 / static_cast<double>(map.feature_dim));
    out.data.leftCols(half) = scale * proj.array().cos();
    out.data.rightCols(half) = scale * proj.array().sin();
    out.centered = false;
    out.provenance = provenance;
    return out;
}

FeatureMatrix one_hot_features(const std::vector<int>& labels, int num_classes,
                               Provenance provenance) {
    require(num_classes >= 1, ErrorCode::ConfigError, "num_classes must be >= 1");
    FeatureMatrix out;
    out.data = Matrix::Zero(static_cast<Index>(labels.size()), num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        require(c >= 0 && c < num_classes, ErrorCode::LabelOutOfRange,
                "label " + std::to_string(c) + " outside [0, " + std::to_string(num_classes) + ")");
        out.data(static_cast<Index>(i), c) = 1.0;
    }
    out.centered = false;
    out.provenance = provenance;
    return out;
}

Matrix center_columns(const Eigen::Ref<const Matrix>& m) {
    return m.rowwise() - m.colwise().mean();
}

FeatureMatrix center_features(const FeatureMatrix& f) {
    if (f.centered) return f;
    FeatureMatrix out;
    out.data = center_columns(f.data);
    out.centered = true;
    out.provenance = f.provenance;
    return out;
}

Matrix factor_kernel(const Eigen::Ref<const Matrix>& kernel, double tol) {
    const Index n = kernel.rows();
    require(kernel.cols() == n, ErrorCode::DimensionMismatch, "kernel matrix must be square");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (kernel + kernel.transpose()));
    const Vector& ev = eig.eigenvalues();  // ascending
    const double lmax = std::max(ev(n - 1), 0.0);
    const double cut = tol * lmax;
    if (ev(0) < -cut)
        fail(ErrorCode::NotPSD, "eigenvalue " + std::to_string(ev(0)) + " below -tol*lambda_max");

    Index r = 0;
    for (Index i = 0; i < n; ++i)
        if (ev(i) > cut) ++r;

    Matrix j(n, r);
    // descending eigenvalue order
    for (Index k = 0; k < r; ++k) {
        const Index src = n - 1 - k;
        j.col(k) = eig.eigenvectors().col(src) * std::sqrt(ev(src));
    }
    return j;
}

}  // namespace oblv
