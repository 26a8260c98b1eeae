#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "oblv/errors.hpp"

namespace oblv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class KernelFamily { RBF, LinearOneHot };

// Which variable a feature matrix encodes; carried for diagnostics only.
enum class Provenance { X, Xi, Z, Y, S, Other };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::X: return "X";
        case Provenance::Xi: return "Xi";
        case Provenance::Z: return "Z";
        case Provenance::Y: return "Y";
        case Provenance::S: return "S";
        case Provenance::Other: return "other";
    }
    return "other";
}

// Kernel choice for one variable. bandwidth == nullopt means "resolve with
// the median heuristic on the data this spec is applied to".
struct KernelSpec {
    KernelFamily family = KernelFamily::RBF;
    std::optional<double> bandwidth;   // sigma; nullopt = median heuristic
    Index rff_dim = 1024;              // D, even, >= 2 (RBF only)
    std::uint64_t seed = 0;

    void validate() const {
        if (family == KernelFamily::RBF) {
            require(rff_dim >= 2 && rff_dim % 2 == 0, ErrorCode::ConfigError,
                    "rff_dim must be an even integer >= 2");
        }
        if (bandwidth) {
            require(*bandwidth > 0.0, ErrorCode::ConfigError, "bandwidth must be positive");
        }
    }
};

// Random Fourier feature map for the RBF kernel with width sigma.
// phi(x) = sqrt(2/D) [cos(Omega^T x); sin(Omega^T x)], Omega ~ N(0, 1/sigma^2),
// so ||phi(x)|| = 1 exactly and E[phi(x).phi(y)] = exp(-||x-y||^2/(2 sigma^2)).
struct RffMap {
    Matrix frequencies;  // d x D/2
    Index input_dim = 0;
    Index feature_dim = 0;  // D
    double sigma = 1.0;
    std::uint64_t seed = 0;
};

struct FeatureMatrix {
    Matrix data;  // n x D
    bool centered = false;
    Provenance provenance = Provenance::Other;

    Index samples() const { return data.rows(); }
    Index dim() const { return data.cols(); }
};

// Median of pairwise Euclidean distances between rows. For n above
// subsample_cap the median is taken over a seeded uniform subsample.
double median_heuristic(const Eigen::Ref<const Matrix>& rows, Index subsample_cap = 2000,
                        std::uint64_t seed = 0);

// Exact RBF kernel matrix K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)).
Matrix rbf_kernel_matrix(const Eigen::Ref<const Matrix>& rows, double sigma);

RffMap make_rff_map(Index input_dim, Index feature_dim, double sigma, std::uint64_t seed);

// Resolve a KernelSpec against data: median-heuristic bandwidth if requested.
RffMap make_rff_map(const KernelSpec& spec, const Eigen::Ref<const Matrix>& rows);

FeatureMatrix rff_features(const RffMap& map, const Eigen::Ref<const Matrix>& rows,
                           Provenance provenance = Provenance::Other);

// n x c indicator matrix; the induced linear kernel is 1{label_i == label_j}.
FeatureMatrix one_hot_features(const std::vector<int>& labels, int num_classes,
                               Provenance provenance = Provenance::Other);

// Subtract the column means (H F without materializing H). Idempotent.
FeatureMatrix center_features(const FeatureMatrix& f);
Matrix center_columns(const Eigen::Ref<const Matrix>& m);

// Factor a PSD kernel matrix as K = J J^T with J of full column rank r,
// where r counts eigenvalues above tol * lambda_max.
Matrix factor_kernel(const Eigen::Ref<const Matrix>& kernel, double tol = 1e-10);

}  // namespace oblv
