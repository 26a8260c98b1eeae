#include "oblv/disentangle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "oblv/rng.hpp"

namespace oblv {

CrossCov cross_covariance(const FeatureMatrix& phi_a, const FeatureMatrix& phi_b) {
    CrossCov out;
    out.matrix = cross_covariance_matrix(phi_a, phi_b);
    out.left = phi_a.provenance;
    out.right = phi_b.provenance;
    return out;
}

Matrix nullspace_basis(const Eigen::Ref<const Matrix>& c, double tol) {
    require(c.allFinite(), ErrorCode::NonFiniteInput, "nullspace_basis input");
    const Index q_dim = c.cols();
    // SVD of C^T; left singular vectors are right singular vectors of C.
    Eigen::BDCSVD<Matrix> svd(c.transpose(), Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * smax && sv(i) > 0.0) ++rank;
    if (rank == 0) return Matrix::Identity(q_dim, q_dim);
    if (rank == q_dim) return Matrix(q_dim, 0);

    Matrix row_space = svd.matrixU().leftCols(rank);  // q x rank, orthonormal
    Eigen::HouseholderQR<Matrix> qr(row_space);
    Matrix full = qr.householderQ() * Matrix::Identity(q_dim, q_dim);
    return full.rightCols(q_dim - rank);
}

Index select_eigenvectors(const Eigen::Ref<const Vector>& descending, double threshold) {
    const Index k = descending.size();
    require(k >= 1, ErrorCode::ConfigError, "no eigenvalues to select from");
    const double lmax = std::max(descending(0), 0.0);
    Index m = 0;
    for (Index i = 0; i < k; ++i)
        if (lmax > 0.0 && descending(i) >= threshold * lmax) ++m;
    return std::max<Index>(m, 1);  // the next iteration always needs a representation
}

Matrix build_evp_matrix(const CrossCov& c_xiz, const CrossCov& c_xz,
                        const std::optional<CrossCov>& c_yz, const Eigen::Ref<const Matrix>& q,
                        const LossWeights& taus) {
    const Index d_z = q.rows();
    require(c_xiz.matrix.cols() == d_z && c_xz.matrix.cols() == d_z, ErrorCode::DimensionMismatch,
            "build_evp_matrix: cross-covariance column count != Q row count");
    if (c_yz)
        require(c_yz->matrix.cols() == d_z, ErrorCode::DimensionMismatch,
                "build_evp_matrix: Y cross-covariance column count != Q row count");

    const Index k = q.cols();
    Matrix a = Matrix::Zero(k, k);
    auto add = [&](const Matrix& c, double w) {
        Matrix b = c * q;  // dim(feature) x k
        a.noalias() += w * (b.transpose() * b);
    };
    add(c_xiz.matrix, 1.0);
    if (taus.tau_x > 0) add(c_xz.matrix, taus.tau_x);
    if (c_yz && taus.tau_y > 0) add(c_yz->matrix, taus.tau_y);
    return 0.5 * (a + a.transpose());
}

DisentangleResult solve_disentangle(const Eigen::Ref<const Matrix>& z,
                                    const Eigen::Ref<const Matrix>& x,
                                    const Eigen::Ref<const Matrix>& x_i,
                                    const std::optional<std::vector<int>>& y, int y_classes,
                                    const std::vector<int>& s, int s_classes,
                                    const DisentangleSpecs& specs, const LossWeights& taus,
                                    double eig_threshold) {
    const Index n = z.rows();
    require(x.rows() == n && x_i.rows() == n && static_cast<Index>(s.size()) == n,
            ErrorCode::SampleCountMismatch, "solve_disentangle: sample counts disagree");
    require(eig_threshold > 0.0 && eig_threshold < 1.0, ErrorCode::ConfigError,
            "eig_threshold must lie in (0, 1)");
    taus.validate();
    if (taus.tau_y > 0)
        require(y.has_value() && static_cast<Index>(y->size()) == n,
                ErrorCode::MissingTargetFeatures, "tau_y > 0 requires Y labels");

    DisentangleResult res;
    res.z_map = make_rff_map(specs.z, z);
    res.l_z = rff_features(res.z_map, z, Provenance::Z);

    FeatureMatrix phi_s = one_hot_features(s, s_classes, Provenance::S);
    FeatureMatrix phi_x = rff_features(make_rff_map(specs.x, x), x, Provenance::X);
    FeatureMatrix phi_xi = rff_features(make_rff_map(specs.xi, x_i), x_i, Provenance::Xi);

    CrossCov c_sz = cross_covariance(phi_s, res.l_z);
    CrossCov c_xz = cross_covariance(phi_x, res.l_z);
    CrossCov c_xiz = cross_covariance(phi_xi, res.l_z);
    std::optional<CrossCov> c_yz;
    if (taus.tau_y > 0) {
        FeatureMatrix phi_y = one_hot_features(*y, y_classes, Provenance::Y);
        c_yz = cross_covariance(phi_y, res.l_z);
    }

    res.q = nullspace_basis(c_sz.matrix, specs.nullspace_tol);
    if (res.q.cols() == 0)
        fail(ErrorCode::DegenerateNullspace,
             "C_sz has full column rank; the Z feature dimension is too small for S");

    Matrix a = build_evp_matrix(c_xiz, c_xz, c_yz, res.q, taus);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
    require(eig.info() == Eigen::Success, ErrorCode::NonFiniteInput,
            "eigendecomposition failed");

    const Index k = a.rows();
    res.eigenvalues.resize(k);
    for (Index i = 0; i < k; ++i) res.eigenvalues(i) = eig.eigenvalues()(k - 1 - i);

    const Index m = select_eigenvectors(res.eigenvalues, eig_threshold);

    res.v.resize(k, m);
    for (Index i = 0; i < m; ++i) res.v.col(i) = eig.eigenvectors().col(k - 1 - i);

    res.threshold_used = eig_threshold;
    res.csz_norm = c_sz.matrix.norm();
    res.nullspace_residual = (c_sz.matrix * res.q).norm();
    res.constraint_residual = (c_sz.matrix * (res.q * res.v)).norm();
    return res;
}

Matrix project_next_prenorm(const DisentangleResult& result) {
    require(result.q.rows() == result.l_z.dim() && result.v.rows() == result.q.cols(),
            ErrorCode::ShapeMismatch, "project_next: inconsistent result shapes");
    return result.l_z.data * (result.q * result.v);
}

Matrix project_next(const DisentangleResult& result) {
    return normalize_rows(project_next_prenorm(result));
}

}  // namespace oblv
