#pragma once

#include <optional>

#include "oblv/encoder.hpp"
#include "oblv/hsic.hpp"

namespace oblv {

// Empirical cross-covariance (1/n)(H Phi_a)^T (H Phi_b) with provenance tags.
struct CrossCov {
    Matrix matrix;  // dim(a) x dim(b)
    Provenance left = Provenance::Other;
    Provenance right = Provenance::Other;
};

CrossCov cross_covariance(const FeatureMatrix& phi_a, const FeatureMatrix& phi_b);

// Orthonormal basis of {v : C v = 0}, via SVD with relative threshold
// tol * sigma_max. C == 0 yields the full-space basis.
Matrix nullspace_basis(const Eigen::Ref<const Matrix>& c, double tol = 1e-8);

// Count of eigenvectors kept: all with lambda / lambda_max >= threshold,
// never fewer than one. Expects eigenvalues sorted descending.
Index select_eigenvectors(const Eigen::Ref<const Vector>& descending, double threshold);

// A = Q^T (C_xiz^T C_xiz + tau_y C_yz^T C_yz + tau_x C_xz^T C_xz) Q,
// symmetrized. The X^i term carries unit weight.
Matrix build_evp_matrix(const CrossCov& c_xiz, const CrossCov& c_xz,
                        const std::optional<CrossCov>& c_yz, const Eigen::Ref<const Matrix>& q,
                        const LossWeights& taus);

struct DisentangleResult {
    Matrix q;             // D_z x k nullspace basis
    Matrix v;             // k x m selected eigenvectors
    Vector eigenvalues;   // all k eigenvalues, descending
    FeatureMatrix l_z;    // uncentered feature matrix of Z
    double threshold_used = 0.0;
    RffMap z_map;         // the map that produced l_z (needed to replay)
    // diagnostics: null-space constraint quality
    double csz_norm = 0.0;           // ||C_sz||_F
    double nullspace_residual = 0.0; // ||C_sz Q||_F
    double constraint_residual = 0.0;// ||C_sz Q V||_F

    Index selected() const { return v.cols(); }
};

struct DisentangleSpecs {
    KernelSpec z;
    KernelSpec x;
    KernelSpec xi;
    double nullspace_tol = 1e-8;
};

// One RKHS disentanglement step: build feature maps, cross-covariances,
// the constrained eigenvalue problem, and select eigenvectors with
// eigenvalue >= eig_threshold * lambda_max (at least one is always kept).
DisentangleResult solve_disentangle(const Eigen::Ref<const Matrix>& z,
                                    const Eigen::Ref<const Matrix>& x,
                                    const Eigen::Ref<const Matrix>& x_i,
                                    const std::optional<std::vector<int>>& y, int y_classes,
                                    const std::vector<int>& s, int s_classes,
                                    const DisentangleSpecs& specs, const LossWeights& taus,
                                    double eig_threshold);

// X^{i+1} = L_z Q V followed by sample-wise normalization.
Matrix project_next(const DisentangleResult& result);

// Pre-normalization projection; its linear cross-covariance with the S
// features vanishes by construction.
Matrix project_next_prenorm(const DisentangleResult& result);

}  // namespace oblv
