#pragma once

#include "oblv/kernels.hpp"

namespace oblv {

enum class HsicEstimator { ExactKernel, FeatureMap };

struct HsicReading {
    double value = 0.0;
    HsicEstimator estimator = HsicEstimator::ExactKernel;
    Index n = 0;
};

// Squared Frobenius norm of the empirical linear cross-covariance
// (1/n) (H Y)^T (H X); the linear special case of HSIC.
double lim(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y);

// Biased estimator (1/n^2) trace(K H L H) on precomputed kernel matrices.
HsicReading hsic_exact(const Eigen::Ref<const Matrix>& k, const Eigen::Ref<const Matrix>& l);

// Same quantity on explicit feature maps: || (1/n) (H Phi_y)^T (H Phi_x) ||_F^2.
// Never materializes an n x n matrix.
HsicReading hsic_feature(const FeatureMatrix& phi_x, const FeatureMatrix& phi_y);

// Cross-covariance of centered features, (1/n) (H Phi_a)^T (H Phi_b).
// Shared by hsic_feature and the disentanglement step.
Matrix cross_covariance_matrix(const FeatureMatrix& phi_a, const FeatureMatrix& phi_b);

}  // namespace oblv
