#include "oblv/hsic.hpp"

namespace oblv {

double lim(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y) {
    require(x.rows() == y.rows(), ErrorCode::SampleCountMismatch,
            "lim: X has " + std::to_string(x.rows()) + " rows, Y has " + std::to_string(y.rows()));
    const double n = static_cast<double>(x.rows());
    Matrix c = (center_columns(y).transpose() * center_columns(x)) / n;
    return c.squaredNorm();
}

HsicReading hsic_exact(const Eigen::Ref<const Matrix>& k, const Eigen::Ref<const Matrix>& l) {
    const Index n = k.rows();
    require(k.cols() == n && l.rows() == n && l.cols() == n, ErrorCode::SampleCountMismatch,
            "hsic_exact: kernel matrices must be square with matching size");
    // double-center K, then (1/n^2) sum_ij Kbar_ij L_ij == (1/n^2) tr(K H L H)
    Vector row_mean = k.rowwise().mean();
    const double total_mean = row_mean.mean();
    Matrix kbar = k;
    kbar.colwise() -= row_mean;
    kbar.rowwise() -= row_mean.transpose();
    kbar.array() += total_mean;
    const double nn = static_cast<double>(n);
    return HsicReading{kbar.cwiseProduct(l).sum() / (nn * nn), HsicEstimator::ExactKernel, n};
}

Matrix cross_covariance_matrix(const FeatureMatrix& phi_a, const FeatureMatrix& phi_b) {
    require(phi_a.samples() == phi_b.samples(), ErrorCode::SampleCountMismatch,
            "cross covariance: feature matrices disagree on sample count");
    const double n = static_cast<double>(phi_a.samples());
    const Matrix a = phi_a.centered ? phi_a.data : center_columns(phi_a.data);
    const Matrix b = phi_b.centered ? phi_b.data : center_columns(phi_b.data);
    return (a.transpose() * b) / n;
}

HsicReading hsic_feature(const FeatureMatrix& phi_x, const FeatureMatrix& phi_y) {
    Matrix c = cross_covariance_matrix(phi_y, phi_x);
    return HsicReading{c.squaredNorm(), HsicEstimator::FeatureMap, phi_x.samples()};
}

}  // namespace oblv
