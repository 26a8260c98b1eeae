#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "oblv/kernels.hpp"
#include "oblv/rng.hpp"

using namespace oblv;

namespace {

// independent oracle: enumerate all pairwise distances and take the median
double median_oracle(const Matrix& rows) {
    std::vector<double> d;
    for (Index i = 0; i < rows.rows(); ++i)
        for (Index j = i + 1; j < rows.rows(); ++j) d.push_back((rows.row(i) - rows.row(j)).norm());
    std::sort(d.begin(), d.end());
    const std::size_t n = d.size();
    return n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

Matrix random_psd(Index n, Rng& rng) {
    Matrix a = rng.normal_matrix(n, n + 2);
    return a * a.transpose();
}

}  // namespace

TEST_CASE("median heuristic matches the pairwise-distance oracle") {
    Matrix rows(3, 1);
    rows << 0, 1, 3;
    CHECK(median_heuristic(rows) == doctest::Approx(2.0));
    CHECK(median_heuristic(rows) == doctest::Approx(median_oracle(rows)));

    Rng rng(42);
    for (int t = 0; t < 5; ++t) {
        Matrix m = rng.normal_matrix(17, 4);
        CHECK(median_heuristic(m) == doctest::Approx(median_oracle(m)).epsilon(1e-12));
    }
}

TEST_CASE("median heuristic: duplicates are fine, all-identical is an error") {
    Matrix rows(3, 2);
    rows << 1, 2, 1, 2, 4, 6;  // two copies of (1,2) plus (4,6)
    const double delta = std::sqrt(9.0 + 16.0);
    CHECK(median_heuristic(rows) == doctest::Approx(delta));

    Matrix same = Matrix::Ones(4, 3);
    CHECK_THROWS_WITH_AS(median_heuristic(same), doctest::Contains("AllRowsIdentical"), Error);
}

TEST_CASE("median heuristic scales homogeneously") {
    Rng rng(7);
    Matrix m = rng.normal_matrix(12, 3);
    const double base = median_heuristic(m);
    CHECK(median_heuristic(Matrix(2.5 * m)) == doctest::Approx(2.5 * base).epsilon(1e-12));
}

TEST_CASE("median heuristic subsampling is seeded and deterministic") {
    Rng rng(5);
    Matrix m = rng.normal_matrix(2500, 3);
    const double a = median_heuristic(m, 500, 9);
    const double b = median_heuristic(m, 500, 9);
    CHECK(a == b);
    // close to the full-data answer
    CHECK(a == doctest::Approx(median_heuristic(m, 5000, 9)).epsilon(0.1));
}

TEST_CASE("rbf kernel matrix basics") {
    Matrix same = Matrix::Constant(4, 2, 1.5);
    CHECK((rbf_kernel_matrix(same, 1.0) - Matrix::Ones(4, 4)).norm() == doctest::Approx(0.0));

    const double sigma = 0.7;
    Matrix two(2, 1);
    two << 0.0, sigma * std::sqrt(2.0);
    Matrix k = rbf_kernel_matrix(two, sigma);
    CHECK(k(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    Matrix bad(2, 1);
    bad << 1.0, std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH_AS(rbf_kernel_matrix(bad, 1.0), doctest::Contains("NonFiniteInput"), Error);
}

TEST_CASE("rbf kernel matrix is symmetric, unit-diagonal and PSD") {
    Rng rng(11);
    for (int t = 0; t < 4; ++t) {
        const Index n = 30 + 15 * t;
        Matrix m = rng.normal_matrix(n, 5);
        Matrix k = rbf_kernel_matrix(m, 0.5 + 0.4 * t);
        CHECK((k - k.transpose()).norm() == doctest::Approx(0.0));
        CHECK((k.diagonal() - Vector::Ones(n)).norm() == doctest::Approx(0.0));
        Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
        CHECK(eig.eigenvalues()(0) >= -1e-8 * static_cast<double>(n));
    }
}

TEST_CASE("rff features have unit row norm and are deterministic") {
    Rng rng(3);
    Matrix x = rng.normal_matrix(50, 6);
    RffMap map = make_rff_map(6, 32, 1.3, 77);
    FeatureMatrix phi = rff_features(map, x);
    for (Index i = 0; i < x.rows(); ++i)
        CHECK(phi.data.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));

    RffMap map2 = make_rff_map(6, 32, 1.3, 77);
    FeatureMatrix phi2 = rff_features(map2, x);
    CHECK((phi.data - phi2.data).norm() == 0.0);  // bit-identical

    CHECK_THROWS_WITH_AS(rff_features(map, Matrix::Zero(3, 5)),
                         doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("rff inner products approximate the rbf kernel (95th pct over 100 seeds)") {
    Rng rng(19);
    Matrix x = rng.normal_matrix(12, 4);
    const double sigma = median_heuristic(x);
    Matrix k = rbf_kernel_matrix(x, sigma);
    std::vector<double> errs;
    for (int seed = 0; seed < 100; ++seed) {
        RffMap map = make_rff_map(4, 1 << 14, sigma, static_cast<std::uint64_t>(seed));
        Matrix approx = rff_features(map, x).data;
        errs.push_back((approx * approx.transpose() - k).cwiseAbs().maxCoeff());
    }
    std::sort(errs.begin(), errs.end());
    CHECK(errs[94] <= 0.05);
}

TEST_CASE("rff approximation error is non-increasing in D (20-seed average)") {
    Rng rng(23);
    Matrix x = rng.normal_matrix(40, 5);
    const double sigma = median_heuristic(x);
    Matrix k = rbf_kernel_matrix(x, sigma);
    std::vector<double> mean_err;
    for (Index d : {64, 256, 1024, 4096}) {
        double sum = 0.0;
        for (int seed = 0; seed < 20; ++seed) {
            RffMap map = make_rff_map(5, d, sigma, static_cast<std::uint64_t>(1000 + seed));
            Matrix approx = rff_features(map, x).data;
            sum += (approx * approx.transpose() - k).cwiseAbs().mean();
        }
        mean_err.push_back(sum / 20.0);
    }
    for (std::size_t i = 1; i < mean_err.size(); ++i) CHECK(mean_err[i] <= mean_err[i - 1]);
}

TEST_CASE("one-hot features") {
    FeatureMatrix f = one_hot_features({0, 1, 0}, 2);
    Matrix expect(3, 2);
    expect << 1, 0, 0, 1, 1, 0;
    CHECK((f.data - expect).norm() == 0.0);

    Matrix induced = f.data * f.data.transpose();
    Matrix kexp(3, 3);
    kexp << 1, 0, 1, 0, 1, 0, 1, 0, 1;
    CHECK((induced - kexp).norm() == 0.0);

    FeatureMatrix single = one_hot_features({0, 0, 0}, 1);
    CHECK(center_features(single).data.norm() == 0.0);

    CHECK_THROWS_WITH_AS(one_hot_features({0, 2}, 2), doctest::Contains("LabelOutOfRange"), Error);
}

TEST_CASE("center_features subtracts column means and is idempotent") {
    FeatureMatrix f;
    f.data = Matrix(3, 1);
    f.data << 1, 2, 3;
    FeatureMatrix c = center_features(f);
    Matrix expect(3, 1);
    expect << -1, 0, 1;
    CHECK((c.data - expect).norm() == doctest::Approx(0.0));
    CHECK(c.centered);
    CHECK((center_features(c).data - c.data).norm() == 0.0);

    FeatureMatrix one;
    one.data = Matrix::Constant(1, 4, 3.3);
    CHECK(center_features(one).data.norm() == 0.0);

    Rng rng(2);
    FeatureMatrix r;
    r.data = rng.normal_matrix(57, 9);
    r.data.col(3).setConstant(4.2);  // constant column is annihilated
    FeatureMatrix rc = center_features(r);
    CHECK(rc.data.col(3).norm() == doctest::Approx(0.0));
    for (Index j = 0; j < rc.data.cols(); ++j)
        CHECK(std::abs(rc.data.col(j).sum()) <= 1e-9 * static_cast<double>(r.data.rows()));
}

TEST_CASE("factor_kernel round trips") {
    Matrix j = factor_kernel(Matrix::Identity(3, 3));
    CHECK(j.cols() == 3);
    CHECK((j * j.transpose() - Matrix::Identity(3, 3)).norm() <= 1e-12);

    Matrix ones = Matrix::Ones(2, 2);
    Matrix j1 = factor_kernel(ones);
    CHECK(j1.cols() == 1);
    CHECK((j1 * j1.transpose() - ones).norm() <= 1e-12);
    CHECK(std::abs(std::abs(j1(0, 0)) - 1.0) <= 1e-12);
    CHECK(j1(0, 0) == doctest::Approx(j1(1, 0)));

    Matrix indef(2, 2);
    indef << 1, 0, 0, -0.5;
    CHECK_THROWS_WITH_AS(factor_kernel(indef), doctest::Contains("NotPSD"), Error);

    Rng rng(31);
    for (Index n : {20, 80, 200}) {
        Matrix k = random_psd(n, rng);
        Matrix f = factor_kernel(k);
        CHECK((f * f.transpose() - k).norm() <= 1e-8 * k.norm());
    }
}
