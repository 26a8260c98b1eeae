#include "oblv/synthetic.hpp"

#include <cmath>

#include <Eigen/QR>

#include "oblv/rng.hpp"

namespace oblv {

namespace {

// Haar-ish random orthogonal matrix with signs fixed for determinism.
Matrix random_rotation(Index d, Rng& rng) {
    Matrix g = rng.normal_matrix(d, d);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < d; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    return q;
}

}  // namespace

EmbeddingDataset generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    Rng labels_rng(derive_seed(spec.seed, 0x6c6162));
    Rng struct_rng(derive_seed(spec.seed, 0x737472));
    Rng noise_rng(derive_seed(spec.seed, 0x6e6f69));

    const Index d_y = std::max<Index>(2, spec.d / 4);
    const Index d_s = std::max<Index>(2, spec.d / 4);

    Vector amp_y(d_y), amp_s(d_s);
    for (Index j = 0; j < d_y; ++j) amp_y(j) = struct_rng.uniform(0.5, 1.5);
    for (Index j = 0; j < d_s; ++j) amp_s(j) = struct_rng.uniform(0.5, 1.5);

    std::vector<Matrix> rotations;
    for (int k = 0; k <= spec.depth; ++k) rotations.push_back(random_rotation(spec.d, struct_rng));

    EmbeddingDataset out;
    out.x.resize(spec.n, spec.d);
    out.s.resize(static_cast<std::size_t>(spec.n));
    out.y = std::vector<int>(static_cast<std::size_t>(spec.n));
    out.s_classes = 2;
    out.y_classes = 2;

    const double p_same = 0.5 * (1.0 + spec.rho);
    for (Index i = 0; i < spec.n; ++i) {
        const int y = labels_rng.uniform() < 0.5 ? 0 : 1;
        const int s = labels_rng.uniform() < p_same ? y : 1 - y;
        (*out.y)[static_cast<std::size_t>(i)] = y;
        out.s[static_cast<std::size_t>(i)] = s;

        Vector v(spec.d);
        for (Index j = 0; j < d_y; ++j)
            v(j) = amp_y(j) * spec.signal_scale * (2 * y - 1) + spec.noise * noise_rng.normal();
        for (Index j = 0; j < d_s; ++j)
            v(d_y + j) =
                amp_s(j) * spec.signal_scale * (2 * s - 1) + spec.noise * noise_rng.normal();
        for (Index j = d_y + d_s; j < spec.d; ++j) v(j) = noise_rng.normal();

        for (int k = 0; k < spec.depth; ++k) v = (rotations[static_cast<std::size_t>(k)] * v).array().tanh();
        out.x.row(i) = (rotations.back() * v).transpose();
    }
    return out;
}

}  // namespace oblv
