#include "oblv/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "oblv/rng.hpp"

namespace oblv {

void EmbeddingDataset::validate() const {
    const auto n = static_cast<std::size_t>(x.rows());
    require(s.size() == n, ErrorCode::ShapeMismatch, "dataset: s label count != rows");
    if (y) require(y->size() == n, ErrorCode::ShapeMismatch, "dataset: y label count != rows");
    if (!split.empty())
        require(split.size() == n, ErrorCode::ShapeMismatch, "dataset: split assignment count != rows");
    for (int v : s)
        require(v >= 0 && v < s_classes, ErrorCode::LabelOutOfRange, "dataset: s label out of range");
    if (y)
        for (int v : *y)
            require(v >= 0 && v < y_classes, ErrorCode::LabelOutOfRange, "dataset: y label out of range");
}

std::vector<Split> assign_splits(Index n, const SplitFractions& f, std::uint64_t seed) {
    require(f.train >= 0 && f.val >= 0 && f.test >= 0 &&
                std::abs(f.train + f.val + f.test - 1.0) < 1e-9,
            ErrorCode::ConfigError, "split fractions must be non-negative and sum to 1");
    Rng rng(derive_seed(seed, 0x73706c69));
    auto perm = rng.permutation(n);
    const auto n_train = static_cast<Index>(std::llround(f.train * static_cast<double>(n)));
    const auto n_val = static_cast<Index>(std::llround(f.val * static_cast<double>(n)));
    std::vector<Split> out(static_cast<std::size_t>(n), Split::Test);
    for (Index i = 0; i < n; ++i) {
        Split sp = i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
        out[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = sp;
    }
    return out;
}

std::vector<Index> split_indices(const std::vector<Split>& split, Split which) {
    std::vector<Index> idx;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == which) idx.push_back(static_cast<Index>(i));
    return idx;
}

Matrix take_rows(const Eigen::Ref<const Matrix>& m, const std::vector<Index>& idx) {
    Matrix out(static_cast<Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
    return out;
}

std::vector<int> take_labels(const std::vector<int>& labels, const std::vector<Index>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (Index i : idx) out.push_back(labels[static_cast<std::size_t>(i)]);
    return out;
}

int count_classes(const std::vector<int>& labels) {
    int c = 0;
    for (int v : labels) c = std::max(c, v + 1);
    return c;
}

}  // namespace oblv
