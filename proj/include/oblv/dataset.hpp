#pragma once

#include <optional>
#include <vector>

#include "oblv/kernels.hpp"

namespace oblv {

enum class Split { Train, Val, Test };

// Paired samples (x_i, y_i, s_i): representation rows plus attribute labels
// and (optionally) target labels. Labels are dense in [0, num_classes).
struct EmbeddingDataset {
    Matrix x;                       // n x d
    std::vector<int> s;             // attribute labels, size n
    std::optional<std::vector<int>> y;  // target labels, size n when present
    int s_classes = 0;
    int y_classes = 0;
    std::vector<Split> split;       // empty until assigned

    Index samples() const { return x.rows(); }
    Index dim() const { return x.cols(); }

    void validate() const;
};

struct SplitFractions {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

// Seeded shuffle-and-cut assignment. Fractions must sum to 1 (within 1e-9).
std::vector<Split> assign_splits(Index n, const SplitFractions& fractions, std::uint64_t seed);

std::vector<Index> split_indices(const std::vector<Split>& split, Split which);

Matrix take_rows(const Eigen::Ref<const Matrix>& m, const std::vector<Index>& idx);
std::vector<int> take_labels(const std::vector<int>& labels, const std::vector<Index>& idx);

int count_classes(const std::vector<int>& labels);

}  // namespace oblv
