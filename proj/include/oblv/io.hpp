#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "oblv/kernels.hpp"

namespace oblv {

// Embedding matrix container formats:
//  - binary: magic "OBLV", u32 version = 1, u64 rows, u64 cols, then
//    rows*cols little-endian float64 values, row-major;
//  - CSV: header dim_0,...,dim_{d-1}, one sample per line.
// read_embeddings sniffs the format from the file contents.
Matrix read_embeddings(const std::filesystem::path& path);
void write_embeddings_binary(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m);
void write_embeddings_csv(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m);

struct LabelColumn {
    std::vector<int> values;       // dense in [0, classes)
    std::map<long, int> mapping;   // original value -> dense label
    int classes = 0;
};

// Single-column CSV with header `label`, non-negative integers; values are
// densely remapped in sorted order and the mapping is reported for the
// run manifest.
LabelColumn read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

}  // namespace oblv
