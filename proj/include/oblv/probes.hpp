#pragma once

#include <string>
#include <utility>
#include <vector>

#include "oblv/kernels.hpp"

namespace oblv {

// Majority-class frequency; the floor for probe accuracy.
double random_chance(const std::vector<int>& labels);

struct ProbeData {
    Matrix x;
    std::vector<int> labels;
    int num_classes = 0;
};

struct ProbeEntry {
    std::string kind;  // "mlp" or "kernel"
    double gamma = 0.0;
    double c = 0.0;
    std::uint64_t seed = 0;
    double train_acc = 0.0;
    double test_acc = 0.0;
};

struct ProbeReport {
    std::vector<ProbeEntry> entries;
    double max_test_acc = 0.0;
    double max_train_acc = 0.0;
    double chance = 0.0;        // majority frequency on the test labels
    double chance_train = 0.0;  // majority frequency on the train labels
};

struct MlpProbeSpec {
    std::vector<Index> hidden{128, 128};
    int seeds = 3;
    int epochs = 100;
    double learning_rate = 1e-3;
    Index batch = 512;
};

// RBF-kernel adversary surrogate: RFF features with sigma = 1/sqrt(2 gamma)
// plus an L2-regularized softmax classifier with strength 1/C, trained
// full-batch to convergence.
struct KernelProbeSpec {
    std::vector<std::pair<double, double>> grid{
        {10, 5}, {10, 10}, {5, 10}, {5, 5}, {1, 5}, {1, 1}, {0.5, 1}};
    Index rff_dim = 512;
    int max_iters = 2000;
    double tol = 1e-6;
    double learning_rate = 0.05;
};

struct ProbeSuite {
    MlpProbeSpec mlp;
    KernelProbeSpec kernel;
};

ProbeEntry fit_mlp_probe(const ProbeData& train, const ProbeData& test, const MlpProbeSpec& spec,
                         std::uint64_t seed);

ProbeEntry fit_kernel_probe(const ProbeData& train, const ProbeData& test, double gamma, double c,
                            const KernelProbeSpec& spec, std::uint64_t seed);

// Runs spec.mlp.seeds MLP probes and the whole kernel grid, merging reports
// deterministically in spec order; returns element-wise max accuracies.
ProbeReport probe_max(const ProbeData& train, const ProbeData& test, const ProbeSuite& suite,
                      std::uint64_t base_seed, int jobs = 1);

// Argmax predictions of a freshly trained MLP probe; used for both the
// utility classifier and the fairness evaluation.
struct MlpPrediction {
    std::vector<int> train_preds;
    std::vector<int> test_preds;
    double train_acc = 0.0;
    double test_acc = 0.0;
};
MlpPrediction mlp_classify(const ProbeData& train, const ProbeData& test,
                           const MlpProbeSpec& spec, std::uint64_t seed);

}  // namespace oblv
