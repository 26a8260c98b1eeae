#pragma once

#include "oblv/erasure.hpp"
#include "oblv/probes.hpp"

namespace oblv {

// Probe-driven evaluator: adversarial max-probe on S, a single utility
// classifier on Y, and a fresh median-heuristic RFF HSIC reading against S.
struct EvaluatorConfig {
    ProbeSuite probes;
    Index hsic_dim = 512;
    int jobs = 1;
};

Evaluator make_probe_evaluator(const EvaluatorConfig& config);

// HSIC(repr, S) with a fresh median-bandwidth RFF map at fixed dimension.
// A constant representation reads as 0.
double hsic_against_labels(const Eigen::Ref<const Matrix>& repr, const std::vector<int>& labels,
                           int num_classes, Index rff_dim, std::uint64_t seed);

}  // namespace oblv
