#pragma once

#include <string>
#include <vector>

#include "oblv/dataset.hpp"

namespace oblv {

// One row of the utility-erasure trade-off curve.
struct TradeoffRecord {
    int step = 0;
    double y_acc_test = std::numeric_limits<double>::quiet_NaN();
    double s_acc_test_max = 0.0;
    double s_acc_train_max = 0.0;
    double chance_y = std::numeric_limits<double>::quiet_NaN();
    double chance_s = 0.0;
    double hsic_s = 0.0;
    Index dim = 0;
};

struct FairnessReport {
    double dp = 0.0;
    double gap_rms = 0.0;
    std::vector<double> rate_group0, rate_group1;  // prediction rate per class
    std::vector<double> tpr_group0, tpr_group1;    // per class; NaN where skipped
    int skipped_classes = 0;
};

// DP = mean over classes of |p(pred=c | s=0) - p(pred=c | s=1)|.
// num_classes == 0 derives the class count from the labels themselves.
double demographic_parity(const std::vector<int>& preds, const std::vector<int>& s,
                          int num_classes = 0);

// Root of the uniform class-mean of squared TPR gaps across the two groups.
// Classes with an empty (class, group) cell are skipped.
double gap_rms(const std::vector<int>& preds, const std::vector<int>& y,
               const std::vector<int>& s, int num_classes = 0);

FairnessReport fairness_report(const std::vector<int>& preds, const std::vector<int>& y,
                               const std::vector<int>& s, int num_classes = 0);

// Mirror-skewed subsample: class y=1 holds fraction `split` of s=1 samples,
// class y=0 holds fraction `split` of s=0. Per class the subsample size is
// min(majority cell, floor(minority cell / (1 - split))); drawn seeded,
// without replacement.
EmbeddingDataset controlled_resample(const EmbeddingDataset& dataset, double split,
                                     std::uint64_t seed);

// Fixed tradeoff.csv schema:
//   step,y_acc_test,s_acc_test_max,s_acc_train_max,chance_y,chance_s,hsic_s,dim
// The first emitted row (step -1) is the random-chance origin of the curve.
std::string tradeoff_csv(const std::vector<TradeoffRecord>& records);

// Multi-run aggregation: per-step median/min/max columns over seeds.
std::string aggregate_tradeoff_csv(const std::vector<std::vector<TradeoffRecord>>& runs);

// Deterministic float formatting used for every CSV the library writes.
std::string format_double(double v);

}  // namespace oblv
