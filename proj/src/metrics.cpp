#include "oblv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "oblv/rng.hpp"

namespace oblv {

namespace {

void check_binary_groups(const std::vector<int>& s, std::size_t n) {
    require(!s.empty() && s.size() == n, ErrorCode::ShapeMismatch,
            "group labels disagree with prediction count");
    std::size_t g0 = 0, g1 = 0;
    for (int v : s) {
        require(v == 0 || v == 1, ErrorCode::ConfigError, "S must be binary (labels 0/1)");
        (v == 0 ? g0 : g1)++;
    }
    require(g0 > 0 && g1 > 0, ErrorCode::EmptyGroup, "both S groups must be non-empty");
}

int num_pred_classes(const std::vector<int>& preds) {
    int c = 0;
    for (int v : preds) {
        require(v >= 0, ErrorCode::LabelOutOfRange, "negative prediction label");
        c = std::max(c, v + 1);
    }
    return c;
}

}  // namespace

double demographic_parity(const std::vector<int>& preds, const std::vector<int>& s,
                          int num_classes) {
    check_binary_groups(s, preds.size());
    const int classes = num_classes > 0 ? num_classes : num_pred_classes(preds);
    require(num_pred_classes(preds) <= classes, ErrorCode::LabelOutOfRange,
            "prediction label outside [0, num_classes)");
    std::vector<double> count0(static_cast<std::size_t>(classes), 0.0);
    std::vector<double> count1(static_cast<std::size_t>(classes), 0.0);
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (s[i] == 0) {
            count0[static_cast<std::size_t>(preds[i])] += 1.0;
            n0 += 1.0;
        } else {
            count1[static_cast<std::size_t>(preds[i])] += 1.0;
            n1 += 1.0;
        }
    }
    double sum = 0.0;
    for (int c = 0; c < classes; ++c)
        sum += std::abs(count0[static_cast<std::size_t>(c)] / n0 -
                        count1[static_cast<std::size_t>(c)] / n1);
    return sum / static_cast<double>(classes);
}

FairnessReport fairness_report(const std::vector<int>& preds, const std::vector<int>& y,
                               const std::vector<int>& s, int num_classes) {
    require(preds.size() == y.size(), ErrorCode::ShapeMismatch,
            "prediction and label counts disagree");
    check_binary_groups(s, preds.size());
    const int derived = std::max(num_pred_classes(preds), num_pred_classes(y));
    const int classes = num_classes > 0 ? num_classes : derived;
    require(derived <= classes, ErrorCode::LabelOutOfRange,
            "label outside [0, num_classes)");
    const auto nan = std::numeric_limits<double>::quiet_NaN();

    FairnessReport rep;
    rep.rate_group0.assign(static_cast<std::size_t>(classes), 0.0);
    rep.rate_group1.assign(static_cast<std::size_t>(classes), 0.0);
    rep.tpr_group0.assign(static_cast<std::size_t>(classes), nan);
    rep.tpr_group1.assign(static_cast<std::size_t>(classes), nan);

    double n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) (s[i] == 0 ? n0 : n1) += 1.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto c = static_cast<std::size_t>(preds[i]);
        if (s[i] == 0)
            rep.rate_group0[c] += 1.0 / n0;
        else
            rep.rate_group1[c] += 1.0 / n1;
    }
    double dp_sum = 0.0;
    for (int c = 0; c < classes; ++c)
        dp_sum += std::abs(rep.rate_group0[static_cast<std::size_t>(c)] -
                           rep.rate_group1[static_cast<std::size_t>(c)]);
    rep.dp = dp_sum / static_cast<double>(classes);

    double gap_sum = 0.0;
    int valid = 0;
    for (int c = 0; c < classes; ++c) {
        double cell0 = 0.0, cell1 = 0.0, hit0 = 0.0, hit1 = 0.0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (y[i] != c) continue;
            if (s[i] == 0) {
                cell0 += 1.0;
                if (preds[i] == c) hit0 += 1.0;
            } else {
                cell1 += 1.0;
                if (preds[i] == c) hit1 += 1.0;
            }
        }
        if (cell0 == 0.0 || cell1 == 0.0) {
            ++rep.skipped_classes;
            continue;
        }
        const double tpr0 = hit0 / cell0;
        const double tpr1 = hit1 / cell1;
        rep.tpr_group0[static_cast<std::size_t>(c)] = tpr0;
        rep.tpr_group1[static_cast<std::size_t>(c)] = tpr1;
        gap_sum += (tpr0 - tpr1) * (tpr0 - tpr1);
        ++valid;
    }
    require(valid > 0, ErrorCode::NoValidCells, "every (class, group) cell is empty");
    rep.gap_rms = std::sqrt(gap_sum / static_cast<double>(valid));
    return rep;
}

double gap_rms(const std::vector<int>& preds, const std::vector<int>& y,
               const std::vector<int>& s, int num_classes) {
    return fairness_report(preds, y, s, num_classes).gap_rms;
}

EmbeddingDataset controlled_resample(const EmbeddingDataset& dataset, double split,
                                     std::uint64_t seed) {
    dataset.validate();
    require(dataset.y.has_value(), ErrorCode::ConfigError, "controlled_resample needs Y labels");
    require(dataset.y_classes == 2 && dataset.s_classes == 2, ErrorCode::ConfigError,
            "controlled_resample needs binary Y and binary S");
    if (split < 0.5 || split > 0.95)
        fail(ErrorCode::InsufficientCell,
             "split " + std::to_string(split) + " outside the feasible range [0.5, 0.95]");

    const auto& y = *dataset.y;
    std::vector<Index> cell[2][2];  // [y][s]
    for (Index i = 0; i < dataset.samples(); ++i)
        cell[y[static_cast<std::size_t>(i)]][dataset.s[static_cast<std::size_t>(i)]].push_back(i);

    std::vector<Index> chosen;
    for (int c = 0; c < 2; ++c) {
        const int s_maj = c == 1 ? 1 : 0;  // mirror skew
        auto& maj = cell[c][s_maj];
        auto& min_cell = cell[c][1 - s_maj];
        const auto n_maj = static_cast<long long>(maj.size());
        const auto n_min = static_cast<long long>(min_cell.size());
        const long long t =
            std::min<long long>(n_maj, static_cast<long long>(std::floor(
                                           static_cast<double>(n_min) / (1.0 - split))));
        long long take_maj = std::llround(split * static_cast<double>(t));
        long long take_min = t - take_maj;
        if (take_min > n_min) {
            take_min = n_min;
            take_maj = t - take_min;
        }
        if (take_maj < 1 || take_min < 1)
            fail(ErrorCode::InsufficientCell,
                 "cell (y=" + std::to_string(c) + ", s=" +
                     std::to_string(take_maj < 1 ? s_maj : 1 - s_maj) +
                     ") cannot supply the requested fraction");

        auto draw = [&](std::vector<Index>& pool, long long count, std::uint64_t tag) {
            Rng rng(derive_seed(seed, tag));
            auto perm = rng.permutation(static_cast<Index>(pool.size()));
            for (long long i = 0; i < count; ++i)
                chosen.push_back(pool[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
        };
        draw(maj, take_maj, static_cast<std::uint64_t>(2 * c));
        draw(min_cell, take_min, static_cast<std::uint64_t>(2 * c + 1));
    }
    std::sort(chosen.begin(), chosen.end());

    EmbeddingDataset out;
    out.x = take_rows(dataset.x, chosen);
    out.s = take_labels(dataset.s, chosen);
    out.y = take_labels(y, chosen);
    out.s_classes = 2;
    out.y_classes = 2;
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string record_row(const TradeoffRecord& r) {
    std::ostringstream os;
    os << r.step << ',' << format_double(r.y_acc_test) << ',' << format_double(r.s_acc_test_max)
       << ',' << format_double(r.s_acc_train_max) << ',' << format_double(r.chance_y) << ','
       << format_double(r.chance_s) << ',' << format_double(r.hsic_s) << ',' << r.dim << '\n';
    return os.str();
}

void check_ordered(const std::vector<TradeoffRecord>& records) {
    require(!records.empty(), ErrorCode::ConfigError, "no trade-off records");
    for (std::size_t i = 1; i < records.size(); ++i)
        require(records[i].step > records[i - 1].step, ErrorCode::OutOfOrder,
                "record steps must be strictly increasing");
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string tradeoff_csv(const std::vector<TradeoffRecord>& records) {
    check_ordered(records);
    std::ostringstream os;
    os << "step,y_acc_test,s_acc_test_max,s_acc_train_max,chance_y,chance_s,hsic_s,dim\n";
    TradeoffRecord origin;
    origin.step = -1;
    origin.y_acc_test = records.front().chance_y;
    origin.s_acc_test_max = records.front().chance_s;
    origin.s_acc_train_max = records.front().chance_s;
    origin.chance_y = records.front().chance_y;
    origin.chance_s = records.front().chance_s;
    origin.hsic_s = 0.0;
    origin.dim = 0;
    os << record_row(origin);
    for (const auto& r : records) os << record_row(r);
    return os.str();
}

std::string aggregate_tradeoff_csv(const std::vector<std::vector<TradeoffRecord>>& runs) {
    require(!runs.empty(), ErrorCode::ConfigError, "no runs to aggregate");
    int max_step = 0;
    for (const auto& run : runs) {
        check_ordered(run);
        for (const auto& r : run) max_step = std::max(max_step, r.step);
    }
    std::ostringstream os;
    os << "step,runs,y_acc_test_median,y_acc_test_min,y_acc_test_max,"
          "s_acc_test_median,s_acc_test_min,s_acc_test_max,"
          "s_acc_train_median,s_acc_train_min,s_acc_train_max,hsic_s_median,dim_median\n";
    for (int step = 0; step <= max_step; ++step) {
        std::vector<double> ys, st, str, hs, dm;
        for (const auto& run : runs)
            for (const auto& r : run)
                if (r.step == step) {
                    ys.push_back(r.y_acc_test);
                    st.push_back(r.s_acc_test_max);
                    str.push_back(r.s_acc_train_max);
                    hs.push_back(r.hsic_s);
                    dm.push_back(static_cast<double>(r.dim));
                }
        if (ys.empty()) continue;
        auto minmax_y = std::minmax_element(ys.begin(), ys.end());
        auto minmax_t = std::minmax_element(st.begin(), st.end());
        auto minmax_r = std::minmax_element(str.begin(), str.end());
        os << step << ',' << ys.size() << ',' << format_double(median_of(ys)) << ','
           << format_double(*minmax_y.first) << ',' << format_double(*minmax_y.second) << ','
           << format_double(median_of(st)) << ',' << format_double(*minmax_t.first) << ','
           << format_double(*minmax_t.second) << ',' << format_double(median_of(str)) << ','
           << format_double(*minmax_r.first) << ',' << format_double(*minmax_r.second) << ','
           << format_double(median_of(hs)) << ',' << format_double(median_of(dm)) << '\n';
    }
    return os.str();
}

}  // namespace oblv
