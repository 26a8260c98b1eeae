#include <doctest.h>

#include <cmath>

#include "oblv/metrics.hpp"
#include "oblv/rng.hpp"
#include "oblv/synthetic.hpp"

using namespace oblv;

TEST_CASE("demographic parity hand cases") {
    // identical prediction distributions per group
    std::vector<int> preds{0, 1, 0, 1};
    std::vector<int> s{0, 0, 1, 1};
    CHECK(demographic_parity(preds, s) == doctest::Approx(0.0));

    // group 0 always predicts class 0, group 1 always class 1
    std::vector<int> p2{0, 0, 1, 1};
    std::vector<int> s2{0, 0, 1, 1};
    CHECK(demographic_parity(p2, s2) == doctest::Approx(1.0));

    // relabeling the groups leaves DP unchanged
    std::vector<int> s2_swapped{1, 1, 0, 0};
    CHECK(demographic_parity(p2, s2_swapped) == doctest::Approx(demographic_parity(p2, s2)));

    CHECK_THROWS_WITH_AS(demographic_parity({0, 1}, {0, 0}), doctest::Contains("EmptyGroup"),
                         Error);
}

TEST_CASE("gap_rms hand cases") {
    // one class, TPRs 0.9 vs 0.4 -> 0.5
    std::vector<int> preds, y, s;
    for (int i = 0; i < 10; ++i) {  // group 0: 9 hits of 10
        y.push_back(0);
        s.push_back(0);
        preds.push_back(i < 9 ? 0 : 1);
    }
    for (int i = 0; i < 10; ++i) {  // group 1: 4 hits of 10
        y.push_back(0);
        s.push_back(1);
        preds.push_back(i < 4 ? 0 : 1);
    }
    CHECK(gap_rms(preds, y, s) == doctest::Approx(0.5));

    // swap group labels: unchanged
    std::vector<int> s_swapped;
    for (int v : s) s_swapped.push_back(1 - v);
    CHECK(gap_rms(preds, y, s_swapped) == doctest::Approx(0.5));

    // equal TPRs -> 0
    std::vector<int> py{0, 0, 1, 1}, yy{0, 0, 1, 1}, sy{0, 1, 0, 1};
    CHECK(gap_rms(py, yy, sy) == doctest::Approx(0.0));

    // class 1 has no group-1 cell: skipped with a flag
    std::vector<int> p3{0, 0, 1}, y3{0, 0, 1}, s3{0, 1, 0};
    FairnessReport rep = fairness_report(p3, y3, s3);
    CHECK(rep.skipped_classes == 1);
    CHECK(std::isnan(rep.tpr_group1[1]));

    // every cell empty on one side
    std::vector<int> p4{0, 1}, y4{0, 1}, s4{0, 0};
    CHECK_THROWS_WITH_AS(fairness_report(p4, y4, s4), doctest::Contains("EmptyGroup"), Error);
}

TEST_CASE("dp and gap vanish for S-independent deterministic predictors") {
    Rng rng(5);
    std::vector<int> preds, y, s;
    for (int i = 0; i < 400; ++i) {
        const int yy = static_cast<int>(rng.below(2));
        y.push_back(yy);
        s.push_back(static_cast<int>(rng.below(2)));
        preds.push_back(yy);  // deterministic function of Y only
    }
    // conditioned on identical rows the prediction ignores S entirely, but DP
    // still needs Y itself independent of S; with random s above, rates match
    // exactly only in expectation, so use a constructed balanced case instead.
    std::vector<int> pb, yb, sb;
    for (int g = 0; g < 2; ++g)
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 25; ++k) {
                sb.push_back(g);
                yb.push_back(c);
                pb.push_back(c);
            }
    CHECK(demographic_parity(pb, sb) == doctest::Approx(0.0));
    CHECK(gap_rms(pb, yb, sb) == doctest::Approx(0.0));
}

TEST_CASE("controlled_resample produces the mirrored skew") {
    // pool with 1000 samples per (y, s) cell
    Rng rng(7);
    EmbeddingDataset pool;
    const Index n = 4000;
    pool.x = rng.normal_matrix(n, 4);
    pool.y = std::vector<int>();
    pool.s_classes = 2;
    pool.y_classes = 2;
    for (int c = 0; c < 2; ++c)
        for (int g = 0; g < 2; ++g)
            for (int k = 0; k < 1000; ++k) {
                pool.y->push_back(c);
                pool.s.push_back(g);
            }

    EmbeddingDataset out = controlled_resample(pool, 0.8, 3);
    long n11 = 0, n10 = 0, n00 = 0, n01 = 0;
    for (std::size_t i = 0; i < out.s.size(); ++i) {
        const int yv = (*out.y)[i], sv = out.s[i];
        if (yv == 1 && sv == 1) ++n11;
        if (yv == 1 && sv == 0) ++n10;
        if (yv == 0 && sv == 0) ++n00;
        if (yv == 0 && sv == 1) ++n01;
    }
    CHECK(n11 == 800);
    CHECK(n10 == 200);
    CHECK(n00 == 800);
    CHECK(n01 == 200);

    // balanced case respects the fractions up to integer rounding
    EmbeddingDataset half = controlled_resample(pool, 0.5, 3);
    long h11 = 0, h1 = 0;
    for (std::size_t i = 0; i < half.s.size(); ++i)
        if ((*half.y)[i] == 1) {
            ++h1;
            if (half.s[i] == 1) ++h11;
        }
    CHECK(std::abs(static_cast<double>(h11) / static_cast<double>(h1) - 0.5) <=
          1.0 / static_cast<double>(h1));

    // infeasible request
    CHECK_THROWS_WITH_AS(controlled_resample(pool, 0.96, 3), doctest::Contains("InsufficientCell"),
                         Error);

    // deterministic given the seed
    EmbeddingDataset again = controlled_resample(pool, 0.8, 3);
    CHECK((again.x - out.x).norm() == 0.0);
}

TEST_CASE("controlled_resample fraction exactness on random pools") {
    Rng rng(11);
    for (int t = 0; t < 6; ++t) {
        EmbeddingDataset pool;
        std::vector<long> cells{300 + static_cast<long>(rng.below(700)),
                                300 + static_cast<long>(rng.below(700)),
                                300 + static_cast<long>(rng.below(700)),
                                300 + static_cast<long>(rng.below(700))};
        pool.y = std::vector<int>();
        pool.s_classes = 2;
        pool.y_classes = 2;
        long total = 0;
        for (int c = 0; c < 2; ++c)
            for (int g = 0; g < 2; ++g) {
                for (long k = 0; k < cells[static_cast<std::size_t>(2 * c + g)]; ++k) {
                    pool.y->push_back(c);
                    pool.s.push_back(g);
                }
                total += cells[static_cast<std::size_t>(2 * c + g)];
            }
        pool.x = rng.normal_matrix(total, 3);

        const double split = 0.5 + 0.09 * static_cast<double>(t);
        EmbeddingDataset out = controlled_resample(pool, split, 17);
        for (int c = 0; c < 2; ++c) {
            long maj = 0, tot = 0;
            const int s_maj = c == 1 ? 1 : 0;
            for (std::size_t i = 0; i < out.s.size(); ++i)
                if ((*out.y)[i] == c) {
                    ++tot;
                    if (out.s[i] == s_maj) ++maj;
                }
            CHECK(std::abs(static_cast<double>(maj) - split * static_cast<double>(tot)) <= 1.0);
        }
    }
}

TEST_CASE("tradeoff csv: schema, origin row, ordering") {
    TradeoffRecord r;
    r.step = 0;
    r.y_acc_test = 0.9;
    r.s_acc_test_max = 0.8;
    r.s_acc_train_max = 0.85;
    r.chance_y = 0.5;
    r.chance_s = 0.25;
    r.hsic_s = 0.01;
    r.dim = 16;

    const std::string csv = tradeoff_csv({r});
    CHECK(csv.rfind("step,y_acc_test,s_acc_test_max,s_acc_train_max,chance_y,chance_s,hsic_s,dim\n",
                    0) == 0);
    CHECK(csv.find("\n-1,0.5,0.25,0.25,0.5,0.25,0,0\n") != std::string::npos);  // origin row

    TradeoffRecord r2 = r;
    r2.step = 0;
    CHECK_THROWS_WITH_AS(tradeoff_csv({r, r2}), doctest::Contains("OutOfOrder"), Error);

    std::vector<std::vector<TradeoffRecord>> runs{{r}, {r}, {r}};
    const std::string agg = aggregate_tradeoff_csv(runs);
    CHECK(agg.find("y_acc_test_median") != std::string::npos);
    CHECK(agg.find("s_acc_train_median") != std::string::npos);
}

TEST_CASE("synthetic generator: independence, determinism, labeled structure") {
    SynthSpec spec;
    spec.n = 2000;
    spec.d = 16;
    spec.seed = 5;
    EmbeddingDataset a = generate_synthetic(spec);
    EmbeddingDataset b = generate_synthetic(spec);
    CHECK((a.x - b.x).norm() == 0.0);
    CHECK(a.s == b.s);

    // rho = 0: empirical correlation within 3/sqrt(n)
    double sy = 0, ss = 0, yy = 0, cross = 0;
    const auto n = static_cast<double>(spec.n);
    for (std::size_t i = 0; i < a.s.size(); ++i) {
        sy += (*a.y)[i];
        ss += a.s[i];
    }
    const double my = sy / n, ms = ss / n;
    for (std::size_t i = 0; i < a.s.size(); ++i) {
        cross += ((*a.y)[i] - my) * (a.s[i] - ms);
        yy += ((*a.y)[i] - my) * ((*a.y)[i] - my);
    }
    double var_s = 0;
    for (std::size_t i = 0; i < a.s.size(); ++i) var_s += (a.s[i] - ms) * (a.s[i] - ms);
    const double corr = cross / std::sqrt(yy * var_s);
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(n));

    // rho steers the correlation
    spec.rho = 0.6;
    EmbeddingDataset c = generate_synthetic(spec);
    double agree = 0;
    for (std::size_t i = 0; i < c.s.size(); ++i) agree += (*c.y)[i] == c.s[i] ? 1.0 : 0.0;
    CHECK(agree / n == doctest::Approx(0.8).epsilon(0.05));
}
