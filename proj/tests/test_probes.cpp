#include <doctest.h>

#include <cmath>

#include "oblv/probes.hpp"
#include "oblv/rng.hpp"

using namespace oblv;

namespace {

// two Gaussian blobs, linearly separable at scale >= 3
ProbeData blobs(Index n, double scale, std::uint64_t seed) {
    Rng rng(seed);
    ProbeData d;
    d.x.resize(n, 2);
    d.num_classes = 2;
    for (Index i = 0; i < n; ++i) {
        const int c = static_cast<int>(rng.below(2));
        d.labels.push_back(c);
        d.x(i, 0) = scale * (2 * c - 1) + rng.normal();
        d.x(i, 1) = rng.normal();
    }
    return d;
}

// XOR pattern: class = sign(x0) ^ sign(x1); not linearly separable
ProbeData xor_data(Index n, std::uint64_t seed) {
    Rng rng(seed);
    ProbeData d;
    d.x.resize(n, 2);
    d.num_classes = 2;
    for (Index i = 0; i < n; ++i) {
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-1.0, 1.0);
        d.x(i, 0) = a;
        d.x(i, 1) = b;
        d.labels.push_back((a > 0) != (b > 0) ? 1 : 0);
    }
    return d;
}

ProbeData noise_labels(Index n, Index dim, std::uint64_t seed) {
    Rng rng(seed);
    ProbeData d;
    d.x = rng.normal_matrix(n, dim);
    d.num_classes = 2;
    for (Index i = 0; i < n; ++i) d.labels.push_back(static_cast<int>(rng.below(2)));
    return d;
}

}  // namespace

TEST_CASE("random_chance is the majority frequency") {
    CHECK(random_chance({0, 0, 1}) == doctest::Approx(2.0 / 3.0));
    CHECK(random_chance({2, 2, 2}) == doctest::Approx(1.0));
    CHECK_THROWS_WITH_AS(random_chance({}), doctest::Contains("EmptyLabels"), Error);
}

TEST_CASE("mlp probe separates blobs and stays at chance on shuffled labels") {
    MlpProbeSpec spec;
    spec.epochs = 30;

    ProbeData train = blobs(600, 3.0, 1);
    ProbeData test = blobs(400, 3.0, 2);
    ProbeEntry e = fit_mlp_probe(train, test, spec, 3);
    CHECK(e.test_acc >= 0.99);

    // labels independent of features: no test leakage beyond chance + 0.05
    ProbeData ntrain = noise_labels(2000, 4, 5);
    ProbeData ntest = noise_labels(800, 4, 6);
    spec.epochs = 40;
    ProbeEntry ne = fit_mlp_probe(ntrain, ntest, spec, 7);
    CHECK(ne.test_acc <= random_chance(ntest.labels) + 0.05);

    // degenerate single-class data
    ProbeData single;
    single.x = Matrix::Random(30, 3);
    single.labels.assign(30, 0);
    single.num_classes = 1;
    ProbeEntry se = fit_mlp_probe(single, single, spec, 9);
    CHECK(se.test_acc == doctest::Approx(1.0));
    CHECK(random_chance(single.labels) == doctest::Approx(1.0));
}

TEST_CASE("kernel probe handles XOR at high gamma but not in the linear limit") {
    ProbeData train = xor_data(1200, 11);
    ProbeData test = xor_data(600, 12);
    KernelProbeSpec spec;

    ProbeEntry wide = fit_kernel_probe(train, test, 10.0, 5.0, spec, 1);
    CHECK(wide.test_acc >= 0.95);

    ProbeEntry narrow = fit_kernel_probe(train, test, 1e-4, 5.0, spec, 1);
    CHECK(narrow.test_acc <= 0.6);

    ProbeData ntrain = noise_labels(1500, 3, 21);
    ProbeData ntest = noise_labels(700, 3, 22);
    ProbeEntry ne = fit_kernel_probe(ntrain, ntest, 1.0, 1.0, spec, 2);
    CHECK(ne.test_acc <= random_chance(ntest.labels) + 0.05);
}

TEST_CASE("probe_max merges deterministically and is monotone in the spec set") {
    ProbeData train = blobs(400, 1.2, 31);
    ProbeData test = blobs(300, 1.2, 32);

    ProbeSuite small;
    small.mlp.seeds = 1;
    small.mlp.epochs = 10;
    small.kernel.grid = {{1, 1}};

    ProbeSuite bigger = small;
    bigger.mlp.seeds = 3;
    bigger.kernel.grid = {{1, 1}, {10, 10}, {0.5, 1}};

    ProbeReport a = probe_max(train, test, small, 77);
    ProbeReport b = probe_max(train, test, bigger, 77);
    CHECK(a.entries.size() == 2);
    CHECK(b.entries.size() == 6);
    CHECK(b.max_test_acc >= a.max_test_acc);
    CHECK(b.max_train_acc >= a.max_train_acc);

    // reproducible bit-for-bit, also when the grid runs on threads
    ProbeReport c = probe_max(train, test, bigger, 77);
    ProbeReport d = probe_max(train, test, bigger, 77, 4);
    for (std::size_t i = 0; i < b.entries.size(); ++i) {
        CHECK(b.entries[i].test_acc == c.entries[i].test_acc);
        CHECK(b.entries[i].train_acc == c.entries[i].train_acc);
        CHECK(b.entries[i].test_acc == d.entries[i].test_acc);
    }

    // max equals every run when all runs coincide
    ProbeSuite dup;
    dup.mlp.seeds = 0;
    dup.kernel.grid = {{1, 1}, {1, 1}, {1, 1}};
    ProbeReport e = probe_max(train, test, dup, 5);
    CHECK(e.max_test_acc == e.entries[0].test_acc);
    CHECK(e.entries[0].test_acc == e.entries[2].test_acc);

    // converged probes reach at least chance - 0.02 on their own training data
    for (const auto& entry : b.entries) CHECK(entry.train_acc >= a.chance_train - 0.02);
}
