#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oblv/config.hpp"
#include "oblv/io.hpp"
#include "oblv/rng.hpp"

using namespace oblv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("oblv_test_" + std::to_string(Rng(std::random_device{}()).next()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("binary embedding format round trips exactly") {
    TempDir tmp;
    const auto p = tmp.path / "m.bin";

    Matrix two(2, 1);
    two << 1.0, 2.0;
    write_embeddings_binary(p, two);
    Matrix back = read_embeddings(p);
    CHECK(back.rows() == 2);
    CHECK(back.cols() == 1);
    CHECK((back - two).norm() == 0.0);

    Rng rng(3);
    Matrix m = rng.normal_matrix(50, 8);
    write_embeddings_binary(p, m);
    CHECK((read_embeddings(p) - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csv embedding format round trips within 1e-15") {
    TempDir tmp;
    const auto p = tmp.path / "m.csv";
    Rng rng(5);
    Matrix m = rng.normal_matrix(50, 8);
    write_embeddings_csv(p, m);
    Matrix back = read_embeddings(p);
    CHECK((back - m).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("binary and csv inputs produce identical matrices") {
    TempDir tmp;
    Rng rng(7);
    Matrix m = rng.normal_matrix(20, 3);
    write_embeddings_binary(tmp.path / "m.bin", m);
    write_embeddings_csv(tmp.path / "m.csv", m);
    Matrix a = read_embeddings(tmp.path / "m.bin");
    Matrix b = read_embeddings(tmp.path / "m.csv");
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("embedding reader rejects malformed files") {
    TempDir tmp;

    {
        std::ofstream bad(tmp.path / "bad.bin", std::ios::binary);
        bad << "XXXX then some bytes";
    }
    CHECK_THROWS_WITH_AS(read_embeddings(tmp.path / "bad.bin"), doctest::Contains("BadMagic"),
                         Error);

    {
        std::ofstream trunc(tmp.path / "trunc.bin", std::ios::binary);
        trunc << "OBLV";
        const std::uint32_t version = 1;
        const std::uint64_t rows = 4, cols = 4;
        trunc.write(reinterpret_cast<const char*>(&version), sizeof version);
        trunc.write(reinterpret_cast<const char*>(&rows), sizeof rows);
        trunc.write(reinterpret_cast<const char*>(&cols), sizeof cols);
        const double one = 1.0;  // only one of sixteen payload values
        trunc.write(reinterpret_cast<const char*>(&one), sizeof one);
    }
    CHECK_THROWS_WITH_AS(read_embeddings(tmp.path / "trunc.bin"),
                         doctest::Contains("TruncatedFile"), Error);

    {
        std::ofstream ragged(tmp.path / "ragged.csv");
        ragged << "dim_0,dim_1\n1.0,2.0\n3.0\n";
    }
    CHECK_THROWS_WITH_AS(read_embeddings(tmp.path / "ragged.csv"), doctest::Contains("RaggedCsv"),
                         Error);

    {
        std::ofstream header(tmp.path / "header.csv");
        header << "dim_0,weird\n1.0,2.0\n";
    }
    CHECK_THROWS_WITH_AS(read_embeddings(tmp.path / "header.csv"), doctest::Contains("RaggedCsv"),
                         Error);
}

TEST_CASE("labels: dense remap in sorted order with mapping") {
    TempDir tmp;
    {
        std::ofstream f(tmp.path / "one.csv");
        f << "label\n3\n";
    }
    LabelColumn one = read_labels(tmp.path / "one.csv");
    CHECK(one.values == std::vector<int>{0});
    CHECK(one.classes == 1);
    CHECK(one.mapping.at(3) == 0);

    {
        std::ofstream f(tmp.path / "mixed.csv");
        f << "label\n5\n5\n7\n";
    }
    LabelColumn mixed = read_labels(tmp.path / "mixed.csv");
    CHECK(mixed.values == std::vector<int>{0, 0, 1});
    CHECK(mixed.classes == 2);

    {
        std::ofstream f(tmp.path / "bad.csv");
        f << "label\nabc\n";
    }
    CHECK_THROWS_WITH_AS(read_labels(tmp.path / "bad.csv"), doctest::Contains("NonIntegerLabel"),
                         Error);

    {
        std::ofstream f(tmp.path / "neg.csv");
        f << "label\n-2\n";
    }
    CHECK_THROWS_WITH_AS(read_labels(tmp.path / "neg.csv"), doctest::Contains("NonIntegerLabel"),
                         Error);

    // write + read round trip
    write_labels(tmp.path / "rt.csv", {0, 1, 2, 1});
    CHECK(read_labels(tmp.path / "rt.csv").values == std::vector<int>{0, 1, 2, 1});
}

TEST_CASE("run config: defaults, strict schema, mode validation") {
    nlohmann::json doc = {
        {"dataset", {{"x", "x.bin"}, {"s", "s.csv"}, {"y", "y.csv"}}},
        {"output_dir", "out"},
        {"mode", "supervised"},
        {"seed", 9},
    };
    RunConfig cfg = parse_run_config(doc);
    CHECK(cfg.erasure.seed == 9);
    CHECK(cfg.erasure.encoder_iterations_first == 30);
    CHECK(cfg.erasure.encoder_iterations_later == 25);
    CHECK(cfg.erasure.learning_rate == doctest::Approx(5e-4));
    CHECK(cfg.erasure.weight_decay == doctest::Approx(1e-3));
    CHECK(cfg.erasure.encoder_weights.tau_y == doctest::Approx(4.0));
    CHECK(cfg.erasure.evp_weights.tau_y == doctest::Approx(3.0));
    CHECK(cfg.erasure.eig_threshold == doctest::Approx(1e-4));
    CHECK(cfg.erasure.rff.first == 2500);
    CHECK(cfg.erasure.rff.later == 1500);
    CHECK(cfg.evaluator.probes.kernel.grid.size() == 7);

    nlohmann::json bad = doc;
    bad["learnig_rate"] = 0.1;  // typo must be rejected
    CHECK_THROWS_WITH_AS(parse_run_config(bad), doctest::Contains("unknown key"), Error);

    nlohmann::json bad2 = doc;
    bad2["encoder"] = {{"iterations_frist", 10}};
    CHECK_THROWS_WITH_AS(parse_run_config(bad2), doctest::Contains("unknown key"), Error);

    nlohmann::json bad3 = doc;
    bad3["mode"] = "sideways";
    CHECK_THROWS_WITH_AS(parse_run_config(bad3), doctest::Contains("mode"), Error);

    // round trip through the manifest view
    RunConfig again = parse_run_config(run_config_to_json(cfg));
    CHECK(again.erasure.seed == cfg.erasure.seed);
    CHECK(again.erasure.rff.first == cfg.erasure.rff.first);
    CHECK(again.evaluator.probes.kernel.grid == cfg.evaluator.probes.kernel.grid);
}
