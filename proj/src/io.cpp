#include "oblv/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "oblv/metrics.hpp"

static_assert(std::endian::native == std::endian::little,
              "the binary embedding format assumes a little-endian host");

namespace oblv {

namespace {

constexpr char kMagic[4] = {'O', 'B', 'L', 'V'};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

Matrix read_embeddings_csv(std::ifstream& in, const std::string& path) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::RaggedCsv,
            path + ": empty CSV");
    const auto header = split_csv_line(line);
    for (std::size_t j = 0; j < header.size(); ++j)
        require(header[j] == "dim_" + std::to_string(j), ErrorCode::RaggedCsv,
                path + ": header cell " + std::to_string(j) + " is '" + header[j] +
                    "', expected dim_" + std::to_string(j));
    const std::size_t cols = header.size();

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        require(cells.size() == cols, ErrorCode::RaggedCsv,
                path + ": row " + std::to_string(rows + 1) + " has " +
                    std::to_string(cells.size()) + " cells, expected " + std::to_string(cols));
        for (const auto& cell : cells) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (...) {
                fail(ErrorCode::RaggedCsv, path + ": unparseable value '" + cell + "'");
            }
            require(used == cell.size(), ErrorCode::RaggedCsv,
                    path + ": unparseable value '" + cell + "'");
            values.push_back(v);
        }
        ++rows;
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Index>(i), static_cast<Index>(j)) = values[i * cols + j];
    return m;
}

}  // namespace

Matrix read_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.is_open(), ErrorCode::TruncatedFile, path.string() + ": cannot open");

    char head[5] = {0, 0, 0, 0, 0};
    in.read(head, 5);
    const auto got = in.gcount();
    if (got >= 4 && std::memcmp(head, kMagic, 4) == 0) {
        in.clear();
        in.seekg(4);
        std::uint32_t version = 0;
        std::uint64_t rows = 0, cols = 0;
        in.read(reinterpret_cast<char*>(&version), sizeof version);
        in.read(reinterpret_cast<char*>(&rows), sizeof rows);
        in.read(reinterpret_cast<char*>(&cols), sizeof cols);
        require(static_cast<bool>(in), ErrorCode::TruncatedFile,
                path.string() + ": truncated header");
        require(version == 1, ErrorCode::BadMagic,
                path.string() + ": unsupported version " + std::to_string(version));
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        RowMajor m(static_cast<Index>(rows), static_cast<Index>(cols));
        const auto bytes = static_cast<std::streamsize>(rows * cols * sizeof(double));
        in.read(reinterpret_cast<char*>(m.data()), bytes);
        require(in.gcount() == bytes, ErrorCode::TruncatedFile,
                path.string() + ": payload holds " + std::to_string(in.gcount()) +
                    " bytes, expected " + std::to_string(bytes));
        return Matrix(m);
    }

    // CSV mode: the first line must be a dim_* header
    std::string start(head, static_cast<std::size_t>(got));
    if (start.rfind("dim_0", 0) != 0)
        fail(ErrorCode::BadMagic, path.string() + ": neither OBLV binary nor dim_* CSV");
    in.clear();
    in.seekg(0);
    return read_embeddings_csv(in, path.string());
}

void write_embeddings_binary(const std::filesystem::path& path,
                             const Eigen::Ref<const Matrix>& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.is_open(), ErrorCode::TruncatedFile, path.string() + ": cannot open for write");
    out.write(kMagic, 4);
    const std::uint32_t version = 1;
    const auto rows = static_cast<std::uint64_t>(m.rows());
    const auto cols = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor rm = m;
    out.write(reinterpret_cast<const char*>(rm.data()),
              static_cast<std::streamsize>(rows * cols * sizeof(double)));
    require(static_cast<bool>(out), ErrorCode::TruncatedFile, path.string() + ": write failed");
}

void write_embeddings_csv(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m) {
    std::ofstream out(path, std::ios::trunc);
    require(out.is_open(), ErrorCode::TruncatedFile, path.string() + ": cannot open for write");
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << "dim_" << j;
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
    require(static_cast<bool>(out), ErrorCode::TruncatedFile, path.string() + ": write failed");
}

LabelColumn read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.is_open(), ErrorCode::TruncatedFile, path.string() + ": cannot open");
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::RaggedCsv,
            path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == "label", ErrorCode::RaggedCsv,
            path.string() + ": expected header 'label', got '" + line + "'");

    std::vector<long> raw;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(line, &used);
        } catch (...) {
            fail(ErrorCode::NonIntegerLabel, path.string() + ": '" + line + "'");
        }
        require(used == line.size() && v >= 0, ErrorCode::NonIntegerLabel,
                path.string() + ": '" + line + "'");
        raw.push_back(v);
    }

    LabelColumn out;
    for (long v : raw) out.mapping.emplace(v, 0);
    int next = 0;
    for (auto& [orig, dense] : out.mapping) dense = next++;  // sorted order
    out.classes = next;
    out.values.reserve(raw.size());
    for (long v : raw) out.values.push_back(out.mapping.at(v));
    return out;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::trunc);
    require(out.is_open(), ErrorCode::TruncatedFile, path.string() + ": cannot open for write");
    out << "label\n";
    for (int v : labels) out << v << '\n';
    require(static_cast<bool>(out), ErrorCode::TruncatedFile, path.string() + ": write failed");
}

}  // namespace oblv
