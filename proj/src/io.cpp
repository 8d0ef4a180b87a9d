#include "calm/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace calm::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    return os;
}

}  // namespace

void write_matrix(std::ostream& os, const Matrix& m) {
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            // shortest representation that round-trips exactly
            auto res = std::to_chars(buf, buf + sizeof buf, m(i, j));
            os.write(buf, res.ptr - buf);
        }
        os << '\n';
    }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
    auto os = open_out(path);
    write_matrix(os, m);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

void write_matrix(const std::filesystem::path& path, const BinaryAdjacency& m) {
    auto os = open_out(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << m(i, j);
        }
        os << '\n';
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

Matrix read_matrix(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto first = cell.find_first_not_of(" \t");
            const auto last = cell.find_last_not_of(" \t");
            if (first == std::string::npos) throw std::runtime_error("empty cell in matrix row: " + line);
            const std::string tok = cell.substr(first, last - first + 1);
            double v = 0.0;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
                throw std::runtime_error("not a number: '" + tok + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged matrix: row " + std::to_string(rows.size() + 1));
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    try {
        return read_matrix(is);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

BinaryAdjacency read_binary(const std::filesystem::path& path) {
    return (read_matrix(path).array() != 0.0).cast<int>();
}

}  // namespace calm::io
