#pragma once

#include "calm/types.hpp"

#include <filesystem>
#include <iosfwd>

namespace calm::io {

// Delimited text: one row per line, comma-separated, full precision.

void write_matrix(std::ostream& os, const Matrix& m);
void write_matrix(const std::filesystem::path& path, const Matrix& m);
void write_matrix(const std::filesystem::path& path, const BinaryAdjacency& m);

Matrix read_matrix(std::istream& is);
Matrix read_matrix(const std::filesystem::path& path);

/// Reads a 0/1 matrix; any nonzero entry becomes 1.
BinaryAdjacency read_binary(const std::filesystem::path& path);

}  // namespace calm::io
