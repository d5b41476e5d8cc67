#pragma once

#include <cstdint>
#include <string>

#include "stc/types.hpp"

namespace stc::io {

/// Matrix text interchange: "<rows> <cols>" header, then one row per line of
/// space-separated decimals printed with enough digits to round-trip exactly.
void write_matrix_text(const std::string& path, const Matrix& m);
Matrix read_matrix_text(const std::string& path);

/// Bit matrix: same header, then rows of '0'/'1' characters.
void write_bit_matrix(const std::string& path, const BitMatrix& b);
BitMatrix read_bit_matrix(const std::string& path);

/// Sparse text: "<rows> <cols> <nnz>" header, then "row col value" lines.
void write_sparse_text(const std::string& path, const SpMat& m);
SpMat read_sparse_text(const std::string& path);

/// FNV-1a over the file bytes, as fixed-width hex.
std::uint64_t file_hash(const std::string& path);
std::string hash_hex(std::uint64_t h);

bool file_exists(const std::string& path);

}  // namespace stc::io
