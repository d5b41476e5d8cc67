#include "stc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "stc/errors.hpp"
#include "stc/rng.hpp"

namespace stc::io {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  return in;
}

}  // namespace

void write_matrix_text(const std::string& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed while writing: " + path);
}

Matrix read_matrix_text(const std::string& path) {
  std::ifstream in = open_in(path);
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw ParseError("bad matrix header in " + path);
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) {
        throw ParseError("truncated matrix data in " + path);
      }
    }
  }
  return m;
}

void write_bit_matrix(const std::string& path, const BitMatrix& b) {
  std::ofstream out = open_out(path);
  out << b.rows() << ' ' << b.cols() << '\n';
  for (Index i = 0; i < b.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      out << (b(i, j) ? '1' : '0');
    }
    out << '\n';
  }
  if (!out) throw IoError("failed while writing: " + path);
}

BitMatrix read_bit_matrix(const std::string& path) {
  std::ifstream in = open_in(path);
  Index rows = 0, cols = 0;
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty bit matrix file: " + path);
  {
    std::istringstream hs(header);
    if (!(hs >> rows >> cols) || rows < 0 || cols < 0) {
      throw ParseError("bad bit matrix header in " + path);
    }
  }
  BitMatrix b(rows, cols);
  std::string line;
  for (Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw ParseError("truncated bit matrix in " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<Index>(line.size()) != cols) {
      throw ParseError("bit row " + std::to_string(i) + " has wrong length in " + path);
    }
    for (Index j = 0; j < cols; ++j) {
      const char c = line[static_cast<std::size_t>(j)];
      if (c != '0' && c != '1') {
        throw ParseError("bit row " + std::to_string(i) + " has non-bit character in " + path);
      }
      b(i, j) = c == '1' ? 1 : 0;
    }
  }
  return b;
}

void write_sparse_text(const std::string& path, const SpMat& m) {
  std::ofstream out = open_out(path);
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SpMat::InnerIterator it(m, c); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    }
  }
  if (!out) throw IoError("failed while writing: " + path);
}

SpMat read_sparse_text(const std::string& path) {
  std::ifstream in = open_in(path);
  Index rows = 0, cols = 0;
  std::size_t nnz = 0;
  if (!(in >> rows >> cols >> nnz)) {
    throw ParseError("bad sparse matrix header in " + path);
  }
  std::vector<Triplet> trips;
  trips.reserve(nnz);
  for (std::size_t t = 0; t < nnz; ++t) {
    Index i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) {
      throw ParseError("truncated sparse matrix data in " + path);
    }
    trips.emplace_back(i, j, v);
  }
  SpMat m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in = open_in(path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(got)), h);
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool file_exists(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return static_cast<bool>(in);
}

}  // namespace stc::io
