#include "stc/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "stc/errors.hpp"
#include "stc/rng.hpp"

namespace stc::embeddings {

void EmbeddingTable::insert(const std::string& word, Vector v) {
  if (v.size() != dim_) {
    throw InputError("embedding for '" + word + "' has dimension " +
                     std::to_string(v.size()) + ", table expects " +
                     std::to_string(dim_));
  }
  auto [it, inserted] = vectors_.insert_or_assign(word, std::move(v));
  (void)it;
  if (!inserted) ++duplicates_;
}

const Vector& EmbeddingTable::lookup_or_init(const std::string& word) const {
  if (auto it = vectors_.find(word); it != vectors_.end()) return it->second;
  if (auto it = oov_cache_.find(word); it != oov_cache_.end()) return it->second;
  Rng rng(splitmix64(oov_seed_ ^ fnv1a64(word)));
  Vector v(dim_);
  for (Index i = 0; i < dim_; ++i) v[i] = rng.uniform(-0.25, 0.25);
  return oov_cache_.emplace(word, std::move(v)).first->second;
}

EmbeddingTable load_embeddings(const std::string& path, Index expected_dim,
                               std::uint64_t oov_seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("embedding file is empty: " + path);
  }
  long long count = 0, dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> count >> dim) || count < 0 || dim <= 0) {
      throw ParseError("parse error at line 1: expected \"<count> <dim>\" header");
    }
  }
  if (expected_dim > 0 && dim != expected_dim) {
    throw InputError("embedding dimension " + std::to_string(dim) +
                     " does not match expected " + std::to_string(expected_dim));
  }

  EmbeddingTable table(static_cast<Index>(dim), oov_seed);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string word;
    if (!(row >> word)) {
      throw ParseError("parse error at line " + std::to_string(line_no) +
                       ": missing word");
    }
    Vector v(static_cast<Index>(dim));
    for (long long i = 0; i < dim; ++i) {
      if (!(row >> v[static_cast<Index>(i)])) {
        throw ParseError("parse error at line " + std::to_string(line_no) +
                         ": expected " + std::to_string(dim) +
                         " values for word '" + word + "'");
      }
    }
    double extra;
    if (row >> extra) {
      throw ParseError("parse error at line " + std::to_string(line_no) +
                       ": more than " + std::to_string(dim) +
                       " values for word '" + word + "'");
    }
    table.insert(word, std::move(v));
  }
  return table;
}

Coverage coverage(const EmbeddingTable& table, const corpus::Corpus& corpus) {
  Coverage cov;
  cov.vocab_total = static_cast<Index>(corpus.vocabulary.size());
  for (const std::string& word : corpus.vocab_words) {
    if (table.contains(word)) ++cov.vocab_covered;
  }
  for (const corpus::Document& doc : corpus.documents) {
    for (const std::string& tok : doc.tokens) {
      ++cov.tokens_total;
      if (table.contains(tok)) ++cov.tokens_covered;
    }
  }
  cov.vocab_fraction = cov.vocab_total == 0
                           ? 0.0
                           : static_cast<double>(cov.vocab_covered) /
                                 static_cast<double>(cov.vocab_total);
  cov.token_fraction = cov.tokens_total == 0
                           ? 0.0
                           : static_cast<double>(cov.tokens_covered) /
                                 static_cast<double>(cov.tokens_total);
  return cov;
}

SentenceMatrix sentence_matrix(const EmbeddingTable& table,
                               const std::vector<std::string>& tokens, Index s) {
  if (s < 1) throw ParameterError("sentence_matrix: s must be >= 1");
  SentenceMatrix sm;
  sm.matrix = Matrix::Zero(table.dim(), s);
  sm.true_length = std::min<Index>(static_cast<Index>(tokens.size()), s);
  for (Index j = 0; j < sm.true_length; ++j) {
    sm.matrix.col(j) = table.lookup_or_init(tokens[static_cast<std::size_t>(j)]);
  }
  return sm;
}

}  // namespace stc::embeddings
