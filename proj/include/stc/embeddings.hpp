#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "stc/corpus.hpp"
#include "stc/types.hpp"

namespace stc::embeddings {

struct Coverage {
  Index vocab_covered = 0;
  Index vocab_total = 0;
  Index tokens_covered = 0;
  Index tokens_total = 0;
  double vocab_fraction = 0.0;
  double token_fraction = 0.0;
};

/// Word -> vector map of a fixed dimension. Unknown words get a cached,
/// deterministic uniform [-0.25, 0.25] vector seeded by (oov_seed, word).
class EmbeddingTable {
 public:
  EmbeddingTable(Index dim, std::uint64_t oov_seed)
      : dim_(dim), oov_seed_(oov_seed) {}

  Index dim() const { return dim_; }
  Index size() const { return static_cast<Index>(vectors_.size()); }
  Index duplicates() const { return duplicates_; }
  std::uint64_t oov_seed() const { return oov_seed_; }
  bool contains(const std::string& word) const {
    return vectors_.count(word) > 0;
  }

  void insert(const std::string& word, Vector v);
  const Vector& lookup_or_init(const std::string& word) const;
  Index oov_cache_size() const { return static_cast<Index>(oov_cache_.size()); }

 private:
  Index dim_;
  std::uint64_t oov_seed_;
  Index duplicates_ = 0;
  std::unordered_map<std::string, Vector> vectors_;
  mutable std::unordered_map<std::string, Vector> oov_cache_;

  friend EmbeddingTable load_embeddings(const std::string&, Index, std::uint64_t);
};

/// Text format: header "<count> <dim>", then "<word> <v1> ... <v_dim>" per
/// line, single-space separated, LF endings. Duplicate words: last one wins.
EmbeddingTable load_embeddings(const std::string& path, Index expected_dim,
                               std::uint64_t oov_seed = 0);

Coverage coverage(const EmbeddingTable& table, const corpus::Corpus& corpus);

struct SentenceMatrix {
  Matrix matrix;  // dim x s, zero columns past true_length
  Index true_length = 0;
};

/// Column j holds the embedding of token j; tokens past s are truncated and
/// the remaining columns stay zero.
SentenceMatrix sentence_matrix(const EmbeddingTable& table,
                               const std::vector<std::string>& tokens, Index s);

}  // namespace stc::embeddings
