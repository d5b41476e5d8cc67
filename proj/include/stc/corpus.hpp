#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stc/types.hpp"

namespace stc::corpus {

enum class TokenizeMode {
  kVerbatim,        // whitespace split only; symbols and case preserved
  kLowercaseStrip,  // lowercase, drop non-alphanumerics, then split
};

struct Document {
  Index id = 0;
  std::vector<std::string> tokens;
  int label = 0;  // dense ordinal in [0, num_classes)
};

struct CorpusStats {
  Index num_documents = 0;
  double mean_length = 0.0;
  Index max_length = 0;
  Index vocab_size = 0;
};

struct Corpus {
  std::vector<Document> documents;
  std::unordered_map<std::string, Index> vocabulary;  // first-occurrence ids
  std::vector<std::string> vocab_words;               // id -> word
  std::vector<std::string> label_names;               // ordinal -> raw label
  int num_classes = 0;

  CorpusStats stats() const;
  std::vector<int> labels() const;
};

std::vector<std::string> tokenize(std::string_view raw, TokenizeMode mode);

/// One document per line in `text_path`, one label token per line in
/// `label_path`; labels are re-indexed to dense ordinals by first occurrence.
/// Empty lines stay in as zero-token documents.
Corpus load_dataset(const std::string& text_path, const std::string& label_path,
                    TokenizeMode mode = TokenizeMode::kVerbatim);

enum class Weighting { kTf, kTfIdf };

/// Terms x documents matrix. TF is the raw in-document count; TF-IDF scales
/// it by ln(n / df), so corpus-wide words weigh exactly zero.
struct TermMatrix {
  SpMat matrix;
  Weighting weighting = Weighting::kTf;
};

TermMatrix term_matrix(const Corpus& corpus, Weighting weighting);

/// Deterministic disjoint (train, dev) index split; dev gets floor(n * fraction).
std::pair<std::vector<Index>, std::vector<Index>> dev_split(Index n,
                                                            double fraction,
                                                            std::uint64_t seed);
std::pair<std::vector<Index>, std::vector<Index>> dev_split(const Corpus& corpus,
                                                            double fraction,
                                                            std::uint64_t seed);

}  // namespace stc::corpus
