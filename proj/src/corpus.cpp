#include "stc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include "stc/errors.hpp"
#include "stc/rng.hpp"

namespace stc::corpus {
namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

CorpusStats Corpus::stats() const {
  CorpusStats s;
  s.num_documents = static_cast<Index>(documents.size());
  s.vocab_size = static_cast<Index>(vocabulary.size());
  std::size_t total = 0;
  for (const Document& d : documents) {
    total += d.tokens.size();
    s.max_length = std::max<Index>(s.max_length, static_cast<Index>(d.tokens.size()));
  }
  s.mean_length = s.num_documents == 0
                      ? 0.0
                      : static_cast<double>(total) / static_cast<double>(s.num_documents);
  return s;
}

std::vector<int> Corpus::labels() const {
  std::vector<int> out;
  out.reserve(documents.size());
  for (const Document& d : documents) out.push_back(d.label);
  return out;
}

std::vector<std::string> tokenize(std::string_view raw, TokenizeMode mode) {
  std::string cleaned;
  if (mode == TokenizeMode::kLowercaseStrip) {
    cleaned.reserve(raw.size());
    for (unsigned char c : raw) {
      if (std::isalpha(c)) {
        cleaned.push_back(static_cast<char>(std::tolower(c)));
      } else if (std::isdigit(c) || std::isspace(c)) {
        cleaned.push_back(static_cast<char>(c));
      }
      // anything else (symbols, non-ASCII bytes) is dropped
    }
    raw = cleaned;
  }
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    std::size_t start = i;
    while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    if (i > start) tokens.emplace_back(raw.substr(start, i - start));
  }
  return tokens;
}

Corpus load_dataset(const std::string& text_path, const std::string& label_path,
                    TokenizeMode mode) {
  std::vector<std::string> texts = read_lines(text_path);
  std::vector<std::string> labels = read_lines(label_path);
  if (texts.size() != labels.size()) {
    throw InputError("line-count mismatch: " + text_path + " has " +
                     std::to_string(texts.size()) + " lines, " + label_path +
                     " has " + std::to_string(labels.size()));
  }

  Corpus corpus;
  corpus.documents.reserve(texts.size());
  std::unordered_map<std::string, int> label_ids;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Document doc;
    doc.id = static_cast<Index>(i);
    doc.tokens = tokenize(texts[i], mode);
    std::string label_token;
    for (char c : labels[i]) {
      if (!std::isspace(static_cast<unsigned char>(c))) label_token.push_back(c);
    }
    auto [it, inserted] =
        label_ids.emplace(label_token, static_cast<int>(label_ids.size()));
    if (inserted) corpus.label_names.push_back(label_token);
    doc.label = it->second;
    for (const std::string& tok : doc.tokens) {
      auto [vit, vin] = corpus.vocabulary.emplace(
          tok, static_cast<Index>(corpus.vocabulary.size()));
      if (vin) corpus.vocab_words.push_back(tok);
    }
    corpus.documents.push_back(std::move(doc));
  }
  corpus.num_classes = static_cast<int>(label_ids.size());
  return corpus;
}

TermMatrix term_matrix(const Corpus& corpus, Weighting weighting) {
  const Index d = static_cast<Index>(corpus.vocabulary.size());
  const Index n = static_cast<Index>(corpus.documents.size());

  std::vector<Index> doc_freq(static_cast<std::size_t>(d), 0);
  std::vector<Triplet> trips;
  std::vector<std::pair<Index, double>> counts;  // per-document scratch
  std::unordered_map<Index, double> local;

  // first pass: document frequencies
  for (const Document& doc : corpus.documents) {
    local.clear();
    for (const std::string& tok : doc.tokens) {
      local[corpus.vocabulary.at(tok)] += 1.0;
    }
    for (const auto& [word, cnt] : local) {
      (void)cnt;
      ++doc_freq[static_cast<std::size_t>(word)];
    }
  }

  for (const Document& doc : corpus.documents) {
    local.clear();
    for (const std::string& tok : doc.tokens) {
      local[corpus.vocabulary.at(tok)] += 1.0;
    }
    counts.assign(local.begin(), local.end());
    std::sort(counts.begin(), counts.end());
    for (const auto& [word, tf] : counts) {
      double value = tf;
      if (weighting == Weighting::kTfIdf) {
        const double idf = std::log(static_cast<double>(n) /
                                    static_cast<double>(doc_freq[static_cast<std::size_t>(word)]));
        value = tf * idf;
      }
      if (value != 0.0) trips.emplace_back(word, doc.id, value);
    }
  }

  TermMatrix tm;
  tm.weighting = weighting;
  tm.matrix.resize(d, n);
  tm.matrix.setFromTriplets(trips.begin(), trips.end());
  return tm;
}

std::pair<std::vector<Index>, std::vector<Index>> dev_split(Index n,
                                                            double fraction,
                                                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ParameterError("dev_split: fraction must lie in (0, 1)");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto dev_size =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
  std::vector<Index> dev(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(dev_size));
  std::vector<Index> train(order.begin() + static_cast<std::ptrdiff_t>(dev_size), order.end());
  std::sort(train.begin(), train.end());
  std::sort(dev.begin(), dev.end());
  return {train, dev};
}

std::pair<std::vector<Index>, std::vector<Index>> dev_split(const Corpus& corpus,
                                                            double fraction,
                                                            std::uint64_t seed) {
  return dev_split(static_cast<Index>(corpus.documents.size()), fraction, seed);
}

}  // namespace stc::corpus
