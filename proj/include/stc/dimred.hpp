#pragma once

#include <optional>
#include <string>

#include "stc/corpus.hpp"
#include "stc/embeddings.hpp"
#include "stc/numerics.hpp"
#include "stc/types.hpp"

namespace stc::dimred {

enum class Method { kAe, kLsa, kLe, kLpi };

std::string method_name(Method m);
Method parse_method(const std::string& name);

/// q x n latent codes. `mapping` (d x q) is present only for LPI, where
/// Y = mapping^T X extends to unseen columns.
struct ReducedCodes {
  Matrix y;
  Method method = Method::kAe;
  Index q = 0;
  std::optional<Matrix> mapping;
  Index zero_weight_documents = 0;  // AE columns with no usable weight
};

/// Per-dimension median thresholds; bit = 1 iff the value is strictly
/// greater than its row threshold.
struct BinaryCodes {
  BitMatrix b;        // q x n
  Vector thresholds;  // length q
};

/// Symmetric kNN heat-kernel graph over document columns plus its Laplacian.
struct SimilarityGraph {
  SpMat adjacency;  // zero diagonal, exactly symmetric
  Vector degrees;
  SpMat laplacian;  // diag(degrees) - adjacency
  Index k_neighbors = 0;
  double sigma = 1.0;
  bool normalized_columns = true;
};

/// Weighted average of word embeddings per document; q = embedding dim.
ReducedCodes reduce_ae(const corpus::Corpus& corpus,
                       const embeddings::EmbeddingTable& table,
                       corpus::Weighting weighting);

/// Y = U_q^T X from the truncated SVD of the term matrix.
ReducedCodes reduce_lsa(const corpus::TermMatrix& x, Index q,
                        const numerics::SolverOptions& opts = {});

/// A_ij = exp(-||x_i - x_j||^2 / 2 sigma^2) over the union of kNN relations;
/// distances are taken between unit-normalized columns.
SimilarityGraph build_graph(const corpus::TermMatrix& x, Index k, double sigma);

/// Rows of Y = generalized eigenvectors of L v = lambda D v for the q
/// smallest nonzero eigenvalues; the constant eigenvector is dropped.
ReducedCodes reduce_le(const SimilarityGraph& graph, Index q,
                       const numerics::SolverOptions& opts = {});

/// Solves X L X^T a = lambda X D X^T a inside the top singular subspace of X
/// and keeps the linear map W for unseen columns.
ReducedCodes reduce_lpi(const corpus::TermMatrix& x, const SimilarityGraph& graph,
                        Index q, const numerics::SolverOptions& opts = {});

BinaryCodes binarize_median(const ReducedCodes& codes);

Index connected_components(const SpMat& adjacency);

}  // namespace stc::dimred
