#include "stc/dimred.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "stc/errors.hpp"

namespace stc::dimred {
namespace {

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(Index a, Index b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

void require_connected(const SimilarityGraph& graph) {
  const Index comps = connected_components(graph.adjacency);
  if (comps != 1) {
    throw InputError("similarity graph has " + std::to_string(comps) +
                     " connected components; a connected graph is required "
                     "(raise graph_k or inspect the data)");
  }
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kAe: return "ae";
    case Method::kLsa: return "lsa";
    case Method::kLe: return "le";
    case Method::kLpi: return "lpi";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "ae") return Method::kAe;
  if (name == "lsa") return Method::kLsa;
  if (name == "le") return Method::kLe;
  if (name == "lpi") return Method::kLpi;
  throw ParameterError("unknown reduction method: " + name);
}

Index connected_components(const SpMat& adjacency) {
  const Index n = adjacency.rows();
  UnionFind uf(n);
  for (int c = 0; c < adjacency.outerSize(); ++c) {
    for (SpMat::InnerIterator it(adjacency, c); it; ++it) {
      if (it.value() != 0.0) uf.unite(it.row(), it.col());
    }
  }
  Index comps = 0;
  for (Index i = 0; i < n; ++i) {
    if (uf.find(i) == i) ++comps;
  }
  return comps;
}

ReducedCodes reduce_ae(const corpus::Corpus& corpus,
                       const embeddings::EmbeddingTable& table,
                       corpus::Weighting weighting) {
  const Index n = static_cast<Index>(corpus.documents.size());
  const Index d = static_cast<Index>(corpus.vocabulary.size());
  const Index dw = table.dim();

  corpus::TermMatrix x = term_matrix(corpus, weighting);

  Matrix word_vectors(dw, d);
  for (Index w = 0; w < d; ++w) {
    word_vectors.col(w) =
        table.lookup_or_init(corpus.vocab_words[static_cast<std::size_t>(w)]);
  }

  ReducedCodes codes;
  codes.method = Method::kAe;
  codes.q = dw;
  codes.y = Matrix::Zero(dw, n);
  for (Index j = 0; j < n; ++j) {
    Vector acc = Vector::Zero(dw);
    double total = 0.0;
    for (SpMat::InnerIterator it(x.matrix, j); it; ++it) {
      acc.noalias() += it.value() * word_vectors.col(it.row());
      total += it.value();
    }
    if (total > 0.0) {
      codes.y.col(j) = acc / total;
    } else {
      ++codes.zero_weight_documents;  // empty text or all-zero weights
    }
  }
  return codes;
}

ReducedCodes reduce_lsa(const corpus::TermMatrix& x, Index q,
                        const numerics::SolverOptions& opts) {
  numerics::SvdResult svd = numerics::svd_truncated(x.matrix, q, opts);
  ReducedCodes codes;
  codes.method = Method::kLsa;
  codes.q = q;
  codes.y = svd.left_vectors.transpose() * x.matrix;
  return codes;
}

SimilarityGraph build_graph(const corpus::TermMatrix& x, Index k, double sigma) {
  const Index n = x.matrix.cols();
  if (k < 1) throw ParameterError("build_graph: k must be >= 1");
  if (!(sigma > 0.0)) throw ParameterError("build_graph: sigma must be > 0");
  if (n < 2) throw InputError("build_graph: need at least 2 documents");

  // Distances are measured between unit-normalized columns so that the
  // default sigma keeps a comparable meaning across datasets.
  SpMat xn = x.matrix;
  Vector sq_norm(n);
  for (Index j = 0; j < n; ++j) {
    const double nrm = xn.col(j).norm();
    if (nrm > 0.0) {
      for (SpMat::InnerIterator it(xn, j); it; ++it) it.valueRef() /= nrm;
    }
    sq_norm[j] = nrm > 0.0 ? 1.0 : 0.0;
  }
  const SpMat xnt = xn.transpose();

  const Index kk = std::min<Index>(k, n - 1);
  std::vector<std::vector<std::pair<Index, double>>> neighbors(
      static_cast<std::size_t>(n));
  std::vector<std::pair<double, Index>> cand;
  for (Index j = 0; j < n; ++j) {
    const Vector xj = xn.col(j);
    const Vector sims = xnt * xj;
    cand.clear();
    cand.reserve(static_cast<std::size_t>(n - 1));
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double dist2 =
          std::max(0.0, sq_norm[i] + sq_norm[j] - 2.0 * sims[i]);
      cand.emplace_back(dist2, i);
    }
    std::partial_sort(cand.begin(), cand.begin() + kk, cand.end());
    auto& nb = neighbors[static_cast<std::size_t>(j)];
    for (Index t = 0; t < kk; ++t) {
      nb.emplace_back(cand[static_cast<std::size_t>(t)].second,
                      cand[static_cast<std::size_t>(t)].first);
    }
  }

  const double denom = 2.0 * sigma * sigma;
  std::vector<Triplet> trips;
  for (Index j = 0; j < n; ++j) {
    for (const auto& [i, dist2] : neighbors[static_cast<std::size_t>(j)]) {
      const double w = std::exp(-dist2 / denom);
      if (w == 0.0) continue;  // underflow: treat as no edge
      trips.emplace_back(i, j, w);
      trips.emplace_back(j, i, w);
    }
  }

  SimilarityGraph graph;
  graph.k_neighbors = k;
  graph.sigma = sigma;
  graph.normalized_columns = true;
  graph.adjacency.resize(n, n);
  // duplicate (i,j) entries carry the same weight; keep one
  graph.adjacency.setFromTriplets(trips.begin(), trips.end(),
                                  [](double a, double) { return a; });
  graph.degrees = Vector(graph.adjacency * Vector::Ones(n));
  for (Index i = 0; i < n; ++i) {
    if (!(graph.degrees[i] > 0.0)) {
      throw InputError("build_graph: vertex " + std::to_string(i) +
                       " has zero degree");
    }
  }
  SpMat dmat(n, n);
  std::vector<Triplet> dtrips;
  dtrips.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) dtrips.emplace_back(i, i, graph.degrees[i]);
  dmat.setFromTriplets(dtrips.begin(), dtrips.end());
  graph.laplacian = dmat - graph.adjacency;
  return graph;
}

ReducedCodes reduce_le(const SimilarityGraph& graph, Index q,
                       const numerics::SolverOptions& opts) {
  const Index n = graph.adjacency.rows();
  if (q < 1 || q >= n) {
    throw ParameterError("reduce_le: q=" + std::to_string(q) +
                         " must satisfy 1 <= q < n=" + std::to_string(n));
  }
  require_connected(graph);

  numerics::EigenResult eig =
      numerics::eig_sym_sparse_smallest(graph.laplacian, graph.degrees, q, opts);
  Index near_zero = 0;
  for (Index i = 0; i < eig.eigenvalues.size(); ++i) {
    if (std::abs(eig.eigenvalues[i]) <= 1e-9) ++near_zero;
  }
  if (near_zero != 1) {
    throw InputError("reduce_le: found " + std::to_string(near_zero) +
                     " near-zero eigenvalues; graph is numerically disconnected");
  }

  ReducedCodes codes;
  codes.method = Method::kLe;
  codes.q = q;
  codes.y = eig.eigenvectors.rightCols(q).transpose();  // drop the constant one
  return codes;
}

ReducedCodes reduce_lpi(const corpus::TermMatrix& x, const SimilarityGraph& graph,
                        Index q, const numerics::SolverOptions& opts) {
  const Index n = x.matrix.cols();
  if (graph.adjacency.rows() != n) {
    throw ShapeError("reduce_lpi: graph size does not match document count");
  }
  if (q < 1 || q >= n) {
    throw ParameterError("reduce_lpi: q=" + std::to_string(q) +
                         " must satisfy 1 <= q < n=" + std::to_string(n));
  }
  require_connected(graph);

  // X D X^T is singular whenever d > n; work inside the top singular
  // subspace of X and map the eigenvectors back afterwards.
  const Index t = std::min<Index>({x.matrix.rows(), n, 200});
  numerics::SvdResult svd = numerics::svd_truncated(x.matrix, t, opts);
  Index rank = 0;
  const double sigma_max = svd.singular_values.size() > 0 ? svd.singular_values[0] : 0.0;
  for (Index i = 0; i < svd.singular_values.size(); ++i) {
    if (svd.singular_values[i] > 1e-10 * sigma_max) ++rank;
  }
  if (rank < q) {
    throw ParameterError("reduce_lpi: q=" + std::to_string(q) +
                         " exceeds the effective rank after projection; at most " +
                         std::to_string(rank) + " dimensions are achievable");
  }
  const Matrix u = svd.left_vectors.leftCols(rank);
  const Matrix x_proj = u.transpose() * x.matrix;  // rank x n

  Matrix xlxt = x_proj * (graph.laplacian * x_proj.transpose());
  Matrix xdxt = x_proj * graph.degrees.asDiagonal() * x_proj.transpose();
  xlxt = 0.5 * (xlxt + xlxt.transpose()).eval();
  xdxt = 0.5 * (xdxt + xdxt.transpose()).eval();

  numerics::EigenResult eig = numerics::eig_generalized_sym(
      xlxt, xdxt, q, numerics::SpectrumSide::kSmallest);

  ReducedCodes codes;
  codes.method = Method::kLpi;
  codes.q = q;
  codes.mapping = u * eig.eigenvectors;        // d x q
  codes.y = eig.eigenvectors.transpose() * x_proj;  // = mapping^T X
  return codes;
}

BinaryCodes binarize_median(const ReducedCodes& codes) {
  const Index q = codes.y.rows();
  const Index n = codes.y.cols();
  if (n < 1) throw ParameterError("binarize_median: need at least one sample");

  BinaryCodes bc;
  bc.thresholds.resize(q);
  bc.b.resize(q, n);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Index i = 0; i < q; ++i) {
    for (Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = codes.y(i, j);
    std::sort(row.begin(), row.end());
    const std::size_t half = static_cast<std::size_t>(n) / 2;
    const double median = (n % 2 == 1)
                              ? row[half]
                              : 0.5 * (row[half - 1] + row[half]);
    bc.thresholds[i] = median;
    for (Index j = 0; j < n; ++j) {
      bc.b(i, j) = codes.y(i, j) > median ? 1 : 0;
    }
  }
  return bc;
}

}  // namespace stc::dimred
