#include "stc/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stc/errors.hpp"
#include "stc/rng.hpp"

namespace stc::cluster {
namespace {

Vector column_sq_norms(const Matrix& m) {
  return m.colwise().squaredNorm().transpose();
}

// Nearest centroid per column, ties to the lowest centroid index.
void assign_nearest(const Matrix& f, const Vector& f_sq, const Matrix& centroids,
                    std::vector<int>& labels) {
  const Index n = f.cols();
  const Index k = centroids.cols();
  const Vector c_sq = column_sq_norms(centroids);
  const Matrix dots = centroids.transpose() * f;  // k x n
  for (Index j = 0; j < n; ++j) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < k; ++c) {
      const double d = f_sq[j] + c_sq[c] - 2.0 * dots(c, j);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(j)] = best;
  }
}

double objective_of(const Matrix& f, const Matrix& centroids,
                    const std::vector<int>& labels) {
  double obj = 0.0;
  for (Index j = 0; j < f.cols(); ++j) {
    obj += (f.col(j) - centroids.col(labels[static_cast<std::size_t>(j)]))
               .squaredNorm();
  }
  return obj;
}

// Re-seed empty centroids at the point farthest from its current centroid,
// drawn from clusters that keep at least one member.
void fix_empty_clusters(const Matrix& f, Matrix& centroids,
                        std::vector<int>& labels) {
  const Index n = f.cols();
  const Index k = centroids.cols();
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  for (Index c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    Index farthest = -1;
    double far_d = 0.0;
    for (Index j = 0; j < n; ++j) {
      const int owner = labels[static_cast<std::size_t>(j)];
      if (counts[static_cast<std::size_t>(owner)] <= 1) continue;
      const double d = (f.col(j) - centroids.col(owner)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        farthest = j;
      }
    }
    if (farthest < 0) continue;  // no donor cluster; degenerate data
    const int old = labels[static_cast<std::size_t>(farthest)];
    centroids.col(c) = f.col(farthest);
    labels[static_cast<std::size_t>(farthest)] = static_cast<int>(c);
    --counts[static_cast<std::size_t>(old)];
    ++counts[static_cast<std::size_t>(c)];
  }
}

Matrix seed_centroids(const Matrix& f, Index k, bool plus_plus, Rng& rng) {
  const Index n = f.cols();
  Matrix centroids(f.rows(), k);
  if (!plus_plus) {
    // uniform draw of k distinct columns
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    for (Index c = 0; c < k; ++c) {
      const Index pick =
          c + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - c)));
      std::swap(order[static_cast<std::size_t>(c)], order[static_cast<std::size_t>(pick)]);
      centroids.col(c) = f.col(order[static_cast<std::size_t>(c)]);
    }
    return centroids;
  }
  // k-means++: distance-proportional draws
  centroids.col(0) = f.col(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector dist2(n);
  for (Index j = 0; j < n; ++j) {
    dist2[j] = (f.col(j) - centroids.col(0)).squaredNorm();
  }
  for (Index c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Index pick = 0;
    if (total > 0.0) {
      double r = rng.uniform01() * total;
      for (Index j = 0; j < n; ++j) {
        r -= dist2[j];
        if (r <= 0.0) {
          pick = j;
          break;
        }
        pick = j;
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centroids.col(c) = f.col(pick);
    for (Index j = 0; j < n; ++j) {
      dist2[j] = std::min(dist2[j], (f.col(j) - centroids.col(c)).squaredNorm());
    }
  }
  return centroids;
}

}  // namespace

Matrix normalize_columns(const Matrix& f, Index* zero_columns) {
  Matrix out = f;
  Index zeros = 0;
  for (Index j = 0; j < out.cols(); ++j) {
    const double nrm = out.col(j).norm();
    if (nrm > 0.0) {
      out.col(j) /= nrm;
    } else {
      ++zeros;
    }
  }
  if (zero_columns) *zero_columns = zeros;
  return out;
}

ClusterAssignment kmeans_once(const Matrix& f, const KMeansConfig& config,
                              std::uint64_t restart_seed, Index restart_id) {
  const Index n = f.cols();
  const Index k = config.k;
  if (k < 1 || k > n) {
    throw ParameterError("kmeans: k=" + std::to_string(k) +
                         " must satisfy 1 <= k <= n=" + std::to_string(n));
  }

  Rng rng(restart_seed);
  ClusterAssignment result;
  result.restart_id = restart_id;
  result.centroids = seed_centroids(f, k, config.plus_plus_seeding, rng);
  result.labels.assign(static_cast<std::size_t>(n), 0);

  const Vector f_sq = column_sq_norms(f);
  std::vector<int> prev_labels;
  double prev_obj = std::numeric_limits<double>::infinity();

  for (Index iter = 0; iter < config.max_iters; ++iter) {
    assign_nearest(f, f_sq, result.centroids, result.labels);
    fix_empty_clusters(f, result.centroids, result.labels);
    const double obj = objective_of(f, result.centroids, result.labels);
    result.objective_history.push_back(obj);
    result.objective = obj;

    if (result.labels == prev_labels) break;  // exact Lloyd fixed point
    const bool tol_hit =
        iter > 0 && std::abs(prev_obj - obj) <= config.tol * std::max(prev_obj, 1e-300);
    prev_labels = result.labels;
    prev_obj = obj;

    // centroid update: mean of members (every cluster nonempty here)
    Matrix sums = Matrix::Zero(f.rows(), k);
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index j = 0; j < n; ++j) {
      const int c = result.labels[static_cast<std::size_t>(j)];
      sums.col(c) += f.col(j);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        result.centroids.col(c) =
            sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }

    if (tol_hit) {
      // sync labels with the refreshed centroids before stopping
      assign_nearest(f, f_sq, result.centroids, result.labels);
      const double final_obj = objective_of(f, result.centroids, result.labels);
      result.objective_history.push_back(final_obj);
      result.objective = final_obj;
      break;
    }
  }
  return result;
}

ClusterAssignment kmeans_restarts(const Matrix& f, const KMeansConfig& config) {
  if (config.restarts < 1) {
    throw ParameterError("kmeans: restarts must be >= 1");
  }
  ClusterAssignment best;
  bool have = false;
  for (Index r = 0; r < config.restarts; ++r) {
    const std::uint64_t seed =
        derive_seed(config.seed, "kmeans_restart", static_cast<std::uint64_t>(r));
    ClusterAssignment cur = kmeans_once(f, config, seed, r);
    if (!have || cur.objective < best.objective) {
      best = std::move(cur);
      have = true;
    }
  }
  return best;
}

}  // namespace stc::cluster
