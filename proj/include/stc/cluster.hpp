#pragma once

#include <cstdint>
#include <vector>

#include "stc/types.hpp"

namespace stc::cluster {

struct KMeansConfig {
  Index k = 0;
  Index restarts = 100;
  Index max_iters = 300;
  double tol = 1e-6;  // relative objective change
  std::uint64_t seed = 0;
  bool plus_plus_seeding = true;  // false = uniform random centroids
};

struct ClusterAssignment {
  std::vector<int> labels;  // per column, in [0, k)
  Matrix centroids;         // dim x k
  double objective = 0.0;   // sum of squared distances to assigned centroids
  Index restart_id = 0;
  std::vector<double> objective_history;  // per Lloyd iteration
};

/// Scale every nonzero column to unit Euclidean norm; zero columns stay zero
/// and are counted into *zero_columns when given.
Matrix normalize_columns(const Matrix& f, Index* zero_columns = nullptr);

ClusterAssignment kmeans_once(const Matrix& f, const KMeansConfig& config,
                              std::uint64_t restart_seed, Index restart_id = 0);

/// Lowest-objective result over `restarts` independent seeded runs; ties go
/// to the lowest restart id.
ClusterAssignment kmeans_restarts(const Matrix& f, const KMeansConfig& config);

}  // namespace stc::cluster
