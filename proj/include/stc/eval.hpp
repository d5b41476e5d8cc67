#pragma once

#include <string>
#include <vector>

#include "stc/types.hpp"

namespace stc::eval {

struct HungarianResult {
  std::vector<Index> assignment;  // row -> column
  double cost = 0.0;
};

/// Minimum-total-cost perfect assignment on a square cost matrix.
HungarianResult hungarian(const Matrix& cost);

struct ContingencyTable {
  Eigen::MatrixXi counts;  // gold labels x clusters
  Index total = 0;
};

ContingencyTable contingency(const std::vector<int>& gold,
                             const std::vector<int>& pred);

struct AccuracyResult {
  double acc = 0.0;
  std::vector<Index> cluster_to_label;  // best mapping found
};

/// Clustering accuracy under the best cluster-to-label mapping (maximum
/// matches via the Hungarian algorithm on the negated contingency table).
AccuracyResult accuracy(const std::vector<int>& gold,
                        const std::vector<int>& pred);

/// MI(T, C) / sqrt(H(T) H(C)) with natural-log entropies. Degenerate cases:
/// 1 when the partitions are identical up to relabeling, 0 when either
/// entropy vanishes while they differ.
double nmi(const std::vector<int>& gold, const std::vector<int>& pred);

/// "77.09±3.99"-style summary of percentage values (two decimals).
std::string format_mean_std(const std::vector<double>& values);

}  // namespace stc::eval
