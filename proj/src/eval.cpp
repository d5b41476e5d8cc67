#include "stc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "stc/errors.hpp"

namespace stc::eval {
namespace {

void require_same_length(const std::vector<int>& gold,
                         const std::vector<int>& pred) {
  if (gold.size() != pred.size()) {
    throw InputError("label vectors have different lengths: " +
                     std::to_string(gold.size()) + " vs " +
                     std::to_string(pred.size()));
  }
  if (gold.empty()) throw InputError("label vectors are empty");
}

}  // namespace

HungarianResult hungarian(const Matrix& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) {
    throw ShapeError("hungarian: cost matrix must be square");
  }
  if (!cost.allFinite()) {
    throw InputError("hungarian: cost matrix has non-finite entries");
  }

  // Potentials-based O(n^3) assignment; 1-based scratch arrays.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<Index> match(static_cast<std::size_t>(n) + 1, 0);  // col -> row
  std::vector<Index> way(static_cast<std::size_t>(n) + 1, 0);

  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  HungarianResult r;
  r.assignment.assign(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) {
    r.assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)]) - 1] =
        j - 1;
  }
  for (Index i = 0; i < n; ++i) {
    r.cost += cost(i, r.assignment[static_cast<std::size_t>(i)]);
  }
  return r;
}

ContingencyTable contingency(const std::vector<int>& gold,
                             const std::vector<int>& pred) {
  require_same_length(gold, pred);
  int max_gold = 0, max_pred = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || pred[i] < 0) {
      throw InputError("labels must be nonnegative");
    }
    max_gold = std::max(max_gold, gold[i]);
    max_pred = std::max(max_pred, pred[i]);
  }
  ContingencyTable t;
  t.total = static_cast<Index>(gold.size());
  t.counts = Eigen::MatrixXi::Zero(max_gold + 1, max_pred + 1);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++t.counts(gold[i], pred[i]);
  }
  return t;
}

AccuracyResult accuracy(const std::vector<int>& gold,
                        const std::vector<int>& pred) {
  ContingencyTable t = contingency(gold, pred);
  const Index rows = t.counts.rows();
  const Index cols = t.counts.cols();
  const Index dim = std::max(rows, cols);

  // maximize matches == minimize negated counts, zero-padded to square
  Matrix cost = Matrix::Zero(dim, dim);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      cost(i, j) = -static_cast<double>(t.counts(i, j));
    }
  }
  HungarianResult h = hungarian(cost);

  AccuracyResult r;
  r.cluster_to_label.assign(static_cast<std::size_t>(cols), -1);
  Index matches = 0;
  for (Index label = 0; label < dim; ++label) {
    const Index cluster = h.assignment[static_cast<std::size_t>(label)];
    if (cluster < cols && label < rows) {
      r.cluster_to_label[static_cast<std::size_t>(cluster)] = label;
      matches += t.counts(label, cluster);
    }
  }
  r.acc = static_cast<double>(matches) / static_cast<double>(t.total);
  return r;
}

double nmi(const std::vector<int>& gold, const std::vector<int>& pred) {
  ContingencyTable t = contingency(gold, pred);
  const double n = static_cast<double>(t.total);
  const Index rows = t.counts.rows();
  const Index cols = t.counts.cols();

  Eigen::VectorXi row_sums = t.counts.rowwise().sum();
  Eigen::VectorXi col_sums = t.counts.colwise().sum().transpose();

  double h_gold = 0.0, h_pred = 0.0, mi = 0.0;
  for (Index i = 0; i < rows; ++i) {
    if (row_sums[i] > 0) {
      const double p = row_sums[i] / n;
      h_gold -= p * std::log(p);
    }
  }
  for (Index j = 0; j < cols; ++j) {
    if (col_sums[j] > 0) {
      const double p = col_sums[j] / n;
      h_pred -= p * std::log(p);
    }
  }
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (t.counts(i, j) > 0) {
        const double pij = t.counts(i, j) / n;
        mi += pij * std::log(pij * n * n /
                             (static_cast<double>(row_sums[i]) *
                              static_cast<double>(col_sums[j])));
      }
    }
  }

  if (h_gold <= 0.0 || h_pred <= 0.0) {
    // degenerate partitions: identical-up-to-relabeling iff both are constant
    return (h_gold <= 0.0 && h_pred <= 0.0) ? 1.0 : 0.0;
  }
  const double value = mi / std::sqrt(h_gold * h_pred);
  return std::clamp(value, 0.0, 1.0);
}

std::string format_mean_std(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f±%.2f", 100.0 * mean,
                100.0 * std::sqrt(var));
  return buf;
}

}  // namespace stc::eval
