#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "stc/errors.hpp"
#include "stc/eval.hpp"
#include "stc/rng.hpp"

using namespace stc;
using namespace stc::eval;

namespace {

double brute_force_min_cost(const Matrix& cost) {
  const Index n = cost.rows();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = 1e300;
  do {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// exhaustive best cluster->label matching, padded to a square problem
double brute_force_acc(const std::vector<int>& gold, const std::vector<int>& pred) {
  ContingencyTable t = contingency(gold, pred);
  const Index dim = std::max(t.counts.rows(), t.counts.cols());
  std::vector<Index> perm(static_cast<std::size_t>(dim));
  std::iota(perm.begin(), perm.end(), Index{0});
  Index best = 0;
  do {
    Index matches = 0;
    for (Index label = 0; label < dim; ++label) {
      const Index cluster = perm[static_cast<std::size_t>(label)];
      if (label < t.counts.rows() && cluster < t.counts.cols()) {
        matches += t.counts(label, cluster);
      }
    }
    best = std::max(best, matches);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(t.total);
}

}  // namespace

TEST_CASE("hungarian simple cases") {
  Matrix favor = Matrix::Ones(3, 3);
  favor.diagonal().setZero();
  HungarianResult r = hungarian(favor);
  CHECK(r.cost == doctest::Approx(0.0));
  for (Index i = 0; i < 3; ++i) CHECK(r.assignment[static_cast<std::size_t>(i)] == i);

  Matrix c(2, 2);
  c << 4, 1, 2, 3;
  HungarianResult r2 = hungarian(c);
  CHECK(r2.cost == doctest::Approx(3.0));
  CHECK(r2.assignment[0] == 1);
  CHECK(r2.assignment[1] == 0);
}

TEST_CASE("hungarian equals brute force on random matrices") {
  Rng rng(404);
  for (int t = 0; t < 60; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(6));  // up to 7x7
    Matrix cost(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) cost(i, j) = rng.uniform(-10, 10);
    HungarianResult r = hungarian(cost);
    CHECK(r.cost == doctest::Approx(brute_force_min_cost(cost)).epsilon(1e-12));
  }
}

TEST_CASE("hungarian rejects non-square input") {
  CHECK_THROWS_AS(hungarian(Matrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("accuracy under relabeling and hand cases") {
  std::vector<int> gold = {0, 0, 1, 1, 2, 2};
  std::vector<int> relabeled = {2, 2, 0, 0, 1, 1};
  CHECK(accuracy(gold, relabeled).acc == doctest::Approx(1.0));

  std::vector<int> g2 = {0, 0, 1, 1};
  std::vector<int> p2 = {0, 1, 0, 1};
  CHECK(accuracy(g2, p2).acc == doctest::Approx(0.5));

  std::vector<int> g3 = {0, 0, 1, 1};
  std::vector<int> p3 = {0, 0, 0, 0};  // single cluster
  CHECK(accuracy(g3, p3).acc == doctest::Approx(0.5));
}

TEST_CASE("accuracy equals exhaustive permutation maximum") {
  Rng rng(99);
  for (int t = 0; t < 200; ++t) {
    const int n = 4 + static_cast<int>(rng.below(40));
    const int labels = 1 + static_cast<int>(rng.below(6));
    const int clusters = 1 + static_cast<int>(rng.below(6));
    std::vector<int> gold(static_cast<std::size_t>(n)), pred(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      gold[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(labels)));
      pred[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(clusters)));
    }
    CHECK(accuracy(gold, pred).acc ==
          doctest::Approx(brute_force_acc(gold, pred)).epsilon(1e-12));
  }
}

TEST_CASE("accuracy input validation") {
  std::vector<int> a = {0, 1};
  std::vector<int> b = {0};
  CHECK_THROWS_AS(accuracy(a, b), InputError);
}

TEST_CASE("nmi worked examples") {
  // identical up to relabeling
  std::vector<int> gold = {0, 0, 1, 1, 2};
  std::vector<int> pred = {1, 1, 2, 2, 0};
  CHECK(nmi(gold, pred) == doctest::Approx(1.0));

  // constant prediction vs balanced gold: H(C) = 0 convention
  std::vector<int> g2 = {0, 0, 1, 1};
  std::vector<int> p2 = {0, 0, 0, 0};
  CHECK(nmi(g2, p2) == doctest::Approx(0.0));

  // independent partitions: joint = product of marginals
  std::vector<int> g3 = {0, 0, 1, 1};
  std::vector<int> p3 = {0, 1, 0, 1};
  CHECK(nmi(g3, p3) == doctest::Approx(0.0));

  // both constant: identical up to relabeling
  std::vector<int> g4 = {0, 0, 0};
  std::vector<int> p4 = {1, 1, 1};
  CHECK(nmi(g4, p4) == doctest::Approx(1.0));
}

TEST_CASE("nmi hand-computed nontrivial value") {
  // contingency [[2,1],[0,2]]: MI and entropies by the defining formulas
  std::vector<int> gold = {0, 0, 0, 1, 1};
  std::vector<int> pred = {0, 0, 1, 1, 1};
  const double n = 5.0;
  auto ent = [](std::vector<double> counts, double total) {
    double h = 0.0;
    for (double c : counts) {
      if (c > 0) h -= (c / total) * std::log(c / total);
    }
    return h;
  };
  const double h_t = ent({3, 2}, n);
  const double h_c = ent({2, 3}, n);
  double mi = 0.0;
  const double joint[2][2] = {{2, 1}, {0, 2}};
  const double rows[2] = {3, 2};
  const double cols[2] = {2, 3};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (joint[i][j] > 0) {
        mi += (joint[i][j] / n) *
              std::log(joint[i][j] * n / (rows[i] * cols[j]));
      }
    }
  }
  CHECK(nmi(gold, pred) == doctest::Approx(mi / std::sqrt(h_t * h_c)));
}

TEST_CASE("nmi bounds, symmetry, and relabeling invariance") {
  Rng rng(321);
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + static_cast<int>(rng.below(30));
    std::vector<int> gold(static_cast<std::size_t>(n)), pred(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      gold[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(4));
      pred[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(5));
    }
    const double v = nmi(gold, pred);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(nmi(pred, gold) == doctest::Approx(v));

    // permute predicted ids
    std::vector<int> relabel = {3, 0, 4, 1, 2};
    std::vector<int> pred2 = pred;
    for (int& x : pred2) x = relabel[static_cast<std::size_t>(x)];
    CHECK(nmi(gold, pred2) == doctest::Approx(v));
    CHECK(accuracy(gold, pred2).acc == doctest::Approx(accuracy(gold, pred).acc));
  }
}

TEST_CASE("format_mean_std matches the table style") {
  CHECK(format_mean_std({0.7709, 0.7709}) == "77.09±0.00");
  CHECK(format_mean_std({0.5, 0.7}) == "60.00±10.00");
}
