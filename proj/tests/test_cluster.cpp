#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "stc/cluster.hpp"
#include "stc/errors.hpp"
#include "stc/rng.hpp"

using namespace stc;
using namespace stc::cluster;

namespace {

Matrix random_points(Index dim, Index n, Rng& rng) {
  Matrix m(dim, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < dim; ++i) m(i, j) = rng.uniform(-1, 1);
  return m;
}

Matrix two_blobs(Index per_blob, Rng& rng) {
  Matrix m(2, 2 * per_blob);
  for (Index j = 0; j < per_blob; ++j) {
    m(0, j) = 10.0 + rng.uniform(-0.5, 0.5);
    m(1, j) = rng.uniform(-0.5, 0.5);
    m(0, per_blob + j) = -10.0 + rng.uniform(-0.5, 0.5);
    m(1, per_blob + j) = rng.uniform(-0.5, 0.5);
  }
  return m;
}

}  // namespace

TEST_CASE("normalize_columns") {
  Matrix f(2, 3);
  f << 3, 0.6, 0,
       4, 0.8, 0;
  Index zeros = 0;
  Matrix out = normalize_columns(f, &zeros);
  CHECK(out(0, 0) == doctest::Approx(0.6));
  CHECK(out(1, 0) == doctest::Approx(0.8));
  CHECK(out.col(1) == f.col(1));  // already unit: unchanged
  CHECK(out.col(2).isZero());
  CHECK(zeros == 1);
}

TEST_CASE("kmeans perfect fit on k distinct points") {
  Matrix f(2, 4);
  f << 0, 1, 2, 3,
       0, 1, 2, 3;
  KMeansConfig cfg;
  cfg.k = 4;
  cfg.seed = 1;
  ClusterAssignment a = kmeans_once(f, cfg, 7);
  CHECK(a.objective == doctest::Approx(0.0));
  std::set<int> distinct(a.labels.begin(), a.labels.end());
  CHECK(distinct.size() == 4);
}

TEST_CASE("kmeans objective nonincreasing and assignments optimal") {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    Matrix f = random_points(3, 40, rng);
    KMeansConfig cfg;
    cfg.k = 5;
    ClusterAssignment a = kmeans_once(f, cfg, 1000 + static_cast<std::uint64_t>(t));
    for (std::size_t i = 1; i < a.objective_history.size(); ++i) {
      CHECK(a.objective_history[i] <= a.objective_history[i - 1] + 1e-12);
    }
    // post-hoc: every point sits with its nearest centroid
    for (Index j = 0; j < f.cols(); ++j) {
      const double mine =
          (f.col(j) - a.centroids.col(a.labels[static_cast<std::size_t>(j)])).squaredNorm();
      for (Index c = 0; c < cfg.k; ++c) {
        CHECK(mine <= (f.col(j) - a.centroids.col(c)).squaredNorm() + 1e-9);
      }
    }
    // centroid step optimality at the fixed point
    Matrix sums = Matrix::Zero(3, cfg.k);
    std::vector<Index> counts(static_cast<std::size_t>(cfg.k), 0);
    for (Index j = 0; j < f.cols(); ++j) {
      sums.col(a.labels[static_cast<std::size_t>(j)]) += f.col(j);
      ++counts[static_cast<std::size_t>(a.labels[static_cast<std::size_t>(j)])];
    }
    Index nonempty = 0;
    for (Index c = 0; c < cfg.k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        ++nonempty;
        Vector mean = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        CHECK((mean - a.centroids.col(c)).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
    CHECK(nonempty == cfg.k);  // 40 random points are distinct w.p. 1
    // recomputed objective agrees with the stored one
    double obj = 0.0;
    for (Index j = 0; j < f.cols(); ++j) {
      obj += (f.col(j) - a.centroids.col(a.labels[static_cast<std::size_t>(j)])).squaredNorm();
    }
    CHECK(obj == doctest::Approx(a.objective).epsilon(1e-9));
  }
}

TEST_CASE("kmeans separates two well-separated blobs") {
  Rng rng(23);
  Matrix f = two_blobs(10, rng);
  KMeansConfig cfg;
  cfg.k = 2;
  cfg.restarts = 5;
  cfg.seed = 3;
  ClusterAssignment a = kmeans_restarts(f, cfg);
  // all of blob 0 in one cluster, all of blob 1 in the other
  for (Index j = 1; j < 10; ++j) CHECK(a.labels[static_cast<std::size_t>(j)] == a.labels[0]);
  for (Index j = 11; j < 20; ++j) CHECK(a.labels[static_cast<std::size_t>(j)] == a.labels[10]);
  CHECK(a.labels[0] != a.labels[10]);
}

TEST_CASE("kmeans restarts: reduction, winner optimality, determinism") {
  Rng rng(29);
  Matrix f = random_points(4, 30, rng);
  KMeansConfig cfg;
  cfg.k = 4;
  cfg.restarts = 1;
  cfg.seed = 11;
  ClusterAssignment single = kmeans_restarts(f, cfg);
  ClusterAssignment direct =
      kmeans_once(f, cfg, derive_seed(cfg.seed, "kmeans_restart", 0), 0);
  CHECK(single.labels == direct.labels);
  CHECK(single.objective == direct.objective);

  cfg.restarts = 8;
  ClusterAssignment best = kmeans_restarts(f, cfg);
  for (Index r = 0; r < cfg.restarts; ++r) {
    ClusterAssignment one =
        kmeans_once(f, cfg, derive_seed(cfg.seed, "kmeans_restart", static_cast<std::uint64_t>(r)), r);
    CHECK(best.objective <= one.objective + 1e-15);
  }

  ClusterAssignment again = kmeans_restarts(f, cfg);
  CHECK(again.labels == best.labels);
  CHECK(again.objective == best.objective);
  CHECK(again.restart_id == best.restart_id);
}

TEST_CASE("kmeans uniform seeding path works too") {
  Rng rng(31);
  Matrix f = two_blobs(8, rng);
  KMeansConfig cfg;
  cfg.k = 2;
  cfg.restarts = 10;
  cfg.seed = 5;
  cfg.plus_plus_seeding = false;
  ClusterAssignment a = kmeans_restarts(f, cfg);
  CHECK(a.labels[0] != a.labels[8]);
}

TEST_CASE("kmeans parameter validation") {
  Matrix f = Matrix::Zero(2, 3);
  KMeansConfig cfg;
  cfg.k = 4;  // more clusters than points
  CHECK_THROWS_AS(kmeans_once(f, cfg, 1), ParameterError);
  cfg.k = 0;
  CHECK_THROWS_AS(kmeans_once(f, cfg, 1), ParameterError);
}
