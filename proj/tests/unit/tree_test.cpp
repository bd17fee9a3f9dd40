#include <numeric>
#include <vector>

#include "doctest.h"
#include "edm/forest.hpp"
#include "edm/tree.hpp"
#include "support.hpp"

using namespace edm;

TEST_CASE("gini of [8, 2] is 0.32") {
  const std::vector<std::size_t> counts = {8, 2};
  CHECK(gini(counts) == doctest::Approx(0.32).epsilon(1e-15));
  const std::vector<std::size_t> pure = {5, 0};
  CHECK(gini(pure) == 0.0);
  const std::vector<std::size_t> empty = {0, 0};
  CHECK_THROWS_AS(gini(empty), std::invalid_argument);
}

TEST_CASE("tree separates a threshold rule at the midpoint") {
  const auto X = Matrix::from_rows({{1}, {2}, {3}, {10}, {11}, {12}});
  const std::vector<int> y = {0, 0, 0, 1, 1, 1};
  const auto t = train_tree(X, y, {});
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == 6.5);
  CHECK(t.predict(X) == y);
  CHECK(t.importances == std::vector<double>{1.0});
  CHECK(t.depth() == 1);
}

TEST_CASE("tree ties go to the lowest feature index") {
  // both columns split the labels perfectly
  const auto X = Matrix::from_rows({{0, 0}, {0, 0}, {1, 1}, {1, 1}});
  const auto t = train_tree(X, std::vector<int>{0, 0, 1, 1}, {});
  CHECK(t.nodes[0].feature == 0);
}

TEST_CASE("tree honours depth and leaf limits") {
  const auto data = testing::separable(200, 3, 7);
  TreeParams p;
  p.max_depth = 2;
  p.min_samples_leaf = 10;
  const auto t = train_tree(data.X, data.labels, p);
  CHECK(t.depth() <= 2);
  for (const auto& n : t.nodes) CHECK(n.counts[0] + n.counts[1] >= 10);
  const double total = std::accumulate(t.importances.begin(), t.importances.end(), 0.0);
  CHECK(total == doctest::Approx(1.0));
  CHECK(t.importances[0] > 0.5);
}

TEST_CASE("leaf prediction ties go to class 0") {
  TreeNode n;
  n.counts = {2, 2};
  CHECK(n.prediction() == 0);
}

TEST_CASE("tree rejects bad input") {
  CHECK_THROWS_AS(train_tree(Matrix(), std::vector<int>{}, {}), std::invalid_argument);
  CHECK_THROWS_AS(train_tree(Matrix::from_rows({{1}}), std::vector<int>{2}, {}), std::invalid_argument);
  const auto t = train_tree(Matrix::from_rows({{1}, {2}}), std::vector<int>{0, 1}, {});
  CHECK_THROWS_AS(t.predict(Matrix::from_rows({{1, 2}})), std::invalid_argument);
}

TEST_CASE("forest is deterministic for a seed and learns the signal") {
  const auto data = testing::separable(150, 4, 3);
  ForestParams p;
  p.n_trees = 25;
  const auto a = train_forest(data.X, data.labels, p, 11);
  const auto b = train_forest(data.X, data.labels, p, 11);
  const auto c = train_forest(data.X, data.labels, p, 12);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.features_per_split == 3);  // ceil(sqrt(5))
  const auto pred = a.predict(data.X);
  std::size_t right = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) right += pred[i] == data.labels[i];
  CHECK(right > 140);
  CHECK(a.importances[0] > 0.3);
}
