#include "edm/forest.hpp"

#include <cmath>
#include <stdexcept>

#include "edm/rng.hpp"

namespace edm {

int Forest::predict_row(std::span<const double> x) const {
  std::size_t votes[2] = {0, 0};
  for (const auto& t : trees) ++votes[t.predict_row(x)];
  return votes[1] > votes[0] ? 1 : 0;
}

std::vector<int> Forest::predict(const Matrix& X) const {
  std::vector<int> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict_row(X.row(r));
  return out;
}

Forest train_forest(const Matrix& X, std::span<const int> y, const ForestParams& params, std::uint64_t seed) {
  if (params.n_trees < 1) throw std::invalid_argument("train_forest: n_trees must be >= 1");
  if (X.rows() == 0) throw std::invalid_argument("train_forest: empty training set");
  Forest forest;
  forest.params = params;
  forest.features_per_split =
      params.max_features.value_or(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(X.cols())))));
  forest.importances.assign(X.cols(), 0.0);
  const std::size_t n = X.rows();
  for (int t = 0; t < params.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, "tree", static_cast<std::uint64_t>(t));
    Rng rng(tree_seed);
    DecisionTree tree;
    FeatureSampler sampler{forest.features_per_split, &rng};
    if (params.bootstrap) {
      std::vector<std::size_t> rows(n);
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = rng.below(n);
        labels[i] = y[rows[i]];
      }
      tree = train_tree(X.take_rows(rows), labels, params.tree, sampler);
    } else {
      tree = train_tree(X, y, params.tree, sampler);
    }
    for (std::size_t f = 0; f < X.cols(); ++f) forest.importances[f] += tree.importances[f];
    forest.trees.push_back(std::move(tree));
    forest.tree_seeds.push_back(tree_seed);
  }
  for (auto& v : forest.importances) v /= static_cast<double>(params.n_trees);
  return forest;
}

}  // namespace edm
