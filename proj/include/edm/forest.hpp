#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "edm/tree.hpp"

namespace edm {

struct ForestParams {
  int n_trees = 100;
  TreeParams tree;
  bool bootstrap = true;
  // Features tried per split; nullopt means ceil(sqrt(#columns)).
  std::optional<std::size_t> max_features;

  bool operator==(const ForestParams&) const = default;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  ForestParams params;
  std::size_t features_per_split = 0;
  std::vector<double> importances;  // mean of tree importances

  /// Majority vote, ties to class 0.
  int predict_row(std::span<const double> x) const;
  std::vector<int> predict(const Matrix& X) const;

  bool operator==(const Forest&) const = default;
};

Forest train_forest(const Matrix& X, std::span<const int> y, const ForestParams& params, std::uint64_t seed);

}  // namespace edm
