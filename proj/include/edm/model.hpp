#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edm/features.hpp"
#include "edm/forest.hpp"
#include "edm/svm.hpp"
#include "edm/tree.hpp"

namespace edm {

enum class ModelFamily { DecisionTree, RandomForest, Svm };

std::string_view to_string(ModelFamily f);
ModelFamily parse_model_family(std::string_view text);

/// A model family plus one point of its hyperparameter grid.
struct ModelSpec {
  ModelFamily family = ModelFamily::DecisionTree;
  TreeParams tree;
  int n_trees = 100;
  SvmParams svm;

  /// Values compared lexicographically to break grid-search ties.
  std::vector<double> grid_key() const;
  std::string describe() const;

  bool operator==(const ModelSpec&) const = default;
};

struct TrainedModel {
  std::variant<DecisionTree, Forest, LinearMarginModel> model;
  std::vector<std::string> columns;  // training column names
  std::uint64_t seed = 0;

  std::vector<int> predict(const EncodedMatrix& data) const;
  /// Per encoded column; trees and forests use impurity decrease, the margin
  /// model uses normalized |w|.
  std::vector<double> feature_importance() const;

  bool operator==(const TrainedModel&) const = default;
};

/// Trains the family named by spec; margin models require standardized data.
TrainedModel fit_model(const ModelSpec& spec, const EncodedMatrix& train, std::uint64_t seed);

/// Versioned JSON document with nodes, thresholds, weights, columns and seeds.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);

/// Default grids (declaration order is the tie-break order).
std::vector<ModelSpec> default_grid(ModelFamily family);

}  // namespace edm
