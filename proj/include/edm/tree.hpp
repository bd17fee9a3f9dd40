#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "edm/matrix.hpp"

namespace edm {

class Rng;

/// 1 - sum p_c^2. Throws std::invalid_argument when every count is zero.
double gini(std::span<const std::size_t> class_counts);

struct TreeParams {
  std::optional<int> max_depth;  // nullopt: unbounded
  int min_samples_split = 2;
  int min_samples_leaf = 1;

  bool operator==(const TreeParams&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::size_t, 2> counts{};

  bool is_leaf() const { return feature < 0; }
  /// Majority class; ties go to class 0.
  int prediction() const { return counts[1] > counts[0] ? 1 : 0; }

  bool operator==(const TreeNode&) const = default;
};

/// Binary CART classifier. Rows with x[feature] <= threshold go left.
struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root, children follow their parent
  TreeParams params;
  std::size_t n_features = 0;
  std::vector<double> importances;  // normalized impurity decrease; all 0 without any gain

  int predict_row(std::span<const double> x) const;
  std::vector<int> predict(const Matrix& X) const;
  std::size_t depth() const;

  bool operator==(const DecisionTree&) const = default;
};

/// Per-split feature sampling used by forests.
struct FeatureSampler {
  std::size_t max_features = 0;  // 0: all features
  Rng* rng = nullptr;
};

/// Greedy recursive binary splitting on weighted child Gini. Candidate
/// thresholds are midpoints of consecutive distinct values; ties go to the
/// lowest feature index, then the lowest threshold. Splits that do not lower
/// the impurity are allowed; growth stops on purity, depth or sample limits.
DecisionTree train_tree(const Matrix& X, std::span<const int> y, const TreeParams& params,
                        const FeatureSampler& sampler = {});

}  // namespace edm
