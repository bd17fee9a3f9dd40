#include "edm/tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "edm/rng.hpp"

namespace edm {

double gini(std::span<const std::size_t> class_counts) {
  double total = 0.0;
  for (auto c : class_counts) total += static_cast<double>(c);
  if (total == 0.0) throw std::invalid_argument("gini: all class counts are zero");
  double sum_sq = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

int DecisionTree::predict_row(std::span<const double> x) const {
  if (x.size() != n_features) throw std::invalid_argument("predict: column count mismatch");
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].prediction();
}

std::vector<int> DecisionTree::predict(const Matrix& X) const {
  if (X.cols() != n_features) throw std::invalid_argument("predict: column count mismatch");
  std::vector<int> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict_row(X.row(r));
  return out;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

namespace {

using i128 = __int128;

// Minimizing weighted child Gini is maximizing S_l/n_l + S_r/n_r where S is the
// sum of squared class counts. Kept as an exact fraction so ties are exact.
struct SplitScore {
  i128 num = 0;
  i128 den = 1;

  bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
};

SplitScore score(std::size_t l0, std::size_t l1, std::size_t r0, std::size_t r1) {
  const i128 nl = static_cast<i128>(l0 + l1);
  const i128 nr = static_cast<i128>(r0 + r1);
  const i128 sl = static_cast<i128>(l0) * l0 + static_cast<i128>(l1) * l1;
  const i128 sr = static_cast<i128>(r0) * r0 + static_cast<i128>(r1) * r1;
  return {sl * nr + sr * nl, nl * nr};
}

class Builder {
 public:
  Builder(const Matrix& X, std::span<const int> y, const TreeParams& params, const FeatureSampler& sampler)
      : X_(X), y_(y), params_(params), sampler_(sampler), decrease_(X.cols(), 0.0) {}

  DecisionTree build() {
    std::vector<std::size_t> rows(X_.rows());
    std::iota(rows.begin(), rows.end(), 0);
    DecisionTree tree;
    tree.params = params_;
    tree.n_features = X_.cols();
    grow(tree, rows, 0);
    double total = std::accumulate(decrease_.begin(), decrease_.end(), 0.0);
    tree.importances.assign(X_.cols(), 0.0);
    if (total > 0.0) {
      for (std::size_t f = 0; f < decrease_.size(); ++f) tree.importances[f] = decrease_[f] / total;
    }
    return tree;
  }

 private:
  struct Best {
    int feature = -1;
    double threshold = 0.0;
    SplitScore score;
  };

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> features(X_.cols());
    std::iota(features.begin(), features.end(), 0);
    if (sampler_.max_features == 0 || sampler_.max_features >= features.size() || !sampler_.rng) return features;
    for (std::size_t i = 0; i < sampler_.max_features; ++i) {
      std::size_t j = i + sampler_.rng->below(features.size() - i);
      std::swap(features[i], features[j]);
    }
    features.resize(sampler_.max_features);
    std::sort(features.begin(), features.end());
    return features;
  }

  Best find_split(std::vector<std::size_t>& rows, const std::array<std::size_t, 2>& counts) {
    Best best;
    const std::size_t n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
    for (std::size_t f : candidate_features()) {
      std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return X_(a, f) < X_(b, f); });
      std::array<std::size_t, 2> left{};
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[static_cast<std::size_t>(y_[rows[i]])];
        const double a = X_(rows[i], f);
        const double b = X_(rows[i + 1], f);
        if (!(a < b)) continue;
        const std::size_t nl = i + 1;
        if (nl < min_leaf || n - nl < min_leaf) continue;
        const SplitScore s = score(left[0], left[1], counts[0] - left[0], counts[1] - left[1]);
        if (best.feature < 0 || s.better_than(best.score)) {
          double thr = a + (b - a) / 2.0;
          if (!(thr < b)) thr = a;
          best = {static_cast<int>(f), thr, s};
        }
      }
    }
    return best;
  }

  int grow(DecisionTree& tree, std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::array<std::size_t, 2> counts{};
    for (auto r : rows) ++counts[static_cast<std::size_t>(y_[r])];
    tree.nodes[static_cast<std::size_t>(id)].counts = counts;

    const std::size_t n = rows.size();
    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool depth_limit = params_.max_depth && depth >= *params_.max_depth;
    const bool too_small = n < static_cast<std::size_t>(std::max(2, params_.min_samples_split)) ||
                           n < 2 * static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
    if (pure || depth_limit || too_small) return id;

    Best best = find_split(rows, counts);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) {
      (X_(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left_rows : right_rows).push_back(r);
    }
    std::sort(left_rows.begin(), left_rows.end());
    std::sort(right_rows.begin(), right_rows.end());
    std::array<std::size_t, 2> lc{}, rc{};
    for (auto r : left_rows) ++lc[static_cast<std::size_t>(y_[r])];
    for (auto r : right_rows) ++rc[static_cast<std::size_t>(y_[r])];
    const double total = static_cast<double>(X_.rows());
    decrease_[static_cast<std::size_t>(best.feature)] += std::max(
        0.0, (static_cast<double>(n) * gini(counts) - static_cast<double>(left_rows.size()) * gini(lc) -
         static_cast<double>(right_rows.size()) * gini(rc)) /
                 total);

    rows.clear();
    rows.shrink_to_fit();
    const int left = grow(tree, left_rows, depth + 1);
    const int right = grow(tree, right_rows, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const Matrix& X_;
  std::span<const int> y_;
  TreeParams params_;
  FeatureSampler sampler_;
  std::vector<double> decrease_;
};

}  // namespace

DecisionTree train_tree(const Matrix& X, std::span<const int> y, const TreeParams& params,
                        const FeatureSampler& sampler) {
  if (X.rows() == 0) throw std::invalid_argument("train_tree: empty training set");
  if (y.size() != X.rows()) throw std::invalid_argument("train_tree: label count mismatch");
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("train_tree: labels must be 0/1");
  }
  return Builder(X, y, params, sampler).build();
}

}  // namespace edm
