#include "edm/model.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "edm/errors.hpp"

namespace edm {

using nlohmann::json;

std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::DecisionTree: return "DT";
    case ModelFamily::RandomForest: return "RF";
    case ModelFamily::Svm: return "SVM";
  }
  return "DT";
}

ModelFamily parse_model_family(std::string_view text) {
  if (text == "DT" || text == "dt" || text == "tree") return ModelFamily::DecisionTree;
  if (text == "RF" || text == "rf" || text == "forest") return ModelFamily::RandomForest;
  if (text == "SVM" || text == "svm") return ModelFamily::Svm;
  throw ConfigError("unknown model family: " + std::string(text));
}

std::vector<double> ModelSpec::grid_key() const {
  const double depth = tree.max_depth ? *tree.max_depth : std::numeric_limits<double>::infinity();
  switch (family) {
    case ModelFamily::DecisionTree: return {depth, static_cast<double>(tree.min_samples_leaf)};
    case ModelFamily::RandomForest:
      return {static_cast<double>(n_trees), depth, static_cast<double>(tree.min_samples_leaf)};
    case ModelFamily::Svm: return {svm.C};
  }
  return {};
}

std::string ModelSpec::describe() const {
  auto depth = tree.max_depth ? std::to_string(*tree.max_depth) : std::string("none");
  switch (family) {
    case ModelFamily::DecisionTree:
      return "DT(max_depth=" + depth + ",min_samples_leaf=" + std::to_string(tree.min_samples_leaf) + ")";
    case ModelFamily::RandomForest:
      return "RF(n_trees=" + std::to_string(n_trees) + ",max_depth=" + depth +
             ",min_samples_leaf=" + std::to_string(tree.min_samples_leaf) + ")";
    case ModelFamily::Svm: {
      json c = svm.C;
      return "SVM(C=" + c.dump() + ",epochs=" + std::to_string(svm.epochs) + ")";
    }
  }
  return "?";
}

std::vector<int> TrainedModel::predict(const EncodedMatrix& data) const {
  if (data.cols() != columns.size()) {
    throw std::invalid_argument("predict: expected " + std::to_string(columns.size()) + " columns, got " +
                                std::to_string(data.cols()));
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (data.columns[c].name != columns[c]) {
      throw std::invalid_argument("predict: column " + std::to_string(c) + " is '" + data.columns[c].name +
                                  "', model expects '" + columns[c] + "'");
    }
  }
  return std::visit([&](const auto& m) { return m.predict(data.X); }, model);
}

std::vector<double> TrainedModel::feature_importance() const {
  if (const auto* t = std::get_if<DecisionTree>(&model)) return t->importances;
  if (const auto* f = std::get_if<Forest>(&model)) return f->importances;
  const auto& svm = std::get<LinearMarginModel>(model);
  std::vector<double> out;
  double total = 0.0;
  for (double w : svm.weights) {
    out.push_back(std::abs(w));
    total += std::abs(w);
  }
  if (total > 0.0) {
    for (auto& v : out) v /= total;
  }
  return out;
}

TrainedModel fit_model(const ModelSpec& spec, const EncodedMatrix& train, std::uint64_t seed) {
  TrainedModel out;
  out.columns = train.column_names();
  out.seed = seed;
  switch (spec.family) {
    case ModelFamily::DecisionTree:
      out.model = train_tree(train.X, train.labels, spec.tree);
      break;
    case ModelFamily::RandomForest: {
      ForestParams p;
      p.n_trees = spec.n_trees;
      p.tree = spec.tree;
      out.model = train_forest(train.X, train.labels, p, seed);
      break;
    }
    case ModelFamily::Svm:
      out.model = train_svm(train, spec.svm, seed);
      break;
  }
  return out;
}

std::vector<ModelSpec> default_grid(ModelFamily family) {
  const std::vector<std::optional<int>> depths = {2, 3, 5, 10, std::nullopt};
  std::vector<ModelSpec> grid;
  switch (family) {
    case ModelFamily::DecisionTree:
      for (auto d : depths) {
        for (int leaf : {1, 2, 5}) {
          ModelSpec s;
          s.tree.max_depth = d;
          s.tree.min_samples_leaf = leaf;
          grid.push_back(s);
        }
      }
      break;
    case ModelFamily::RandomForest:
      for (int n : {50, 100, 200}) {
        for (auto d : depths) {
          ModelSpec s;
          s.family = ModelFamily::RandomForest;
          s.n_trees = n;
          s.tree.max_depth = d;
          grid.push_back(s);
        }
      }
      break;
    case ModelFamily::Svm:
      for (double c : {0.01, 0.1, 1.0, 10.0}) {
        ModelSpec s;
        s.family = ModelFamily::Svm;
        s.svm.C = c;
        grid.push_back(s);
      }
      break;
  }
  return grid;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

constexpr int kModelFormatVersion = 1;

json tree_params_json(const TreeParams& p) {
  return {{"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
          {"min_samples_split", p.min_samples_split},
          {"min_samples_leaf", p.min_samples_leaf}};
}

TreeParams tree_params_from(const json& j) {
  TreeParams p;
  if (!j.at("max_depth").is_null()) p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  return p;
}

json tree_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"counts", {n.counts[0], n.counts[1]}}});
  }
  return {{"params", tree_params_json(t.params)},
          {"n_features", t.n_features},
          {"importances", t.importances},
          {"nodes", nodes}};
}

DecisionTree tree_from(const json& j) {
  DecisionTree t;
  t.params = tree_params_from(j.at("params"));
  t.n_features = j.at("n_features").get<std::size_t>();
  t.importances = j.at("importances").get<std::vector<double>>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.counts = {n.at("counts")[0].get<std::size_t>(), n.at("counts")[1].get<std::size_t>()};
    t.nodes.push_back(node);
  }
  return t;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["columns"] = model.columns;
  j["seed"] = model.seed;
  if (const auto* t = std::get_if<DecisionTree>(&model.model)) {
    j["kind"] = "decision_tree";
    j["tree"] = tree_json(*t);
  } else if (const auto* f = std::get_if<Forest>(&model.model)) {
    j["kind"] = "random_forest";
    j["params"] = {{"n_trees", f->params.n_trees},
                   {"tree", tree_params_json(f->params.tree)},
                   {"bootstrap", f->params.bootstrap},
                   {"max_features", f->params.max_features ? json(*f->params.max_features) : json(nullptr)}};
    j["features_per_split"] = f->features_per_split;
    j["tree_seeds"] = f->tree_seeds;
    j["importances"] = f->importances;
    j["trees"] = json::array();
    for (const auto& t : f->trees) j["trees"].push_back(tree_json(t));
  } else {
    const auto& s = std::get<LinearMarginModel>(model.model);
    j["kind"] = "linear_margin";
    j["weights"] = s.weights;
    j["bias"] = s.bias;
    j["C"] = s.C;
    j["standardization"] = {{"mean", s.stats.mean}, {"scale", s.stats.scale}, {"zero_variance", s.stats.zero_variance}};
    j["objective_trace"] = s.objective_trace;
  }
  return j.dump(2);
}

TrainedModel model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != kModelFormatVersion) throw SchemaError("unsupported model format version");
    TrainedModel out;
    out.columns = j.at("columns").get<std::vector<std::string>>();
    out.seed = j.at("seed").get<std::uint64_t>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "decision_tree") {
      out.model = tree_from(j.at("tree"));
    } else if (kind == "random_forest") {
      Forest f;
      const auto& p = j.at("params");
      f.params.n_trees = p.at("n_trees").get<int>();
      f.params.tree = tree_params_from(p.at("tree"));
      f.params.bootstrap = p.at("bootstrap").get<bool>();
      if (!p.at("max_features").is_null()) f.params.max_features = p.at("max_features").get<std::size_t>();
      f.features_per_split = j.at("features_per_split").get<std::size_t>();
      f.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
      f.importances = j.at("importances").get<std::vector<double>>();
      for (const auto& t : j.at("trees")) f.trees.push_back(tree_from(t));
      out.model = std::move(f);
    } else if (kind == "linear_margin") {
      LinearMarginModel s;
      s.weights = j.at("weights").get<std::vector<double>>();
      s.bias = j.at("bias").get<double>();
      s.C = j.at("C").get<double>();
      s.stats.mean = j.at("standardization").at("mean").get<std::vector<double>>();
      s.stats.scale = j.at("standardization").at("scale").get<std::vector<double>>();
      s.stats.zero_variance = j.at("standardization").at("zero_variance").get<std::vector<bool>>();
      s.objective_trace = j.at("objective_trace").get<std::vector<double>>();
      out.model = std::move(s);
    } else {
      throw SchemaError("unknown model kind: " + kind);
    }
    return out;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace edm
