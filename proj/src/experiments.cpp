#include "edm/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "edm/csv.hpp"
#include "edm/errors.hpp"
#include "edm/parallel.hpp"
#include "edm/rng.hpp"

namespace edm {

double round2(double v) {
  if (std::isnan(v)) return v;
  return std::round(v * 100.0) / 100.0;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string name_of(const DatasetBundle& b) { return std::string(to_string(b.dataset_id)); }

std::vector<std::string> dataset_names(const BundleList& bundles) {
  std::vector<std::string> out;
  for (const auto* b : bundles) out.push_back(name_of(*b));
  return out;
}

BalanceSpec balance_spec(const ExperimentConfig& config, BalanceTechnique technique) {
  BalanceSpec b;
  b.technique = technique;
  b.scope = config.balance_scope;
  b.smote_k = config.smote_k;
  return b;
}

CvOptions cv_options(const ExperimentConfig& config, BalanceTechnique technique, std::uint64_t seed,
                     LeakageTally* tally) {
  CvOptions cv;
  cv.folds = config.folds;
  cv.seed = seed;
  cv.averaging = config.averaging;
  cv.balance = balance_spec(config, technique);
  cv.tally = tally;
  return cv;
}

/// Every feature the bundle supports, complete rows only, encoded.
EncodedMatrix full_matrix(const DatasetBundle& bundle, const LabelRule& rule, std::vector<std::string>* notes) {
  const bool additional = bundle.dataset_id == DatasetId::D1 && !bundle.question_results.empty();
  auto [complete, log] = filter_complete(build_feature_matrix(bundle, additional, rule));
  if (notes && !log.removed.empty()) {
    notes->push_back(std::to_string(log.removed.size()) + " incomplete learner rows removed");
  }
  return encode(complete);
}

std::vector<EncodedMatrix> common_view(const BundleList& bundles, const LabelRule& rule) {
  std::vector<DatasetBundle> copies;
  for (const auto* b : bundles) copies.push_back(*b);
  return common_feature_view(copies, rule);
}

void add_tally(ExperimentOutput& out, const LeakageTally& tally) {
  out.leakage_checks += tally.checks.load();
  out.leakage_violations += tally.violations.load();
}

ResultTable make_table(std::string name, std::string caption, std::vector<std::string> rows,
                       std::vector<std::string> cols) {
  ResultTable t;
  t.name = std::move(name);
  t.caption = std::move(caption);
  t.row_labels = std::move(rows);
  t.col_labels = std::move(cols);
  t.cells.assign(t.row_labels.size(), std::vector<double>(t.col_labels.size(), kNaN));
  return t;
}

const std::vector<std::string> kMetricRows = {"accuracy", "precision", "recall", "f_score"};

std::vector<double> metric_values(const Metrics& m) { return {m.accuracy, m.precision, m.recall, m.f_score}; }

std::string balance_caption(BalanceTechnique t) {
  switch (t) {
    case BalanceTechnique::None: return "Baseline results without balancing";
    case BalanceTechnique::Upsample: return "Results with upsampling";
    case BalanceTechnique::Downsample: return "Results with downsampling";
    case BalanceTechnique::UpAndDown: return "Results with up and downsampling";
    case BalanceTechnique::Smote: return "Results with SMOTE";
  }
  return "";
}

std::string describe_grid_choice(const std::string& cell, const GridResult& g) {
  return cell + ": " + g.best_spec().describe();
}

}  // namespace

ExperimentOutput run_balancing_comparison(const BundleList& bundles, const ExperimentConfig& config) {
  ExperimentOutput out;
  out.experiment = ExperimentKind::Balancing;
  const auto views = common_view(bundles, config.label_rule());
  const auto names = dataset_names(bundles);
  const auto grid = config.grid_for(ModelFamily::DecisionTree);
  LeakageTally tally;
  const std::size_t n_cells = config.balances.size() * views.size();
  std::vector<GridResult> results(n_cells);
  parallel_for(n_cells, config.resolved_jobs(), [&](std::size_t i) {
    const auto technique = config.balances[i / views.size()];
    const auto d = i % views.size();
    const auto seed = derive_seed(config.seed, "balancing/" + std::string(to_string(technique)) + "/" + names[d]);
    results[i] = grid_search(views[d], grid, cv_options(config, technique, seed, &tally));
  });
  std::ostringstream plot;
  csv::write_row(plot, {"technique", "dataset", "metric", "value"});
  for (std::size_t t = 0; t < config.balances.size(); ++t) {
    const auto technique = config.balances[t];
    auto table = make_table("balancing_" + std::string(to_string(technique)), balance_caption(technique) +
                                " (decision tree, common features, " + std::to_string(config.folds) + "-fold CV)",
                            kMetricRows, names);
    for (std::size_t d = 0; d < views.size(); ++d) {
      const auto& g = results[t * views.size() + d];
      const auto values = metric_values(g.best_report().mean);
      for (std::size_t m = 0; m < values.size(); ++m) {
        table.cells[m][d] = round2(values[m]);
        csv::write_row(plot, {std::string(to_string(technique)), names[d], kMetricRows[m],
                              csv::format_double(table.cells[m][d])});
      }
      table.notes.push_back(describe_grid_choice(names[d], g));
      if (g.best_report().mean.undefined_class) table.notes.push_back(names[d] + ": a class had no predictions in some fold");
    }
    out.tables.push_back(std::move(table));
  }
  out.files.emplace_back("plots/balancing.csv", plot.str());
  add_tally(out, tally);
  return out;
}

ExperimentOutput run_model_comparison(const BundleList& bundles, const ExperimentConfig& config) {
  ExperimentOutput out;
  out.experiment = ExperimentKind::Models;
  const auto views = common_view(bundles, config.label_rule());
  const auto names = dataset_names(bundles);
  LeakageTally tally;
  const std::size_t n_cells = config.models.size() * views.size();
  std::vector<GridResult> results(n_cells);
  parallel_for(n_cells, config.resolved_jobs(), [&](std::size_t i) {
    const auto family = config.models[i / views.size()];
    const auto d = i % views.size();
    const auto seed = derive_seed(config.seed, "models/" + std::string(to_string(family)) + "/" + names[d]);
    results[i] = grid_search(views[d], config.grid_for(family), cv_options(config, config.balance, seed, &tally));
  });
  std::vector<std::string> rows;
  for (auto f : config.models) rows.emplace_back(to_string(f));
  auto acc = make_table("model_accuracy", "Mean CV accuracy per model and dataset (common features)", rows, names);
  auto sd = make_table("model_accuracy_std", "Sample standard deviation of fold accuracies", rows, names);
  auto se = make_table("model_accuracy_stderr", "Standard error of the mean fold accuracy", rows, names);
  std::ostringstream plot;
  csv::write_row(plot, {"model", "dataset", "fold", "accuracy"});
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    for (std::size_t d = 0; d < views.size(); ++d) {
      const auto& g = results[m * views.size() + d];
      const auto& r = g.best_report();
      acc.cells[m][d] = round2(r.mean.accuracy);
      sd.cells[m][d] = round2(r.std_dev.accuracy);
      se.cells[m][d] = round2(r.std_error.accuracy);
      acc.notes.push_back(describe_grid_choice(rows[m] + "/" + names[d], g));
      for (std::size_t f = 0; f < r.folds.size(); ++f) {
        csv::write_row(plot, {rows[m], names[d], std::to_string(f + 1), csv::format_double(r.folds[f].accuracy)});
      }
    }
  }
  out.tables = {acc, sd, se};
  out.files.emplace_back("plots/fold_accuracy.csv", plot.str());
  add_tally(out, tally);
  return out;
}

ExperimentOutput run_transfer_matrix(const BundleList& bundles, const ExperimentConfig& config) {
  ExperimentOutput out;
  out.experiment = ExperimentKind::Transfer;
  const auto views = common_view(bundles, config.label_rule());
  const auto names = dataset_names(bundles);
  const std::size_t n = views.size();
  std::vector<EncodedMatrix> train(n), test(n);
  for (std::size_t d = 0; d < n; ++d) {
    const auto [tr, te] = stratified_split(views[d].labels, 0.2, derive_seed(config.seed, "transfer/split/" + names[d]));
    train[d] = take_rows(views[d], tr);
    test[d] = take_rows(views[d], te);
  }
  LeakageTally tally;
  // accuracy[model][train][test]
  std::vector<std::vector<std::vector<double>>> accuracy(
      config.models.size(), std::vector<std::vector<double>>(n, std::vector<double>(n, kNaN)));
  std::vector<std::string> choices(config.models.size() * n);
  parallel_for(config.models.size() * n, config.resolved_jobs(), [&](std::size_t cell) {
    const auto m = cell / n;
    const auto i = cell % n;
    const auto family = config.models[m];
    const auto seed = derive_seed(config.seed, "transfer/" + std::string(to_string(family)) + "/" + names[i]);
    const auto g = grid_search(train[i], config.grid_for(family), cv_options(config, config.balance, seed, &tally));
    choices[cell] = describe_grid_choice("train " + names[i], g);
    BalanceSpec b = balance_spec(config, config.balance);
    b.seed = derive_seed(seed, "final-balance");
    const auto balanced = rebalance(train[i], b);
    ++tally.checks;
    tally.violations += count_leaked_rows(balanced, test[i]);
    auto [train_std, stats] = standardize(balanced);
    const auto model = fit_model(g.best_spec(), train_std, derive_seed(seed, "final-model"));
    for (std::size_t j = 0; j < n; ++j) {
      const auto test_std = standardize(test[j], stats).first;
      accuracy[m][i][j] = compute_metrics(confusion_of(test_std.labels, model.predict(test_std))).accuracy;
    }
  });
  std::vector<std::string> rows, cols;
  for (const auto& nm : names) {
    rows.push_back("train " + nm);
    cols.push_back("test " + nm);
  }
  std::ostringstream plot;
  csv::write_row(plot, {"model", "train", "test", "accuracy"});
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    const std::string model_name(to_string(config.models[m]));
    auto table = make_table("transfer_" + model_name,
                            "Transfer accuracy for " + model_name +
                                ": train on the 80% split of one dataset, test on the 20% held-out split of another",
                            rows, cols);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        table.cells[i][j] = round2(accuracy[m][i][j]);
        csv::write_row(plot, {model_name, names[i], names[j], csv::format_double(table.cells[i][j])});
      }
      table.notes.push_back(choices[m * n + i]);
    }
    out.tables.push_back(std::move(table));
  }
  out.files.emplace_back("plots/transfer.csv", plot.str());
  add_tally(out, tally);
  return out;
}

ExperimentOutput run_source_ablation(const DatasetBundle& bundle, const std::set<SourceCategory>& categories,
                                     const ExperimentConfig& config) {
  if (categories.empty()) throw ConfigError("source ablation needs at least one category");
  ExperimentOutput out;
  out.experiment = ExperimentKind::Sources;
  std::vector<std::string> notes;
  const auto data = full_matrix(bundle, config.label_rule(), &notes);
  std::set<SourceCategory> present;
  for (const auto& g : data.manifest) present.insert(g.category);
  for (auto c : categories) {
    if (!present.count(c)) {
      throw DataError("category " + std::string(1, to_char(c)) + " has no features in " + name_of(bundle));
    }
  }
  const std::vector<SourceCategory> cats(categories.begin(), categories.end());
  std::vector<std::set<SourceCategory>> subsets;
  for (unsigned mask = 1; mask < (1u << cats.size()); ++mask) {
    std::set<SourceCategory> s;
    for (std::size_t i = 0; i < cats.size(); ++i) {
      if (mask & (1u << i)) s.insert(cats[i]);
    }
    subsets.push_back(s);
  }
  // 1-source rows first, then 2-source, ...; within a size, category order.
  std::stable_sort(subsets.begin(), subsets.end(), [&](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });

  LeakageTally tally;
  const auto grid = config.grid_for(ModelFamily::DecisionTree);
  std::vector<GridResult> results(subsets.size());
  std::vector<std::vector<double>> importance(subsets.size(), std::vector<double>(cats.size(), kNaN));
  parallel_for(subsets.size(), config.resolved_jobs(), [&](std::size_t i) {
    const auto subset = select_categories(data, subsets[i]);
    // All rows share the root seed so they differ only in their columns.
    const auto cv = cv_options(config, config.balance, config.seed, &tally);
    results[i] = grid_search(subset, grid, cv);
    BalanceSpec b = cv.balance;
    b.seed = derive_seed(config.seed, "sources/importance");
    const auto fitted = standardize(rebalance(subset, b)).first;
    const auto model = fit_model(results[i].best_spec(), fitted, derive_seed(config.seed, "sources/model"));
    const auto per_column = model.feature_importance();
    for (std::size_t c = 0; c < cats.size(); ++c) {
      if (!subsets[i].count(cats[c])) continue;
      double total = 0.0;
      for (std::size_t col = 0; col < subset.cols(); ++col) {
        if (subset.columns[col].category == cats[c]) total += per_column[col];
      }
      importance[i][c] = 100.0 * total;
    }
  });

  std::vector<std::string> rows, cols = kMetricRows;
  for (const auto& s : subsets) rows.push_back(to_string(s));
  for (auto c : cats) cols.push_back(std::string("importance ") + to_char(c));
  auto table = make_table("source_ablation_" + name_of(bundle),
                          "Results of source combinations on " + name_of(bundle) +
                              " (decision tree, " + std::string(to_string(config.balance)) + " balancing)",
                          rows, cols);
  std::ostringstream plot;
  csv::write_row(plot, {"sources", "metric", "value"});
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const auto values = metric_values(results[i].best_report().mean);
    for (std::size_t m = 0; m < values.size(); ++m) {
      table.cells[i][m] = round2(values[m]);
      csv::write_row(plot, {rows[i], kMetricRows[m], csv::format_double(table.cells[i][m])});
    }
    for (std::size_t c = 0; c < cats.size(); ++c) table.cells[i][kMetricRows.size() + c] = round2(importance[i][c]);
  }
  table.notes = notes;
  table.notes.push_back("importance columns: share of the tree's impurity decrease per category, in percent");
  out.tables.push_back(std::move(table));
  out.files.emplace_back("plots/source_ablation_" + name_of(bundle) + ".csv", plot.str());
  add_tally(out, tally);
  return out;
}

ExperimentOutput run_selection_analysis(const DatasetBundle& bundle, const ExperimentConfig& config) {
  ExperimentOutput out;
  out.experiment = ExperimentKind::Selection;
  std::vector<std::string> notes;
  auto data = full_matrix(bundle, config.label_rule(), &notes);

  // Features without variance carry no information for any method.
  const auto stats = standardize(data).second;
  std::vector<std::size_t> keep;
  for (std::size_t g = 0; g < data.manifest.size(); ++g) {
    bool constant = true;
    for (auto c : data.manifest[g].columns) constant = constant && stats.zero_variance[c];
    if (constant) notes.push_back("excluded (null variance): " + data.manifest[g].spec);
    else keep.push_back(g);
  }
  data = select_groups(data, keep);

  LeakageTally tally;
  const auto cv = cv_options(config, config.balance, derive_seed(config.seed, "selection"), &tally);
  const int jobs = config.resolved_jobs();
  const auto tuned = grid_search(data, config.grid_for(ModelFamily::DecisionTree), cv, jobs);
  const ModelSpec spec = tuned.best_spec();
  notes.push_back("inner model: " + spec.describe());

  WrapperOptions wo;
  wo.cv = cv;
  wo.jobs = jobs;
  const auto fe = forward_elimination(data, spec, wo);
  const auto be = backward_elimination(data, spec, wo);
  const auto rcv = rfe_cv(data, spec, cv, jobs);
  const auto anova = filter_ranking(SelectionMethod::ANOVA, data);
  const auto kendall = filter_ranking(SelectionMethod::KENDALL, data);
  const auto pearson = pearson_matrix(data);

  auto wrappers = make_table("selection_wrappers", "Wrapper feature selection on " + name_of(bundle),
                             {"FE", "BE", "RFECV"}, {"k", "cv accuracy"});
  auto last_score = [](const SelectionResult& r) { return r.steps.empty() ? kNaN : r.steps.back().score; };
  wrappers.cells[0] = {static_cast<double>(*fe.chosen_k), round2(last_score(fe))};
  wrappers.cells[1] = {static_cast<double>(*be.chosen_k),
                       round2(be.steps.empty() ? *be.baseline_score : last_score(be))};
  double rcv_score = kNaN;
  for (const auto& p : rcv.curve) {
    if (p.k == *rcv.chosen_k) rcv_score = p.mean;
  }
  wrappers.cells[2] = {static_cast<double>(*rcv.chosen_k), round2(rcv_score)};
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  };
  wrappers.notes = notes;
  wrappers.notes.push_back("FE selected: " + join(fe.ordered));
  wrappers.notes.push_back("BE selected: " + join(be.ordered));
  wrappers.notes.push_back("RFECV selected: " + join(rcv.ordered));
  wrappers.notes.push_back("RFECV k rule: " + rcv.k_rule);

  std::vector<std::string> feature_rows;
  for (const auto& g : data.manifest) feature_rows.push_back(g.spec);
  auto filters = make_table("selection_filters", "Filter scores per feature (ANOVA F and Kendall tau-b against the label)",
                            feature_rows, {"anova_f", "kendall_tau"});
  for (const auto& s : anova.steps) {
    auto it = std::find(feature_rows.begin(), feature_rows.end(), s.feature);
    filters.cells[static_cast<std::size_t>(it - feature_rows.begin())][0] = round2(s.score);
  }
  for (const auto& s : kendall.steps) {
    auto it = std::find(feature_rows.begin(), feature_rows.end(), s.feature);
    filters.cells[static_cast<std::size_t>(it - feature_rows.begin())][1] = round2(s.score);
  }
  filters.notes.push_back("ANOVA ranking: " + join(anova.ordered));
  filters.notes.push_back("Kendall ranking: " + join(kendall.ordered));
  if (!anova.undefined.empty()) filters.notes.push_back("ANOVA undefined: " + join(anova.undefined));
  if (!kendall.undefined.empty()) filters.notes.push_back("Kendall undefined: " + join(kendall.undefined));
  out.tables = {wrappers, filters};

  auto csv_of = [](auto writer, const SelectionResult& r) {
    std::ostringstream s;
    writer(r, s);
    return s.str();
  };
  auto sel = [](const SelectionResult& r, std::ostream& o) { write_selection_csv(r, o); };
  out.files.emplace_back("fe.csv", csv_of(sel, fe));
  out.files.emplace_back("be.csv", csv_of(sel, be));
  out.files.emplace_back("rfecv.csv", csv_of(sel, rcv));
  out.files.emplace_back("anova.csv", csv_of(sel, anova));
  out.files.emplace_back("kendall.csv", csv_of(sel, kendall));
  out.files.emplace_back("plots/rfecv_curve.csv",
                         csv_of([](const SelectionResult& r, std::ostream& o) { write_curve_csv(r, o); }, rcv));
  std::ostringstream corr;
  std::vector<std::string> header = {"feature"};
  header.insert(header.end(), pearson.names.begin(), pearson.names.end());
  csv::write_row(corr, header);
  for (std::size_t a = 0; a < pearson.names.size(); ++a) {
    std::vector<std::string> row = {pearson.names[a]};
    for (std::size_t b = 0; b < pearson.names.size(); ++b) {
      const double v = pearson.values(a, b);
      row.push_back(std::isnan(v) ? "" : csv::format_double(v));
    }
    csv::write_row(corr, row);
  }
  out.files.emplace_back("plots/pearson.csv", corr.str());
  nlohmann::json summary = nlohmann::json::array();
  for (const auto* r : {&fe, &be, &rcv, &anova, &kendall}) summary.push_back(nlohmann::json::parse(selection_json(*r)));
  out.files.emplace_back("selection.json", summary.dump(2) + "\n");
  add_tally(out, tally);
  return out;
}

ExperimentOutput describe(const DatasetBundle& bundle, const LabelRule& rule) {
  ExperimentOutput out;
  out.experiment = ExperimentKind::Describe;
  const std::string prefix = name_of(bundle) + "_";
  std::ostringstream summary, hist;
  csv::write_row(summary, {"feature", "category", "kind", "count", "missing", "min", "max", "mean"});
  csv::write_row(hist, {"feature", "bin", "lower", "upper", "level", "count", "count_label0", "count_label1"});
  if (bundle.profiles.empty()) {
    out.files.emplace_back(prefix + "summary.csv", summary.str());
    out.files.emplace_back(prefix + "histograms.csv", hist.str());
    return out;
  }
  const bool additional = bundle.dataset_id == DatasetId::D1 && !bundle.question_results.empty();
  FeatureMatrix m = build_minimal_features(bundle);
  if (additional) m = join_columns(m, build_additional_features(bundle));
  const auto labels = derive_labels(bundle, rule);

  for (std::size_t c = 0; c < m.specs.size(); ++c) {
    const auto& spec = m.specs[c];
    std::size_t missing = 0;
    std::vector<std::pair<double, std::optional<int>>> numbers;
    std::vector<std::pair<std::string, std::optional<int>>> words;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const auto& cell = m.cells[r][c];
      if (std::holds_alternative<std::monostate>(cell)) ++missing;
      else if (const double* v = std::get_if<double>(&cell)) numbers.emplace_back(*v, labels[r]);
      else words.emplace_back(std::get<std::string>(cell), labels[r]);
    }
    std::string lo, hi, mean;
    if (!numbers.empty()) {
      double mn = numbers[0].first, mx = numbers[0].first, sum = 0.0;
      for (const auto& [v, l] : numbers) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        sum += v;
      }
      lo = csv::format_double(mn);
      hi = csv::format_double(mx);
      mean = csv::format_double(sum / static_cast<double>(numbers.size()));
      const int bins = 10;
      std::vector<std::array<std::size_t, 3>> counts(bins, {0, 0, 0});
      for (const auto& [v, l] : numbers) {
        int b = mx > mn ? static_cast<int>((v - mn) / (mx - mn) * bins) : 0;
        b = std::clamp(b, 0, bins - 1);
        ++counts[static_cast<std::size_t>(b)][0];
        if (l) ++counts[static_cast<std::size_t>(b)][1 + static_cast<std::size_t>(*l)];
      }
      for (int b = 0; b < bins; ++b) {
        const double width = (mx - mn) / bins;
        const auto& k = counts[static_cast<std::size_t>(b)];
        csv::write_row(hist, {spec.name, std::to_string(b + 1), csv::format_double(mn + width * b),
                              csv::format_double(b + 1 == bins ? mx : mn + width * (b + 1)), "", std::to_string(k[0]),
                              std::to_string(k[1]), std::to_string(k[2])});
      }
    }
    if (!words.empty() || (numbers.empty() && !spec.levels.empty())) {
      std::vector<std::string> levels = spec.levels;
      for (const auto& [w, l] : words) {
        if (std::find(levels.begin(), levels.end(), w) == levels.end()) levels.push_back(w);
      }
      for (std::size_t i = 0; i < levels.size(); ++i) {
        std::array<std::size_t, 3> k{0, 0, 0};
        for (const auto& [w, l] : words) {
          if (w != levels[i]) continue;
          ++k[0];
          if (l) ++k[1 + static_cast<std::size_t>(*l)];
        }
        csv::write_row(hist, {spec.name, std::to_string(i + 1), "", "", levels[i], std::to_string(k[0]),
                              std::to_string(k[1]), std::to_string(k[2])});
      }
    }
    if (missing > 0) {
      std::array<std::size_t, 3> k{missing, 0, 0};
      for (std::size_t r = 0; r < m.rows(); ++r) {
        if (std::holds_alternative<std::monostate>(m.cells[r][c]) && labels[r]) ++k[1 + static_cast<std::size_t>(*labels[r])];
      }
      csv::write_row(hist, {spec.name, "missing", "", "", "", std::to_string(k[0]), std::to_string(k[1]),
                            std::to_string(k[2])});
    }
    csv::write_row(summary, {spec.name, std::string(1, to_char(spec.category)), std::string(to_string(spec.kind)),
                             std::to_string(m.rows()), std::to_string(missing), lo, hi, mean});
  }
  out.files.emplace_back(prefix + "summary.csv", summary.str());
  out.files.emplace_back(prefix + "histograms.csv", hist.str());

  std::size_t pass = 0, fail = 0;
  for (const auto& l : labels) {
    if (l) (*l ? pass : fail)++;
  }
  auto table = make_table("class_balance_" + name_of(bundle), "Label distribution of " + name_of(bundle),
                          {"pass", "fail"}, {"count", "share"});
  const double total = static_cast<double>(pass + fail);
  table.cells[0] = {static_cast<double>(pass), total > 0 ? round2(100.0 * pass / total) : kNaN};
  table.cells[1] = {static_cast<double>(fail), total > 0 ? round2(100.0 * fail / total) : kNaN};
  table.notes.push_back(std::to_string(bundle.profiles.size() - pass - fail) + " learners without a final outcome");
  out.tables.push_back(std::move(table));
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& config, const std::vector<LoadedDataset>& datasets) {
  config.validate();
  auto find = [&](DatasetId id) -> const DatasetBundle& {
    for (const auto& d : datasets) {
      if (d.bundle.dataset_id == id) return d.bundle;
    }
    throw ConfigError("dataset " + std::string(to_string(id)) + " is not configured");
  };
  BundleList all;
  for (const auto& d : datasets) all.push_back(&d.bundle);
  switch (config.experiment) {
    case ExperimentKind::Balancing: return run_balancing_comparison(all, config);
    case ExperimentKind::Models: return run_model_comparison(all, config);
    case ExperimentKind::Transfer: return run_transfer_matrix(all, config);
    case ExperimentKind::Sources: {
      const auto& bundle = find(config.ablation_dataset);
      std::set<SourceCategory> cats;
      if (config.categories.empty()) {
        for (const auto& g : full_matrix(bundle, config.label_rule(), nullptr).manifest) cats.insert(g.category);
      } else {
        cats = parse_categories(config.categories);
      }
      return run_source_ablation(bundle, cats, config);
    }
    case ExperimentKind::Selection: return run_selection_analysis(find(config.selection_dataset), config);
    case ExperimentKind::Describe: {
      ExperimentOutput merged;
      merged.experiment = ExperimentKind::Describe;
      for (const auto* b : all) {
        auto one = describe(*b, config.label_rule());
        merged.tables.insert(merged.tables.end(), one.tables.begin(), one.tables.end());
        merged.files.insert(merged.files.end(), one.files.begin(), one.files.end());
      }
      return merged;
    }
  }
  throw ConfigError("unknown experiment");
}

}  // namespace edm
