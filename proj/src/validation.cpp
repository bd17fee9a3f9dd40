#include "edm/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "edm/errors.hpp"
#include "edm/parallel.hpp"
#include "edm/rng.hpp"

namespace edm {

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
  std::vector<std::size_t> rows_of[2];
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw DataError("stratified_kfold: labels must be binary");
    rows_of[y[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (rows_of[c].size() < static_cast<std::size_t>(k)) {
      throw DataError("stratified_kfold: class " + std::to_string(c) + " has " + std::to_string(rows_of[c].size()) +
                      " rows, fewer than k=" + std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  // Dealing continues where the previous class stopped so fold sizes also stay within one.
  std::size_t next = 0;
  for (int c = 0; c < 2; ++c) {
    rng.shuffle(rows_of[c]);
    for (auto r : rows_of[c]) {
      folds[next].push_back(r);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(std::span<const int> y,
                                                                                double test_fraction,
                                                                                std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("stratified_split: bad fraction");
  std::vector<std::size_t> rows_of[2];
  for (std::size_t i = 0; i < y.size(); ++i) rows_of[y[i] == 1 ? 1 : 0].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> train, test;
  for (auto& rows : rows_of) {
    rng.shuffle(rows);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
    test.insert(test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

std::size_t count_leaked_rows(const EncodedMatrix& train, const EncodedMatrix& test) {
  std::unordered_set<std::int64_t> test_origins(test.origin.begin(), test.origin.end());
  std::size_t leaked = 0;
  for (auto o : train.origin) leaked += test_origins.count(o);
  return leaked;
}

MetricsReport cross_validate(const EncodedMatrix& input, const ModelSpec& spec, const CvOptions& options) {
  if (input.labels.size() != input.rows()) throw DataError("cross_validate: labels required");
  MetricsReport report;
  report.averaging = options.averaging;
  report.balance = std::string(to_string(options.balance.technique)) + "@" + std::string(to_string(options.balance.scope));

  const bool whole = options.balance.scope == BalanceScope::WholeDataset;
  EncodedMatrix balanced_whole;
  if (whole) {
    BalanceSpec b = options.balance;
    b.seed = derive_seed(options.seed, "balance-whole");
    balanced_whole = rebalance(input, b);
  }
  const EncodedMatrix& data = whole ? balanced_whole : input;
  const auto folds = stratified_kfold(data.labels, options.folds, derive_seed(options.seed, "folds"));

  std::vector<char> in_test(data.rows());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (auto r : folds[f]) in_test[r] = 1;
    std::vector<std::size_t> train_rows;
    for (std::size_t r = 0; r < data.rows(); ++r) {
      if (!in_test[r]) train_rows.push_back(r);
    }
    EncodedMatrix train = take_rows(data, train_rows);
    EncodedMatrix test = take_rows(data, folds[f]);
    if (!whole) {
      BalanceSpec b = options.balance;
      b.seed = derive_seed(options.seed, "balance", f);
      train = rebalance(train, b);
    }
    // Leakage guard: no held-out row may reach the training side. Balancing the
    // whole dataset leaks by construction, so only train-fold runs feed the tally.
    const std::size_t leaked = count_leaked_rows(train, test);
    ++report.provenance_checks;
    report.provenance_violations += leaked;
    if (options.tally && !whole) {
      ++options.tally->checks;
      options.tally->violations += leaked;
    }
    auto [train_std, stats] = standardize(train);
    auto test_std = standardize(test, stats).first;
    const auto model = fit_model(spec, train_std, derive_seed(options.seed, "model", f));
    const auto predicted = model.predict(test_std);
    const auto confusion = confusion_of(test_std.labels, predicted);
    report.totals += confusion;
    report.folds.push_back(compute_metrics(confusion, options.averaging));
  }
  aggregate(report);
  return report;
}

GridResult grid_search(const EncodedMatrix& data, const std::vector<ModelSpec>& grid, const CvOptions& options,
                       int jobs) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  GridResult result;
  result.points = grid;
  result.reports.resize(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) { result.reports[i] = cross_validate(data, grid[i], options); });
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double acc = result.reports[i].mean.accuracy;
    const double best = result.reports[result.best].mean.accuracy;
    if (acc > best || (acc == best && grid[i].grid_key() < grid[result.best].grid_key())) result.best = i;
  }
  return result;
}

}  // namespace edm
