#include "edm/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "edm/csv.hpp"
#include "edm/parallel.hpp"
#include "edm/rng.hpp"

namespace edm {

std::string_view to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::FE: return "FE";
    case SelectionMethod::BE: return "BE";
    case SelectionMethod::RFE: return "RFE";
    case SelectionMethod::RFECV: return "RFECV";
    case SelectionMethod::ANOVA: return "ANOVA";
    case SelectionMethod::KENDALL: return "KENDALL";
  }
  return "FE";
}

namespace {

double cv_accuracy(const EncodedMatrix& data, std::vector<std::size_t> groups, const ModelSpec& spec,
                   const CvOptions& cv) {
  std::sort(groups.begin(), groups.end());
  return cross_validate(select_groups(data, groups), spec, cv).mean.accuracy;
}

std::vector<std::string> names_of(const EncodedMatrix& data, std::vector<std::size_t> groups, bool sort) {
  if (sort) std::sort(groups.begin(), groups.end());
  std::vector<std::string> out;
  for (auto g : groups) out.push_back(data.manifest[g].spec);
  return out;
}

void check_k(const EncodedMatrix& data, std::optional<std::size_t> k) {
  if (data.manifest.empty()) throw std::invalid_argument("selection: no features");
  if (k && (*k < 1 || *k > data.manifest.size())) {
    throw std::invalid_argument("selection: k=" + std::to_string(*k) + " outside [1, " +
                                std::to_string(data.manifest.size()) + "]");
  }
}

// Fit on `train` (balanced, standardized on itself) and score accuracy on `test`.
double holdout_accuracy(const EncodedMatrix& train, const EncodedMatrix& test, const ModelSpec& spec,
                        const CvOptions& cv, std::uint64_t seed) {
  BalanceSpec b = cv.balance;
  b.seed = derive_seed(seed, "balance");
  const auto balanced = rebalance(train, b);
  if (cv.tally) {
    ++cv.tally->checks;
    cv.tally->violations += count_leaked_rows(balanced, test);
  }
  auto [train_std, stats] = standardize(balanced);
  const auto test_std = standardize(test, stats).first;
  const auto model = fit_model(spec, train_std, derive_seed(seed, "model"));
  return compute_metrics(confusion_of(test_std.labels, model.predict(test_std))).accuracy;
}

}  // namespace

SelectionResult forward_elimination(const EncodedMatrix& data, const ModelSpec& spec, const WrapperOptions& options) {
  check_k(data, options.k);
  SelectionResult result;
  result.method = SelectionMethod::FE;
  const std::size_t g_count = data.manifest.size();
  std::vector<std::size_t> chosen;
  std::vector<bool> used(g_count, false);
  double current = -std::numeric_limits<double>::infinity();
  while (chosen.size() < g_count && (!options.k || chosen.size() < *options.k)) {
    std::vector<std::size_t> candidates;
    for (std::size_t g = 0; g < g_count; ++g) {
      if (!used[g]) candidates.push_back(g);
    }
    std::vector<double> scores(candidates.size());
    parallel_for(candidates.size(), options.jobs, [&](std::size_t i) {
      auto trial = chosen;
      trial.push_back(candidates[i]);
      scores[i] = cv_accuracy(data, trial, spec, options.cv);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    if (!options.k && !(scores[best] > current)) break;
    current = scores[best];
    chosen.push_back(candidates[best]);
    used[candidates[best]] = true;
    result.steps.push_back({result.steps.size() + 1, data.manifest[candidates[best]].spec, current});
  }
  result.ordered = names_of(data, chosen, false);
  result.chosen_k = chosen.size();
  return result;
}

SelectionResult backward_elimination(const EncodedMatrix& data, const ModelSpec& spec, const WrapperOptions& options) {
  check_k(data, options.k);
  SelectionResult result;
  result.method = SelectionMethod::BE;
  std::vector<std::size_t> kept(data.manifest.size());
  std::iota(kept.begin(), kept.end(), 0);
  double current = cv_accuracy(data, kept, spec, options.cv);
  result.baseline_score = current;
  const std::size_t floor = options.k ? *options.k : 1;
  while (kept.size() > floor) {
    std::vector<double> scores(kept.size());
    parallel_for(kept.size(), options.jobs, [&](std::size_t i) {
      auto trial = kept;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
      scores[i] = cv_accuracy(data, trial, spec, options.cv);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < kept.size(); ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    if (!options.k && scores[best] < current) break;
    current = scores[best];
    result.steps.push_back({result.steps.size() + 1, data.manifest[kept[best]].spec, current});
    kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(best));
  }
  result.ordered = names_of(data, kept, true);
  result.chosen_k = kept.size();
  return result;
}

std::vector<std::size_t> rfe_elimination_order(const EncodedMatrix& data, const ModelSpec& spec,
                                                const BalanceSpec& balance, std::uint64_t seed, std::size_t stop_at,
                                                std::vector<double>* dropped_scores) {
  BalanceSpec b = balance;
  b.seed = derive_seed(seed, "rfe-balance");
  const EncodedMatrix balanced = rebalance(data, b);
  std::vector<std::size_t> kept(data.manifest.size());
  std::iota(kept.begin(), kept.end(), 0);
  std::vector<std::size_t> dropped;
  while (kept.size() > stop_at) {
    const auto subset = standardize(select_groups(balanced, kept)).first;
    const auto model = fit_model(spec, subset, derive_seed(seed, "rfe-model", dropped.size()));
    const auto per_group = aggregate_by_group(subset, model.feature_importance());
    std::size_t worst = 0;
    for (std::size_t i = 1; i < per_group.size(); ++i) {
      if (per_group[i].second <= per_group[worst].second) worst = i;
    }
    if (dropped_scores) dropped_scores->push_back(per_group[worst].second);
    dropped.push_back(kept[worst]);
    kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  return dropped;
}

SelectionResult rfe(const EncodedMatrix& data, const ModelSpec& spec, std::size_t k, const CvOptions& cv) {
  check_k(data, k);
  SelectionResult result;
  result.method = SelectionMethod::RFE;
  std::vector<double> scores;
  const auto dropped = rfe_elimination_order(data, spec, cv.balance, cv.seed, k, &scores);
  std::vector<bool> gone(data.manifest.size(), false);
  for (std::size_t i = 0; i < dropped.size(); ++i) {
    gone[dropped[i]] = true;
    result.steps.push_back({i + 1, data.manifest[dropped[i]].spec, scores[i]});
  }
  for (std::size_t g = 0; g < data.manifest.size(); ++g) {
    if (!gone[g]) result.ordered.push_back(data.manifest[g].spec);
  }
  result.chosen_k = k;
  return result;
}

SelectionResult rfe_cv(const EncodedMatrix& data, const ModelSpec& spec, const CvOptions& cv, int jobs) {
  check_k(data, std::nullopt);
  const std::size_t g_count = data.manifest.size();
  const auto folds = stratified_kfold(data.labels, cv.folds, derive_seed(cv.seed, "folds"));
  // accuracy[f][k-1]
  std::vector<std::vector<double>> accuracy(folds.size(), std::vector<double>(g_count, 0.0));
  parallel_for(folds.size(), jobs, [&](std::size_t f) {
    std::vector<char> in_test(data.rows(), 0);
    for (auto r : folds[f]) in_test[r] = 1;
    std::vector<std::size_t> train_rows;
    for (std::size_t r = 0; r < data.rows(); ++r) {
      if (!in_test[r]) train_rows.push_back(r);
    }
    const auto train = take_rows(data, train_rows);
    const auto test = take_rows(data, folds[f]);
    const std::uint64_t fold_seed = derive_seed(cv.seed, "rfecv", f);
    const auto order = rfe_elimination_order(train, spec, cv.balance, fold_seed);
    for (std::size_t k = 1; k <= g_count; ++k) {
      // Top k survivors: everything not among the first g_count - k dropped.
      std::vector<bool> gone(g_count, false);
      for (std::size_t i = 0; i < g_count - k; ++i) gone[order[i]] = true;
      std::vector<std::size_t> groups;
      for (std::size_t g = 0; g < g_count; ++g) {
        if (!gone[g]) groups.push_back(g);
      }
      accuracy[f][k - 1] = holdout_accuracy(select_groups(train, groups), select_groups(test, groups), spec, cv,
                                            derive_seed(fold_seed, "k", k));
    }
  });

  SelectionResult result;
  result.method = SelectionMethod::RFECV;
  const double n = static_cast<double>(folds.size());
  std::size_t best = 0;
  for (std::size_t k = 1; k <= g_count; ++k) {
    CurvePoint p;
    p.k = k;
    for (const auto& row : accuracy) p.mean += row[k - 1];
    p.mean /= n;
    double ss = 0.0;
    for (const auto& row : accuracy) ss += (row[k - 1] - p.mean) * (row[k - 1] - p.mean);
    p.std_dev = folds.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    p.std_error = p.std_dev / std::sqrt(n);
    result.curve.push_back(p);
    if (p.mean > result.curve[best].mean) best = k - 1;
  }
  const double bar = result.curve[best].mean - result.curve[best].std_error;
  std::size_t k_star = result.curve[best].k;
  for (const auto& p : result.curve) {
    if (p.mean >= bar) {
      k_star = p.k;
      break;
    }
  }
  result.k_rule = "smallest k with mean accuracy >= best mean - 1 standard error";
  const auto final_set = rfe(data, spec, k_star, cv);
  result.ordered = final_set.ordered;
  result.steps = final_set.steps;
  result.chosen_k = k_star;
  return result;
}

// ---------------------------------------------------------------------------
// Filters

FilterScores anova_f(const Matrix& X, std::span<const int> y) {
  if (y.size() != X.rows()) throw std::invalid_argument("anova_f: label count mismatch");
  FilterScores out;
  out.values.assign(X.cols(), 0.0);
  out.undefined.assign(X.cols(), false);
  std::size_t n[2] = {0, 0};
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("anova_f: labels must be binary");
    ++n[v];
  }
  for (std::size_t c = 0; c < X.cols(); ++c) {
    if (n[0] < 2 || n[1] < 2) {
      out.values[c] = std::numeric_limits<double>::quiet_NaN();
      out.undefined[c] = true;
      continue;
    }
    double sum[2] = {0.0, 0.0};
    for (std::size_t r = 0; r < X.rows(); ++r) sum[y[r]] += X(r, c);
    const double mean[2] = {sum[0] / static_cast<double>(n[0]), sum[1] / static_cast<double>(n[1])};
    const double grand = (sum[0] + sum[1]) / static_cast<double>(n[0] + n[1]);
    double ssw = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
      const double d = X(r, c) - mean[y[r]];
      ssw += d * d;
    }
    double ssb = 0.0;
    for (int g = 0; g < 2; ++g) ssb += static_cast<double>(n[g]) * (mean[g] - grand) * (mean[g] - grand);
    const double df_within = static_cast<double>(n[0] + n[1] - 2);
    if (ssw == 0.0) {
      out.values[c] = ssb == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      out.undefined[c] = true;
      continue;
    }
    out.values[c] = ssb / (ssw / df_within);
  }
  return out;
}

namespace {

// Counts inversions of v while merge-sorting it.
std::uint64_t count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = count_swaps(v, buf, lo, mid) + count_swaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, o = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      buf[o++] = v[j++];
    } else {
      buf[o++] = v[i++];
    }
  }
  while (i < mid) buf[o++] = v[i++];
  while (j < hi) buf[o++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Number of tied pairs in a sorted range.
std::uint64_t tied_pairs(const std::vector<double>& sorted) {
  std::uint64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

double kendall_tau_b(std::span<const double> x, std::span<const double> y, bool* undefined) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall_tau_b: length mismatch");
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n > 0 ? n - 1 : 0) / 2;
  const std::uint64_t n1 = tied_pairs(xs);
  std::uint64_t n3 = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && xs[i] == xs[i - 1] && ys[i] == ys[i - 1]) {
      ++run;
    } else {
      n3 += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  std::vector<double> buf(n);
  const std::uint64_t swaps = count_swaps(ys, buf, 0, n);
  const std::uint64_t n2 = tied_pairs(ys);
  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  if (n0 == n1 || n0 == n2) {
    if (undefined) *undefined = true;
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (undefined) *undefined = false;
  // concordant - discordant = n0 - n1 - n2 + n3 - 2 * swaps
  const double numer = static_cast<double>(static_cast<std::int64_t>(n0 - n1 - n2 + n3) -
                                           2 * static_cast<std::int64_t>(swaps));
  return numer / denom;
}

FilterScores kendall_tau(const Matrix& X, std::span<const int> y) {
  if (y.size() != X.rows()) throw std::invalid_argument("kendall_tau: label count mismatch");
  std::vector<double> yd(y.begin(), y.end());
  FilterScores out;
  out.values.resize(X.cols());
  out.undefined.resize(X.cols());
  for (std::size_t c = 0; c < X.cols(); ++c) {
    const auto col = X.column(c);
    bool undefined = false;
    out.values[c] = kendall_tau_b(col, yd, &undefined);
    out.undefined[c] = undefined;
  }
  return out;
}

CorrelationMatrix pearson_matrix(const Matrix& X) {
  const std::size_t cols = X.cols();
  const double n = static_cast<double>(X.rows());
  CorrelationMatrix out;
  out.values = Matrix(cols, cols);
  out.undefined.assign(cols, false);
  std::vector<std::vector<double>> centered(cols);
  std::vector<double> norm(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    centered[c] = X.column(c);
    double mean = 0.0;
    for (double v : centered[c]) mean += v;
    mean = n > 0 ? mean / n : 0.0;
    for (auto& v : centered[c]) {
      v -= mean;
      norm[c] += v * v;
    }
    norm[c] = std::sqrt(norm[c]);
    if (!(norm[c] > 1e-12 * std::max(1.0, std::abs(mean)) * std::sqrt(std::max(n, 1.0)))) out.undefined[c] = true;
  }
  for (std::size_t a = 0; a < cols; ++a) {
    out.values(a, a) = 1.0;
    for (std::size_t b = a + 1; b < cols; ++b) {
      double r = std::numeric_limits<double>::quiet_NaN();
      if (!out.undefined[a] && !out.undefined[b]) {
        double dot = 0.0;
        for (std::size_t i = 0; i < centered[a].size(); ++i) dot += centered[a][i] * centered[b][i];
        r = std::clamp(dot / (norm[a] * norm[b]), -1.0, 1.0);
      }
      out.values(a, b) = r;
      out.values(b, a) = r;
    }
  }
  return out;
}

CorrelationMatrix pearson_matrix(const EncodedMatrix& data) {
  auto out = pearson_matrix(data.X);
  out.names = data.column_names();
  return out;
}

SelectionResult filter_ranking(SelectionMethod method, const EncodedMatrix& data) {
  if (method != SelectionMethod::ANOVA && method != SelectionMethod::KENDALL) {
    throw std::invalid_argument("filter_ranking: not a filter method");
  }
  const auto scores = method == SelectionMethod::ANOVA ? anova_f(data.X, data.labels) : kendall_tau(data.X, data.labels);
  struct Entry {
    std::size_t group;
    double score;  // signed value of the column with the largest magnitude
    bool defined;
  };
  std::vector<Entry> entries;
  for (std::size_t g = 0; g < data.manifest.size(); ++g) {
    Entry e{g, 0.0, false};
    for (auto c : data.manifest[g].columns) {
      if (scores.undefined[c]) continue;
      if (!e.defined || std::abs(scores.values[c]) > std::abs(e.score)) e.score = scores.values[c];
      e.defined = true;
    }
    entries.push_back(e);
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.defined != b.defined) return a.defined;
    return std::abs(a.score) > std::abs(b.score);
  });
  SelectionResult result;
  result.method = method;
  for (const auto& e : entries) {
    const auto& name = data.manifest[e.group].spec;
    result.ordered.push_back(name);
    result.steps.push_back({result.steps.size() + 1, name,
                            e.defined ? e.score : std::numeric_limits<double>::quiet_NaN()});
    if (!e.defined) result.undefined.push_back(name);
  }
  return result;
}

// ---------------------------------------------------------------------------

void write_selection_csv(const SelectionResult& result, std::ostream& out) {
  csv::write_row(out, {"step", "feature", "score"});
  for (const auto& s : result.steps) {
    csv::write_row(out, {std::to_string(s.step), s.feature, std::isnan(s.score) ? "" : csv::format_double(s.score)});
  }
}

std::string selection_json(const SelectionResult& result) {
  nlohmann::json j;
  j["method"] = std::string(to_string(result.method));
  j["k_star"] = result.chosen_k ? nlohmann::json(*result.chosen_k) : nlohmann::json(nullptr);
  j["chosen"] = result.ordered;
  if (result.baseline_score) j["baseline_score"] = *result.baseline_score;
  if (!result.k_rule.empty()) j["k_rule"] = result.k_rule;
  if (!result.undefined.empty()) j["undefined"] = result.undefined;
  return j.dump(2);
}

void write_curve_csv(const SelectionResult& result, std::ostream& out) {
  csv::write_row(out, {"k", "mean", "std", "stderr"});
  for (const auto& p : result.curve) {
    csv::write_row(out, {std::to_string(p.k), csv::format_double(p.mean), csv::format_double(p.std_dev),
                         csv::format_double(p.std_error)});
  }
}

}  // namespace edm
