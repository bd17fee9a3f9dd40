// Acceptance runner: one PASS/FAIL/SKIP line per criterion, exit 1 if any hard
// criterion fails. Criteria 7-12 need the public datasets under $EDM_DATA_DIR:
//   d1/          canonical D1 CSV set
//   oulad/       OULAD CSV files
//   canvas.csv   Canvas Network person-course file (or canvas/<any>.csv)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edm/experiments.hpp"
#include "edm/features.hpp"
#include "edm/resample.hpp"
#include "edm/rng.hpp"
#include "edm/selection.hpp"
#include "edm/synthgen.hpp"
#include "edm/tree.hpp"
#include "edm/validation.hpp"

using namespace edm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Skip, std::move(d)}; }
Outcome check(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

EncodedMatrix encoded(const Matrix& X, const std::vector<int>& y) {
  EncodedMatrix m;
  m.X = X;
  m.labels = y;
  for (std::size_t c = 0; c < X.cols(); ++c) {
    const std::string name = "x" + std::to_string(c);
    m.columns.push_back({name, SourceCategory::A, name});
    m.manifest.push_back({name, SourceCategory::A, FeatureKind::Numeric, {c}, {}});
  }
  for (std::size_t r = 0; r < X.rows(); ++r) {
    m.row_ids.push_back("r" + std::to_string(r));
    m.origin.push_back(static_cast<std::int64_t>(r));
  }
  return m;
}

// ---------------------------------------------------------------------------
// 1. naive CART with exact fractions

struct Frac {
  long long n = 0, d = 1;

  Frac() = default;
  Frac(long long num, long long den) : n(num), d(den) {
    if (d < 0) n = -n, d = -d;
    const long long g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) n /= g, d /= g;
  }
  friend Frac operator+(Frac a, Frac b) { return {a.n * b.d + b.n * a.d, a.d * b.d}; }
  friend Frac operator-(Frac a, Frac b) { return {a.n * b.d - b.n * a.d, a.d * b.d}; }
  friend Frac operator*(Frac a, Frac b) { return {a.n * b.n, a.d * b.d}; }
  friend bool operator<(Frac a, Frac b) { return a.n * b.d < b.n * a.d; }
};

Frac naive_gini(long long c0, long long c1) {
  const long long n = c0 + c1;
  return Frac(1, 1) - Frac(c0 * c0, n * n) - Frac(c1 * c1, n * n);
}

struct NaiveNode {
  int feature = -1;
  double threshold = 0;
  std::size_t c0 = 0, c1 = 0;
  int left = -1, right = -1;
};

int naive_grow(const std::vector<std::vector<double>>& X, const std::vector<int>& y, const std::vector<std::size_t>& rows,
               int depth, const TreeParams& p, std::vector<NaiveNode>& out) {
  const int id = static_cast<int>(out.size());
  out.emplace_back();
  std::size_t c0 = 0, c1 = 0;
  for (auto r : rows) (y[r] ? c1 : c0)++;
  out[id].c0 = c0;
  out[id].c1 = c1;
  const std::size_t n = rows.size();
  if (c0 == 0 || c1 == 0) return id;
  if (p.max_depth && depth >= *p.max_depth) return id;
  if (n < static_cast<std::size_t>(p.min_samples_split) || n < 2 * static_cast<std::size_t>(p.min_samples_leaf)) return id;

  std::optional<Frac> best;
  int best_f = -1;
  double best_t = 0;
  const std::size_t nf = X.empty() ? 0 : X[0].size();
  for (std::size_t f = 0; f < nf; ++f) {
    std::set<double> values;
    for (auto r : rows) values.insert(X[r][f]);
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double t = (v[i] + v[i + 1]) / 2;
      long long l0 = 0, l1 = 0, r0 = 0, r1 = 0;
      for (auto r : rows) {
        if (X[r][f] <= t) (y[r] ? l1 : l0)++;
        else (y[r] ? r1 : r0)++;
      }
      if (l0 + l1 < p.min_samples_leaf || r0 + r1 < p.min_samples_leaf) continue;
      const long long nn = static_cast<long long>(n);
      const Frac w = Frac(l0 + l1, nn) * naive_gini(l0, l1) + Frac(r0 + r1, nn) * naive_gini(r0, r1);
      if (!best || w < *best) {
        best = w;
        best_f = static_cast<int>(f);
        best_t = t;
      }
    }
  }
  if (best_f < 0) return id;
  std::vector<std::size_t> lr, rr;
  for (auto r : rows) (X[r][best_f] <= best_t ? lr : rr).push_back(r);
  const int l = naive_grow(X, y, lr, depth + 1, p, out);
  const int r = naive_grow(X, y, rr, depth + 1, p, out);
  out[id].feature = best_f;
  out[id].threshold = best_t;
  out[id].left = l;
  out[id].right = r;
  return id;
}

Outcome criterion_cart() {
  Rng rng(20241);
  int matched = 0;
  std::string first_mismatch;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    const std::size_t nf = 1 + rng.below(3);
    std::vector<std::vector<double>> rows(n, std::vector<double>(nf));
    std::vector<int> y(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (auto& v : rows[r]) v = static_cast<double>(rng.below(2));
      y[r] = static_cast<int>(rng.below(2));
    }
    TreeParams p;
    const auto depth_pick = rng.below(4);
    if (depth_pick > 0) p.max_depth = static_cast<int>(depth_pick);
    p.min_samples_leaf = 1 + static_cast<int>(rng.below(2));
    p.min_samples_split = 2 + static_cast<int>(rng.below(2));

    std::vector<NaiveNode> expect;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    naive_grow(rows, y, all, 0, p, expect);
    const auto tree = train_tree(Matrix::from_rows(rows), y, p);

    bool same = tree.nodes.size() == expect.size();
    for (std::size_t i = 0; same && i < expect.size(); ++i) {
      const auto& a = tree.nodes[i];
      const auto& b = expect[i];
      same = a.feature == b.feature && a.counts[0] == b.c0 && a.counts[1] == b.c1 && a.left == b.left &&
             a.right == b.right && (b.feature < 0 || a.threshold == b.threshold);
    }
    if (same) ++matched;
    else if (first_mismatch.empty()) first_mismatch = " first mismatch at trial " + std::to_string(trial);
  }
  return check(matched == 500, std::to_string(matched) + "/500 trees identical" + first_mismatch);
}

// ---------------------------------------------------------------------------
// 2. resampling invariants

double segment_residual(std::span<const double> p, std::span<const double> a, std::span<const double> b) {
  double ab2 = 0, t = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ab2 += (b[i] - a[i]) * (b[i] - a[i]);
    t += (p[i] - a[i]) * (b[i] - a[i]);
  }
  t = ab2 > 0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
  double r = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = a[i] + t * (b[i] - a[i]);
    r += (p[i] - q) * (p[i] - q);
  }
  return std::sqrt(r);
}

Outcome criterion_resampling() {
  Rng rng(77);
  std::size_t failures = 0, runs = 0;
  double worst_residual = 0;
  std::string what;
  auto bad = [&](const std::string& why) {
    if (what.empty()) what = " (" + why + ")";
    ++failures;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n_min = 7 + rng.below(10);
    const std::size_t n_maj = n_min + 1 + rng.below(30);
    const std::size_t nf = 1 + rng.below(4);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    const int minority = static_cast<int>(rng.below(2));
    for (std::size_t i = 0; i < n_min + n_maj; ++i) {
      std::vector<double> r(nf);
      for (auto& v : r) v = rng.normal();
      rows.push_back(r);
      y.push_back(i < n_min ? minority : 1 - minority);
    }
    // interleave so class order is not trivially blocked
    std::vector<std::size_t> perm(rows.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<std::vector<double>> pr;
    std::vector<int> py;
    for (auto i : perm) {
      pr.push_back(rows[i]);
      py.push_back(y[i]);
    }
    const auto data = encoded(Matrix::from_rows(pr), py);

    for (auto tech : {BalanceTechnique::Upsample, BalanceTechnique::Downsample, BalanceTechnique::UpAndDown,
                      BalanceTechnique::Smote}) {
      ++runs;
      BalanceSpec spec;
      spec.technique = tech;
      spec.seed = derive_seed(5, "accept", static_cast<std::uint64_t>(trial));
      spec.smote_k = 5;
      const auto out = rebalance(data, spec);
      if (!(rebalance(data, spec) == out)) bad("nondeterministic " + std::string(to_string(tech)));
      std::size_t ones = 0;
      for (int l : out.labels) ones += static_cast<std::size_t>(l);
      if (ones * 2 != out.rows()) bad("unequal counts " + std::string(to_string(tech)));
      // every row either copies its origin row or (SMOTE) lies on a minority segment
      for (std::size_t r = 0; r < out.rows(); ++r) {
        const auto o = static_cast<std::size_t>(out.origin[r]);
        if (out.labels[r] != py[o]) bad("label changed");
        const bool copy = std::equal(out.X.row(r).begin(), out.X.row(r).end(), data.X.row(o).begin());
        if (tech != BalanceTechnique::Smote || r < data.rows()) {
          if (!copy) bad("row is not a copy of its origin");
          continue;
        }
        double best = INFINITY;
        for (std::size_t z = 0; z < data.rows(); ++z) {
          if (z == o || py[z] != minority) continue;
          best = std::min(best, segment_residual(out.X.row(r), data.X.row(o), data.X.row(z)));
        }
        worst_residual = std::max(worst_residual, best);
        if (!(best < 1e-9)) bad("smote point off segment");
      }
      if (tech == BalanceTechnique::Downsample) {
        std::set<std::int64_t> origins(out.origin.begin(), out.origin.end());
        if (origins.size() != out.rows()) bad("downsample repeated a row");
        if (out.rows() != 2 * n_min) bad("downsample size");
      }
    }
  }
  return check(failures == 0, std::to_string(runs - std::min(runs, failures)) + "/" + std::to_string(runs) +
                                  " runs clean, worst SMOTE residual " + fmt("%.2e", worst_residual) + what);
}

// ---------------------------------------------------------------------------
// 3. statistics oracles

double brute_tau_b(const std::vector<double>& x, const std::vector<double>& y, bool& undefined) {
  const std::size_t n = x.size();
  long long conc = 0, disc = 0, tx = 0, ty = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++pairs;
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0) ++tx;
      if (dy == 0) ++ty;
      if (dx == 0 || dy == 0) continue;
      ((dx > 0) == (dy > 0) ? conc : disc)++;
    }
  }
  const double denom = std::sqrt(static_cast<double>(pairs - tx) * static_cast<double>(pairs - ty));
  undefined = denom == 0;
  return undefined ? 0.0 : static_cast<double>(conc - disc) / denom;
}

Outcome criterion_statistics() {
  Rng rng(314);
  double tau_err = 0;
  int tau_ok = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(11);
    std::vector<double> x(n), y(n);
    const auto levels = 2 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(levels));
      y[i] = t % 2 ? static_cast<double>(rng.below(2)) : rng.normal();
    }
    bool und_ref = false, und = false;
    const double ref = brute_tau_b(x, y, und_ref);
    const double got = kendall_tau_b(x, y, &und);
    const double err = und_ref ? 0.0 : std::abs(ref - got);
    tau_err = std::max(tau_err, err);
    if (und == und_ref && err <= 1e-12) ++tau_ok;
  }

  double f_err = 0;
  int f_ok = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n0 = 2 + rng.below(10), n1 = 2 + rng.below(10);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    double s0 = 0, s1 = 0;
    std::vector<double> v;
    for (std::size_t i = 0; i < n0 + n1; ++i) {
      const int label = i < n0 ? 0 : 1;
      const double val = rng.normal() * 3 + label;
      rows.push_back({val});
      y.push_back(label);
      v.push_back(val);
      (label ? s1 : s0) += val;
    }
    const double m0 = s0 / n0, m1 = s1 / n1, m = (s0 + s1) / (n0 + n1);
    double ssw = 0;
    for (std::size_t i = 0; i < v.size(); ++i) ssw += std::pow(v[i] - (y[i] ? m1 : m0), 2);
    const double ssb = n0 * std::pow(m0 - m, 2) + n1 * std::pow(m1 - m, 2);
    const double ref = ssb / (ssw / static_cast<double>(n0 + n1 - 2));
    const auto got = anova_f(Matrix::from_rows(rows), y);
    const double err = std::abs(got.values[0] - ref) / std::max(1.0, std::abs(ref));
    f_err = std::max(f_err, err);
    if (!got.undefined[0] && err <= 1e-9) ++f_ok;
  }

  const auto fixture = anova_f(Matrix::from_rows({{1}, {2}, {3}, {4}, {5}, {6}}), std::vector<int>{0, 0, 0, 1, 1, 1});
  const bool fixture_ok = std::abs(fixture.values[0] - 13.5) < 1e-12;
  return check(tau_ok == 200 && f_ok == 200 && fixture_ok,
               "kendall " + std::to_string(tau_ok) + "/200 (max err " + fmt("%.1e", tau_err) + "), anova " +
                   std::to_string(f_ok) + "/200 (max rel err " + fmt("%.1e", f_err) + "), fixture F=" +
                   fmt("%.12g", fixture.values[0]));
}

// ---------------------------------------------------------------------------
// 4. stratified folds

Outcome criterion_folds() {
  Rng rng(4242);
  int ok = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 20 + rng.below(200);
    const double p = 0.1 + 0.8 * rng.uniform();
    std::vector<int> y(n);
    std::size_t ones = 0;
    for (auto& v : y) ones += static_cast<std::size_t>(v = rng.bernoulli(p) ? 1 : 0);
    // both classes need at least 10 members
    for (std::size_t i = 0; ones < 10; ++i) ones += static_cast<std::size_t>(y[i] == 0 ? (y[i] = 1) : 0);
    for (std::size_t i = 0; n - ones < 10; ++i) ones -= static_cast<std::size_t>(y[i] == 1 ? (y[i] = 0, 1) : 0);

    const auto folds = stratified_kfold(y, 10, static_cast<std::uint64_t>(t));
    std::vector<int> seen(n, 0);
    std::size_t lo[2] = {SIZE_MAX, SIZE_MAX}, hi[2] = {0, 0};
    for (const auto& f : folds) {
      std::size_t c[2] = {0, 0};
      for (auto i : f) {
        ++seen[i];
        ++c[y[i]];
      }
      for (int k = 0; k < 2; ++k) lo[k] = std::min(lo[k], c[k]), hi[k] = std::max(hi[k], c[k]);
    }
    const bool partition = folds.size() == 10 && std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
    if (partition && hi[0] - lo[0] <= 1 && hi[1] - lo[1] <= 1) ++ok;
  }
  return check(ok == 100, std::to_string(ok) + "/100 label vectors partitioned and stratified");
}

// ---------------------------------------------------------------------------
// 5. planted recovery

Outcome criterion_planted() {
  const std::vector<std::string> informative = {"time", "verbal"};
  const std::vector<std::string> keep = {"age",    "ed_level",  "nb_action", "motivation",   "visual",
                                         "factual", "practical", "%_completion", "verbal", "time"};
  int ok[3] = {0, 0, 0};
  auto both = [&](std::vector<std::string> picked) {
    std::sort(picked.begin(), picked.end());
    return picked == informative;
  };
  for (std::uint64_t s = 0; s < 20; ++s) {
    PlantSpec ps;
    ps.seed = s;
    ps.n_learners = 200;
    ps.noise = 0.05;
    const auto synth = generate_bundle(ps);
    const auto enc = encode(filter_complete(build_feature_matrix(synth.bundle, true)).first);
    std::vector<std::size_t> groups;
    for (std::size_t g = 0; g < enc.manifest.size(); ++g) {
      if (std::find(keep.begin(), keep.end(), enc.manifest[g].spec) != keep.end()) groups.push_back(g);
    }
    const auto data = select_groups(enc, groups);
    if (data.manifest.size() != 10) return fail("expected 10 candidate features, got " + std::to_string(data.manifest.size()));
    ModelSpec spec;
    spec.tree.max_depth = 3;
    WrapperOptions wo;
    wo.cv.seed = derive_seed(s, "planted");
    wo.cv.folds = 10;
    wo.k = 2;
    // FE: the first two picks; BE and RFE: the last two survivors.
    ok[0] += both(forward_elimination(data, spec, wo).ordered);
    ok[1] += both(backward_elimination(data, spec, wo).ordered);
    ok[2] += both(rfe(data, spec, 2, wo.cv).ordered);
  }
  return check(ok[0] >= 18 && ok[1] >= 18 && ok[2] >= 18, "RFE " + std::to_string(ok[2]) + "/20, FE " +
                                                                std::to_string(ok[0]) + "/20, BE " +
                                                                std::to_string(ok[1]) + "/20 seeds");
}

// ---------------------------------------------------------------------------
// 6. leakage across the suite

Outcome criterion_leakage() {
  ExperimentConfig config;
  config.jobs = 1;
  config.balance_scope = BalanceScope::TrainFolds;
  const auto datasets = load_datasets(config);
  std::size_t checks = 0, violations = 0;
  for (auto kind : {ExperimentKind::Balancing, ExperimentKind::Models, ExperimentKind::Transfer,
                    ExperimentKind::Sources, ExperimentKind::Selection, ExperimentKind::Describe}) {
    config.experiment = kind;
    const auto out = run_experiment(config, datasets);
    checks += out.leakage_checks;
    violations += out.leakage_violations;
  }
  return check(checks > 0 && violations == 0,
               std::to_string(violations) + " violations in " + std::to_string(checks) + " balanced training folds");
}

// ---------------------------------------------------------------------------
// 7-12. public datasets

struct PublicData {
  std::optional<DatasetSource> d1, d2, d3;
};

DatasetSource source_of(DatasetId id, const std::string& kind, const std::string& path) {
  DatasetSource s;
  s.id = id;
  s.source = kind;
  s.path = path;
  return s;
}

PublicData find_public_data() {
  PublicData p;
  const char* root = std::getenv("EDM_DATA_DIR");
  if (!root) return p;
  const fs::path dir = root;
  if (fs::is_directory(dir / "d1")) p.d1 = source_of(DatasetId::D1, "d1", (dir / "d1").string());
  if (fs::is_directory(dir / "oulad")) p.d2 = source_of(DatasetId::D2, "oulad", (dir / "oulad").string());
  if (fs::is_regular_file(dir / "canvas.csv")) {
    p.d3 = source_of(DatasetId::D3, "canvas", (dir / "canvas.csv").string());
  } else if (fs::is_directory(dir / "canvas")) {
    for (const auto& e : fs::directory_iterator(dir / "canvas")) {
      if (e.path().extension() == ".csv") {
        p.d3 = source_of(DatasetId::D3, "canvas", e.path().string());
        break;
      }
    }
  }
  return p;
}

double cell(const ExperimentOutput& out, const std::string& table, const std::string& row, const std::string& col) {
  for (const auto& t : out.tables) {
    if (t.name != table) continue;
    const auto r = std::find(t.row_labels.begin(), t.row_labels.end(), row);
    const auto c = std::find(t.col_labels.begin(), t.col_labels.end(), col);
    if (r == t.row_labels.end() || c == t.col_labels.end()) break;
    return t.cells[static_cast<std::size_t>(r - t.row_labels.begin())][static_cast<std::size_t>(c - t.col_labels.begin())];
  }
  throw std::runtime_error("missing cell " + table + "[" + row + "][" + col + "]");
}

std::string note_value(const ExperimentOutput& out, const std::string& table, const std::string& prefix) {
  for (const auto& t : out.tables) {
    if (t.name != table) continue;
    for (const auto& n : t.notes) {
      if (n.rfind(prefix, 0) == 0) return n.substr(prefix.size());
    }
  }
  return "";
}

class SoftSuite {
 public:
  explicit SoftSuite(PublicData data) : data_(std::move(data)) {
    base_.jobs = 0;
    base_.datasets.clear();
    for (const auto* d : {&data_.d1, &data_.d2, &data_.d3}) {
      if (*d) base_.datasets.push_back(**d);
    }
  }

  Outcome reproduction_balancing() {
    if (!data_.d1 || !data_.d2 || !data_.d3) return skip("needs d1/, oulad/ and canvas.csv under EDM_DATA_DIR");
    const auto t0 = std::chrono::steady_clock::now();
    const auto& out = balancing();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double d1 = cell(out, "balancing_up_and_down", "accuracy", "D1");
    const double d2 = cell(out, "balancing_up_and_down", "accuracy", "D2");
    const double d3 = cell(out, "balancing_up_and_down", "accuracy", "D3");
    const bool ok = std::abs(d2 - 69.05) <= 5 && std::abs(d3 - 69.77) <= 5 && std::abs(d1 - 66.66) <= 10 && secs < 1800;
    return check(ok, "up_and_down accuracy D1 " + fmt("%.2f", d1) + " D2 " + fmt("%.2f", d2) + " D3 " +
                         fmt("%.2f", d3) + ", " + fmt("%.0f", secs) + " s");
  }

  Outcome reproduction_baseline() {
    if (!data_.d2) return skip("needs oulad/ under EDM_DATA_DIR");
    const double d2 = cell(balancing(), "balancing_none", "accuracy", "D2");
    return check(std::abs(d2 - 77.63) <= 5, "D2 accuracy without balancing " + fmt("%.2f", d2));
  }

  Outcome reproduction_sources_trend() {
    if (!data_.d2) return skip("needs oulad/ under EDM_DATA_DIR");
    const auto& out = sources();
    const double ab = cell(out, "source_ablation_D2", "A+B", "accuracy");
    const double d = cell(out, "source_ablation_D2", "D", "accuracy");
    return check(ab - d >= 10 && std::abs(ab - 75.18) <= 5,
                 "A+B " + fmt("%.2f", ab) + " vs D " + fmt("%.2f", d));
  }

  Outcome reproduction_importance() {
    if (!data_.d2) return skip("needs oulad/ under EDM_DATA_DIR");
    const auto& out = sources();
    const double d = cell(out, "source_ablation_D2", "D+A+B", "importance D");
    const double a = cell(out, "source_ablation_D2", "D+A+B", "importance A");
    const double b = cell(out, "source_ablation_D2", "D+A+B", "importance B");
    return check(d <= 5 && a + b >= 90, "D+A+B importance D " + fmt("%.2f", d) + ", A+B " + fmt("%.2f", a + b));
  }

  Outcome reproduction_selection() {
    if (!data_.d1) return skip("needs d1/ under EDM_DATA_DIR");
    ExperimentConfig c = base_;
    c.experiment = ExperimentKind::Selection;
    c.selection_dataset = DatasetId::D1;
    const auto out = run_experiment(c, loaded());
    const double k = cell(out, "selection_wrappers", "RFECV", "k");
    int with_both = 0;
    for (const std::string m : {"FE", "BE", "RFECV"}) {
      const auto sel = note_value(out, "selection_wrappers", m + " selected: ");
      const auto has = [&](const std::string& f) {
        return (", " + sel + ",").find(", " + f + ",") != std::string::npos;
      };
      with_both += has("time") && has("verbal");
    }
    return check(k >= 2 && k <= 4 && with_both >= 2,
                 "RFECV k*=" + fmt("%.0f", k) + " (target 3), time+verbal in " + std::to_string(with_both) + "/3 wrappers");
  }

  Outcome reproduction_transfer() {
    if (!data_.d1 || !data_.d2) return skip("needs d1/ and oulad/ under EDM_DATA_DIR");
    ExperimentConfig c = base_;
    c.experiment = ExperimentKind::Transfer;
    c.models = {ModelFamily::DecisionTree};
    const auto out = run_experiment(c, loaded());
    const double cross = cell(out, "transfer_DT", "train D2", "test D1");
    const double self = cell(out, "transfer_DT", "train D1", "test D1");
    return check(std::abs(cross - self) <= 15, "DT on D1: trained on D2 " + fmt("%.2f", cross) + ", trained on D1 " +
                                                    fmt("%.2f", self));
  }

 private:
  const std::vector<LoadedDataset>& loaded() {
    if (!loaded_) loaded_ = load_datasets(base_);
    return *loaded_;
  }
  const ExperimentOutput& balancing() {
    if (!balancing_) {
      ExperimentConfig c = base_;
      c.experiment = ExperimentKind::Balancing;
      balancing_ = run_experiment(c, loaded());
    }
    return *balancing_;
  }
  const ExperimentOutput& sources() {
    if (!sources_) {
      ExperimentConfig c = base_;
      c.experiment = ExperimentKind::Sources;
      c.ablation_dataset = DatasetId::D2;
      c.categories = "DAB";
      sources_ = run_experiment(c, loaded());
    }
    return *sources_;
  }

  PublicData data_;
  ExperimentConfig base_;
  std::optional<std::vector<LoadedDataset>> loaded_;
  std::optional<ExperimentOutput> balancing_, sources_;
};

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    bool hard;
    std::function<Outcome()> run;
  };
  SoftSuite soft(find_public_data());
  const std::vector<Criterion> criteria = {
      {1, "CART matches naive oracle", true, criterion_cart},
      {2, "resampling invariants", true, criterion_resampling},
      {3, "statistics oracles", true, criterion_statistics},
      {4, "stratified 10-fold", true, criterion_folds},
      {5, "planted feature recovery", true, criterion_planted},
      {6, "no leakage into training folds", true, criterion_leakage},
      {7, "up+down accuracy per dataset", false, [&] { return soft.reproduction_balancing(); }},
      {8, "D2 unbalanced baseline", false, [&] { return soft.reproduction_baseline(); }},
      {9, "D2 source combination trend", false, [&] { return soft.reproduction_sources_trend(); }},
      {10, "D2 category importance", false, [&] { return soft.reproduction_importance(); }},
      {11, "D1 wrapper selection", false, [&] { return soft.reproduction_selection(); }},
      {12, "D2 to D1 transfer", false, [&] { return soft.reproduction_transfer(); }},
  };
  int hard_failures = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Fail ? "FAIL" : "SKIP";
    std::printf("%s %2d %s: %s [%.1fs]\n", tag, c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (c.hard && o.kind != Outcome::Pass) ++hard_failures;
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("total %.1fs, hard failures: %d\n", total, hard_failures);
  return hard_failures == 0 ? 0 : 1;
}
