#include "edm/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "edm/csv.hpp"
#include "edm/errors.hpp"

namespace edm {

char to_char(SourceCategory c) {
  switch (c) {
    case SourceCategory::D: return 'D';
    case SourceCategory::A: return 'A';
    case SourceCategory::B: return 'B';
    case SourceCategory::P: return 'P';
    case SourceCategory::L: return 'L';
  }
  return '?';
}

SourceCategory parse_category(char c) {
  switch (c) {
    case 'D': return SourceCategory::D;
    case 'A': return SourceCategory::A;
    case 'B': return SourceCategory::B;
    case 'P': return SourceCategory::P;
    case 'L': return SourceCategory::L;
    default: throw SchemaError(std::string("unknown source category: ") + c);
  }
}

std::set<SourceCategory> parse_categories(std::string_view text) {
  std::set<SourceCategory> out;
  for (char c : text) {
    if (c == '+' || c == ' ' || c == ',') continue;
    out.insert(parse_category(c));
  }
  return out;
}

std::string to_string(const std::set<SourceCategory>& cats) {
  // Paper order D, A, B, P, L is the enum order.
  std::string out;
  for (auto c : cats) {
    if (!out.empty()) out += "+";
    out += to_char(c);
  }
  return out;
}

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Numeric: return "numeric";
    case FeatureKind::Ordinal: return "ordinal";
    case FeatureKind::Categorical: return "categorical";
  }
  return "numeric";
}

namespace {

FeatureKind parse_kind(std::string_view s) {
  if (s == "numeric") return FeatureKind::Numeric;
  if (s == "ordinal") return FeatureKind::Ordinal;
  if (s == "categorical") return FeatureKind::Categorical;
  throw SchemaError("unknown feature kind: " + std::string(s));
}

const std::vector<std::string> kGenderLevels = {"F", "M", "NA"};
const std::vector<std::string> kEdFieldLevels = {"stem", "health", "humanities", "business"};
const std::vector<std::string> kMotivationLevels = {"little", "moderate", "very"};

FeatureSpec numeric(std::string name, SourceCategory c, std::optional<std::pair<double, double>> range = {}) {
  return {std::move(name), c, FeatureKind::Numeric, {}, range};
}

std::string lower(std::string_view v) {
  std::string out(v);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

// Exact level match, else the level that prefixes the lowercased value
// ("very interested" -> "very").
std::optional<std::size_t> match_level(const std::string& value, const std::vector<std::string>& levels) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == value) return i;
  }
  const std::string l = lower(value);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (l.starts_with(lower(levels[i]))) return i;
  }
  return std::nullopt;
}

Cell opt_cell(const std::optional<int>& v) { return v ? Cell(static_cast<double>(*v)) : Cell{}; }
Cell opt_cell(const std::optional<std::string>& v) { return v ? Cell(*v) : Cell{}; }

// Missing cells become quarantine flags.
std::vector<std::string> missing_flags(const std::vector<FeatureSpec>& specs, const std::vector<Cell>& cells) {
  std::vector<std::string> flags;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (std::holds_alternative<std::monostate>(cells[i])) flags.push_back("missing " + specs[i].name);
  }
  return flags;
}

}  // namespace

std::optional<std::size_t> FeatureMatrix::column(std::string_view name) const {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].name == name) return i;
  }
  return std::nullopt;
}

void FeatureMatrix::add_row(std::string id, std::vector<Cell> values, std::vector<std::string> row_flags) {
  if (values.size() != specs.size()) throw std::invalid_argument("add_row: one value per spec required");
  row_ids.push_back(std::move(id));
  cells.push_back(std::move(values));
  flags.push_back(std::move(row_flags));
}

// ---------------------------------------------------------------------------

std::vector<std::optional<int>> derive_labels(const DatasetBundle& bundle, const LabelRule& rule) {
  std::vector<std::optional<int>> labels(bundle.profiles.size());
  if (bundle.dataset_id == DatasetId::D1) {
    // Last final-quiz attempt per learner (attempts are sorted by start time).
    std::unordered_map<std::string, const QuizAttempt*> final_attempt;
    for (const auto& a : bundle.quiz_attempts) {
      if (a.is_final) final_attempt[a.learner_id] = &a;
    }
    for (std::size_t i = 0; i < bundle.profiles.size(); ++i) {
      auto it = final_attempt.find(bundle.profiles[i].learner_id);
      if (it == final_attempt.end()) continue;
      labels[i] = it->second->grade / it->second->max_grade >= rule.pass_threshold ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < bundle.profiles.size(); ++i) {
      const auto* agg = bundle.find_aggregate(bundle.profiles[i].learner_id);
      if (!agg) continue;
      if (bundle.dataset_id == DatasetId::D2) {
        if (!agg->final_result) continue;
        const auto& r = *agg->final_result;
        if (r == "Pass" || r == "Distinction") labels[i] = 1;
        else if (r == "Fail" || r == "Withdrawn") labels[i] = 0;
      } else {
        auto it = agg->outcome_values.find(rule.d3_column);
        if (it == agg->outcome_values.end()) continue;
        labels[i] = it->second >= rule.d3_threshold.value_or(rule.pass_threshold) ? 1 : 0;
      }
    }
  }
  return labels;
}

FeatureMatrix build_minimal_features(const DatasetBundle& bundle) {
  FeatureMatrix m;
  const bool d1 = bundle.dataset_id == DatasetId::D1;
  m.specs.push_back(numeric("age", SourceCategory::D, d1 ? std::optional(std::pair(18.0, 99.0)) : std::nullopt));
  m.specs.push_back({"gender", SourceCategory::D, FeatureKind::Categorical, kGenderLevels, {}});
  m.specs.push_back({"ed_level", SourceCategory::D, FeatureKind::Ordinal, {},
                     d1 ? std::optional(std::pair(1.0, 8.0)) : std::nullopt});

  if (d1) {
    m.specs.push_back({"ed_field", SourceCategory::D, FeatureKind::Categorical, kEdFieldLevels, {}});
    m.specs.push_back(numeric("avrg_grade", SourceCategory::A, std::pair(0.0, 10.0)));
    m.specs.push_back(numeric("%_completion", SourceCategory::B, std::pair(0.0, 1.0)));
    m.specs.push_back(numeric("nb_action", SourceCategory::B));
    m.specs.push_back(numeric("time", SourceCategory::B));
    m.specs.push_back({"motivation", SourceCategory::P, FeatureKind::Ordinal, kMotivationLevels, {}});
  } else if (bundle.dataset_id == DatasetId::D2) {
    m.specs.push_back(numeric("avrg_grade", SourceCategory::A, std::pair(0.0, 10.0)));
    m.specs.push_back(numeric("sum_click", SourceCategory::B));
  } else {
    m.specs.push_back(numeric("n_events", SourceCategory::B));
  }

  // Non-final grade average on a 0-10 scale.
  struct GradeSum {
    double sum = 0.0;
    std::size_t n = 0;
    double dwell = 0.0;
  };
  std::unordered_map<std::string, GradeSum> grades;
  for (const auto& a : bundle.quiz_attempts) {
    auto& g = grades[a.learner_id];
    g.dwell += static_cast<double>(a.time_finished - a.time_started);
    if (a.is_final) continue;
    g.sum += 10.0 * a.grade / a.max_grade;
    ++g.n;
  }

  // Course items: every quiz plus every item that appears in any event.
  std::unordered_set<std::string> universe;
  for (const auto& q : bundle.quiz_items) universe.insert(q.quiz_id);
  for (const auto& e : bundle.events) universe.insert(e.item_id);
  std::unordered_map<std::string, std::unordered_set<std::string>> touched;
  std::unordered_map<std::string, double> actions;
  for (const auto& e : bundle.events) {
    touched[e.learner_id].insert(e.item_id);
    const bool counts = (e.item_kind == ItemKind::Resource && e.action == Action::View) ||
                        (e.item_kind == ItemKind::Activity && e.action == Action::Attempt);
    if (counts) actions[e.learner_id] += 1.0;
  }

  for (const auto& p : bundle.profiles) {
    std::vector<Cell> row;
    std::vector<std::string> extra;
    row.push_back(opt_cell(p.age));
    row.emplace_back(std::string(to_string(p.gender)));
    row.push_back(opt_cell(p.ed_level));
    auto avrg = [&]() -> Cell {
      auto it = grades.find(p.learner_id);
      if (it == grades.end() || it->second.n == 0) {
        extra.push_back("avrg_grade undefined: no non-final quiz attempts");
        return Cell{};
      }
      return it->second.sum / static_cast<double>(it->second.n);
    };
    if (d1) {
      row.push_back(opt_cell(p.ed_field));
      row.push_back(avrg());
      const double seen = touched.count(p.learner_id) ? static_cast<double>(touched[p.learner_id].size()) : 0.0;
      row.emplace_back(universe.empty() ? 0.0 : seen / static_cast<double>(universe.size()));
      row.emplace_back(actions.count(p.learner_id) ? actions[p.learner_id] : 0.0);
      row.emplace_back(grades.count(p.learner_id) ? grades[p.learner_id].dwell : 0.0);
      row.push_back(opt_cell(p.motivation));
    } else {
      if (bundle.dataset_id == DatasetId::D2) row.push_back(avrg());
      const auto* agg = bundle.find_aggregate(p.learner_id);
      row.push_back(agg && agg->n_interactions ? Cell(*agg->n_interactions) : Cell{});
    }
    auto flags = missing_flags(m.specs, row);
    // Undefined averages already carry a more specific reason.
    std::erase_if(flags, [&](const std::string& f) { return f == "missing avrg_grade" && !extra.empty(); });
    flags.insert(flags.end(), extra.begin(), extra.end());
    m.add_row(p.learner_id, std::move(row), std::move(flags));
  }
  return m;
}

FeatureMatrix build_additional_features(const DatasetBundle& bundle) {
  if (bundle.question_results.empty() || bundle.quiz_items.empty()) {
    throw DataError("additional features need question results and quiz metadata (D1-shaped bundle)");
  }
  FeatureMatrix m;
  static const char* kNames[] = {"visual", "verbal", "factual", "practical", "memory", "deduction"};
  for (const char* n : kNames) m.specs.push_back(numeric(n, SourceCategory::L, std::pair(0.0, 1.0)));

  std::unordered_map<std::string, const QuizItemMeta*> quizzes;
  for (const auto& q : bundle.quiz_items) quizzes[q.quiz_id] = &q;
  struct Tally {
    std::array<double, 6> correct{};
    std::array<double, 6> total{};
  };
  std::unordered_map<std::string, Tally> tallies;
  for (const auto& r : bundle.question_results) {
    auto qit = quizzes.find(r.quiz_id);
    if (qit == quizzes.end() || qit->second->is_final) continue;
    const auto* q = qit->second;
    auto& t = tallies[r.learner_id];
    auto count = [&](std::size_t k) {
      t.total[k] += 1.0;
      if (r.correct) t.correct[k] += 1.0;
    };
    if (q->format_tag == FormatTag::Visual) count(0);
    if (q->format_tag == FormatTag::Verbal) count(1);
    if (q->content_tag == ContentTag::Factual) count(2);
    if (q->content_tag == ContentTag::Practical) count(3);
    count(r.skill_tag == SkillTag::Memory ? 4 : 5);
  }
  for (const auto& p : bundle.profiles) {
    const Tally t = tallies.count(p.learner_id) ? tallies[p.learner_id] : Tally{};
    std::vector<Cell> row;
    std::vector<std::string> flags;
    for (std::size_t k = 0; k < 6; ++k) {
      if (t.total[k] == 0.0) {
        row.emplace_back();
        flags.push_back(std::string("no questions tagged ") + kNames[k]);
      } else {
        row.emplace_back(t.correct[k] / t.total[k]);
      }
    }
    m.add_row(p.learner_id, std::move(row), std::move(flags));
  }
  return m;
}

FeatureMatrix join_columns(const FeatureMatrix& left, const FeatureMatrix& right) {
  if (left.row_ids != right.row_ids) throw std::invalid_argument("join_columns: row ids differ");
  FeatureMatrix out = left;
  for (const auto& s : right.specs) {
    if (out.column(s.name)) throw std::invalid_argument("join_columns: duplicate feature " + s.name);
    out.specs.push_back(s);
  }
  for (std::size_t r = 0; r < out.rows(); ++r) {
    out.cells[r].insert(out.cells[r].end(), right.cells[r].begin(), right.cells[r].end());
    out.flags[r].insert(out.flags[r].end(), right.flags[r].begin(), right.flags[r].end());
  }
  if (!out.labels && right.labels) out.labels = right.labels;
  return out;
}

void attach_labels(FeatureMatrix& matrix, std::span<const std::optional<int>> labels) {
  if (labels.size() != matrix.rows()) throw std::invalid_argument("attach_labels: size mismatch");
  matrix.labels = std::vector<int>(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) (*matrix.labels)[i] = *labels[i];
    else matrix.flags[i].push_back("no final outcome");
  }
}

FeatureMatrix build_feature_matrix(const DatasetBundle& bundle, bool with_additional, const LabelRule& rule) {
  FeatureMatrix m = build_minimal_features(bundle);
  if (with_additional) m = join_columns(m, build_additional_features(bundle));
  const auto labels = derive_labels(bundle, rule);
  attach_labels(m, labels);
  return m;
}

std::pair<FeatureMatrix, RemovalLog> filter_complete(const FeatureMatrix& matrix) {
  FeatureMatrix out;
  out.specs = matrix.specs;
  if (matrix.labels) out.labels.emplace();
  RemovalLog log;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (!matrix.flags[r].empty()) {
      log.removed.push_back({matrix.row_ids[r], matrix.flags[r]});
      continue;
    }
    out.add_row(matrix.row_ids[r], matrix.cells[r]);
    if (matrix.labels) out.labels->push_back((*matrix.labels)[r]);
  }
  return {std::move(out), std::move(log)};
}

FeatureMatrix select_categories(const FeatureMatrix& matrix, const std::set<SourceCategory>& keep) {
  FeatureMatrix out;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < matrix.specs.size(); ++i) {
    if (keep.count(matrix.specs[i].category)) {
      cols.push_back(i);
      out.specs.push_back(matrix.specs[i]);
    }
  }
  out.labels = matrix.labels;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    std::vector<Cell> row;
    for (auto c : cols) row.push_back(matrix.cells[r][c]);
    out.add_row(matrix.row_ids[r], std::move(row), matrix.flags[r]);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> EncodedMatrix::column_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

EncodedMatrix encode(const FeatureMatrix& matrix, const EncodePolicy& policy) {
  EncodedMatrix out;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.specs.size(); ++c) {
      if (std::holds_alternative<std::monostate>(matrix.cells[r][c]) && !policy.drop.count(matrix.specs[c].name)) {
        throw std::invalid_argument("encode: missing value for " + matrix.specs[c].name + " in row " +
                                    matrix.row_ids[r] + " (run filter_complete first)");
      }
    }
  }
  // Column layout.
  std::vector<std::size_t> used_specs;
  for (std::size_t s = 0; s < matrix.specs.size(); ++s) {
    const auto& spec = matrix.specs[s];
    if (policy.drop.count(spec.name)) continue;
    used_specs.push_back(s);
    ManifestEntry entry{spec.name, spec.category, spec.kind, {}, spec.levels};
    if (spec.kind == FeatureKind::Categorical) {
      for (const auto& level : spec.levels) {
        entry.columns.push_back(out.columns.size());
        out.columns.push_back({spec.name + "=" + level, spec.category, spec.name});
      }
    } else {
      entry.columns.push_back(out.columns.size());
      out.columns.push_back({spec.name, spec.category, spec.name});
    }
    out.manifest.push_back(std::move(entry));
  }
  out.X = Matrix(matrix.rows(), out.columns.size());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t k = 0; k < used_specs.size(); ++k) {
      const auto& spec = matrix.specs[used_specs[k]];
      const auto& cell = matrix.cells[r][used_specs[k]];
      const auto& cols = out.manifest[k].columns;
      if (const double* v = std::get_if<double>(&cell)) {
        if (spec.kind == FeatureKind::Categorical) {
          throw SchemaError("encode: categorical feature " + spec.name + " holds a number");
        }
        out.X(r, cols[0]) = *v;
        continue;
      }
      const auto& text = std::get<std::string>(cell);
      auto level = match_level(text, spec.levels);
      if (!level) throw SchemaError("encode: unseen level '" + text + "' for feature " + spec.name);
      if (spec.kind == FeatureKind::Categorical) {
        out.X(r, cols[*level]) = 1.0;
      } else {
        out.X(r, cols[0]) = static_cast<double>(*level);
      }
    }
  }
  out.row_ids = matrix.row_ids;
  if (matrix.labels) out.labels = *matrix.labels;
  out.origin.resize(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) out.origin[r] = static_cast<std::int64_t>(r);
  return out;
}

EncodedMatrix take_rows(const EncodedMatrix& m, std::span<const std::size_t> rows) {
  EncodedMatrix out;
  out.columns = m.columns;
  out.manifest = m.manifest;
  out.standardization = m.standardization;
  out.X = m.X.take_rows(rows);
  for (auto r : rows) {
    if (!m.labels.empty()) out.labels.push_back(m.labels[r]);
    if (!m.row_ids.empty()) out.row_ids.push_back(m.row_ids[r]);
    if (!m.origin.empty()) out.origin.push_back(m.origin[r]);
  }
  return out;
}

EncodedMatrix select_groups(const EncodedMatrix& m, std::span<const std::size_t> groups) {
  EncodedMatrix out;
  std::vector<std::size_t> cols;
  for (auto g : groups) {
    if (g >= m.manifest.size()) throw std::out_of_range("select_groups: group index");
    ManifestEntry entry = m.manifest[g];
    for (auto& c : entry.columns) {
      cols.push_back(c);
      out.columns.push_back(m.columns[c]);
      c = out.columns.size() - 1;
    }
    out.manifest.push_back(std::move(entry));
  }
  out.X = m.X.take_cols(cols);
  out.labels = m.labels;
  out.row_ids = m.row_ids;
  out.origin = m.origin;
  if (m.standardization) {
    StandardizationStats s;
    for (auto c : cols) {
      s.mean.push_back(m.standardization->mean[c]);
      s.scale.push_back(m.standardization->scale[c]);
      s.zero_variance.push_back(m.standardization->zero_variance[c]);
    }
    out.standardization = std::move(s);
  }
  return out;
}

EncodedMatrix select_categories(const EncodedMatrix& m, const std::set<SourceCategory>& keep) {
  std::vector<std::size_t> groups;
  for (std::size_t g = 0; g < m.manifest.size(); ++g) {
    if (keep.count(m.manifest[g].category)) groups.push_back(g);
  }
  return select_groups(m, groups);
}

std::pair<EncodedMatrix, StandardizationStats> standardize(const EncodedMatrix& m,
                                                           const std::optional<StandardizationStats>& fit) {
  StandardizationStats stats;
  const std::size_t n = m.rows();
  if (fit) {
    if (fit->mean.size() != m.cols()) throw std::invalid_argument("standardize: stats width mismatch");
    stats = *fit;
  } else {
    stats.mean.assign(m.cols(), 0.0);
    stats.scale.assign(m.cols(), 1.0);
    stats.zero_variance.assign(m.cols(), false);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += m.X(r, c);
      mean = n ? mean / static_cast<double>(n) : 0.0;
      double var = 0.0;
      for (std::size_t r = 0; r < n; ++r) var += (m.X(r, c) - mean) * (m.X(r, c) - mean);
      var = n ? var / static_cast<double>(n) : 0.0;
      const double sd = std::sqrt(var);
      if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
        stats.zero_variance[c] = true;  // passthrough: mean 0, scale 1
      } else {
        stats.mean[c] = mean;
        stats.scale[c] = sd;
      }
    }
  }
  EncodedMatrix out = m;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out.X(r, c) = (m.X(r, c) - stats.mean[c]) / stats.scale[c];
  }
  out.standardization = stats;
  return {std::move(out), std::move(stats)};
}

std::vector<EncodedMatrix> common_feature_view(std::span<const DatasetBundle> bundles, const LabelRule& rule) {
  if (bundles.size() < 2) throw std::invalid_argument("common_feature_view: at least two bundles required");
  std::vector<EncodedMatrix> out;
  for (const auto& bundle : bundles) {
    FeatureMatrix full = build_feature_matrix(bundle, false, rule);
    auto [complete, log] = filter_complete(full);
    const char* interactions = bundle.dataset_id == DatasetId::D1   ? "nb_action"
                               : bundle.dataset_id == DatasetId::D2 ? "sum_click"
                                                                    : "n_events";
    FeatureMatrix view;
    view.specs = {numeric("age", SourceCategory::D), {"ed_level", SourceCategory::D, FeatureKind::Ordinal, {}, {}},
                  numeric("n_interactions", SourceCategory::B)};
    std::vector<std::size_t> src;
    for (const char* name : {"age", "ed_level", interactions}) {
      auto c = complete.column(name);
      if (!c) {
        throw DataError(std::string("common_feature_view: ") + std::string(to_string(bundle.dataset_id)) +
                        " lacks " + name);
      }
      src.push_back(*c);
    }
    for (std::size_t r = 0; r < complete.rows(); ++r) {
      view.add_row(complete.row_ids[r], {complete.cells[r][src[0]], complete.cells[r][src[1]], complete.cells[r][src[2]]});
    }
    view.labels = complete.labels;
    out.push_back(standardize(encode(view)).first);
  }
  return out;
}

std::vector<std::pair<std::string, double>> aggregate_by_group(const EncodedMatrix& m,
                                                               std::span<const double> per_column) {
  if (per_column.size() != m.cols()) throw std::invalid_argument("aggregate_by_group: width mismatch");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& g : m.manifest) {
    double total = 0.0;
    for (auto c : g.columns) total += per_column[c];
    out.emplace_back(g.spec, total);
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_feature_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& s : matrix.specs) {
    std::string levels;
    for (const auto& l : s.levels) levels += (levels.empty() ? "" : "|") + l;
    out << "# feature," << csv::escape(s.name) << ',' << to_char(s.category) << ',' << to_string(s.kind) << ','
        << (s.declared_range ? csv::format_double(s.declared_range->first) : "") << ','
        << (s.declared_range ? csv::format_double(s.declared_range->second) : "") << ',' << csv::escape(levels)
        << '\n';
  }
  std::vector<std::string> header = {"learner_id"};
  for (const auto& s : matrix.specs) header.push_back(s.name);
  if (matrix.labels) header.push_back("label");
  header.push_back("flags");
  csv::write_row(out, header);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    std::vector<std::string> row = {matrix.row_ids[r]};
    for (const auto& cell : matrix.cells[r]) {
      if (const double* v = std::get_if<double>(&cell)) row.push_back(csv::format_double(*v));
      else if (const auto* t = std::get_if<std::string>(&cell)) row.push_back(*t);
      else row.emplace_back();
    }
    if (matrix.labels) row.push_back(std::to_string((*matrix.labels)[r]));
    std::string flags;
    for (const auto& f : matrix.flags[r]) flags += (flags.empty() ? "" : "|") + f;
    row.push_back(flags);
    csv::write_row(out, row);
  }
}

namespace {
std::vector<std::string> split_bar(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find('|', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}
}  // namespace

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  FeatureMatrix m;
  for (const auto& comment : table.comments) {
    auto meta = csv::parse(comment + "\n");
    if (meta.header.size() != 7 || meta.header[0] != "feature") continue;
    const auto& f = meta.header;
    FeatureSpec s;
    s.name = f[1];
    s.category = parse_category(f[2].empty() ? '?' : f[2][0]);
    s.kind = parse_kind(f[3]);
    if (!f[4].empty()) s.declared_range = std::pair(*csv::parse_double(f[4]), *csv::parse_double(f[5]));
    s.levels = split_bar(f[6]);
    m.specs.push_back(std::move(s));
  }
  const bool has_label = table.find("label").has_value();
  if (has_label) m.labels.emplace();
  for (const auto& row : table.rows) {
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < m.specs.size(); ++c) {
      const auto& text = row.at(c + 1);
      if (text.empty()) cells.emplace_back();
      else if (m.specs[c].kind == FeatureKind::Numeric || m.specs[c].levels.empty()) {
        auto v = csv::parse_double(text);
        if (!v) throw SchemaError(path.string() + ": non-numeric value '" + text + "' for " + m.specs[c].name);
        cells.emplace_back(*v);
      } else {
        cells.emplace_back(text);
      }
    }
    std::size_t next = m.specs.size() + 1;
    if (has_label) m.labels->push_back(static_cast<int>(*csv::parse_int(row.at(next++))));
    m.add_row(row.at(0), std::move(cells), split_bar(row.at(next)));
  }
  return m;
}

std::string manifest_json(const EncodedMatrix& m) {
  nlohmann::ordered_json j;
  j["columns"] = nlohmann::json::array();
  for (const auto& c : m.columns) {
    j["columns"].push_back({{"name", c.name}, {"category", std::string(1, to_char(c.category))}, {"source", c.source}});
  }
  j["features"] = nlohmann::json::array();
  for (const auto& g : m.manifest) {
    j["features"].push_back({{"spec", g.spec},
                             {"category", std::string(1, to_char(g.category))},
                             {"kind", std::string(to_string(g.kind))},
                             {"columns", g.columns},
                             {"levels", g.levels}});
  }
  if (m.standardization) {
    j["standardization"] = {{"mean", m.standardization->mean},
                            {"scale", m.standardization->scale},
                            {"zero_variance", m.standardization->zero_variance}};
  }
  return j.dump(2);
}

}  // namespace edm
