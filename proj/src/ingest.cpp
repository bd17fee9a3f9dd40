#include "edm/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "edm/csv.hpp"
#include "edm/digest.hpp"
#include "edm/errors.hpp"

namespace edm {

namespace fs = std::filesystem;

std::string_view to_string(DatasetId id) {
  switch (id) {
    case DatasetId::D1: return "D1";
    case DatasetId::D2: return "D2";
    case DatasetId::D3: return "D3";
  }
  return "?";
}

DatasetId parse_dataset_id(std::string_view text) {
  if (text == "D1" || text == "d1") return DatasetId::D1;
  if (text == "D2" || text == "d2") return DatasetId::D2;
  if (text == "D3" || text == "d3") return DatasetId::D3;
  throw SchemaError("unknown dataset id: " + std::string(text));
}

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::F: return "F";
    case Gender::M: return "M";
    case Gender::NA: return "NA";
  }
  return "NA";
}
std::string_view to_string(ItemKind k) { return k == ItemKind::Activity ? "activity" : "resource"; }
std::string_view to_string(Action a) { return a == Action::View ? "view" : "attempt"; }
std::string_view to_string(SkillTag t) { return t == SkillTag::Memory ? "memory" : "deduction"; }
std::string_view to_string(FormatTag t) {
  switch (t) {
    case FormatTag::Visual: return "visual";
    case FormatTag::Verbal: return "verbal";
    case FormatTag::None: return "none";
  }
  return "none";
}
std::string_view to_string(ContentTag t) {
  switch (t) {
    case ContentTag::Factual: return "factual";
    case ContentTag::Practical: return "practical";
    case ContentTag::None: return "none";
  }
  return "none";
}

const LearnerProfile* DatasetBundle::find_profile(std::string_view learner_id) const {
  auto it = std::lower_bound(profiles.begin(), profiles.end(), learner_id,
                             [](const LearnerProfile& p, std::string_view id) { return p.learner_id < id; });
  if (it != profiles.end() && it->learner_id == learner_id) return &*it;
  for (const auto& p : profiles) {  // unsorted bundles built by hand
    if (p.learner_id == learner_id) return &p;
  }
  return nullptr;
}

const LearnerAggregate* DatasetBundle::find_aggregate(std::string_view learner_id) const {
  auto it = std::lower_bound(aggregates.begin(), aggregates.end(), learner_id,
                             [](const LearnerAggregate& a, std::string_view id) { return a.learner_id < id; });
  if (it != aggregates.end() && it->learner_id == learner_id) return &*it;
  for (const auto& a : aggregates) {
    if (a.learner_id == learner_id) return &a;
  }
  return nullptr;
}

const QuizItemMeta* DatasetBundle::find_quiz(std::string_view quiz_id) const {
  for (const auto& q : quiz_items) {
    if (q.quiz_id == quiz_id) return &q;
  }
  return nullptr;
}

void DatasetBundle::sort_canonical() {
  std::stable_sort(profiles.begin(), profiles.end(),
                   [](const auto& a, const auto& b) { return a.learner_id < b.learner_id; });
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return std::tie(a.learner_id, a.timestamp) < std::tie(b.learner_id, b.timestamp);
  });
  std::stable_sort(quiz_attempts.begin(), quiz_attempts.end(), [](const auto& a, const auto& b) {
    return std::tie(a.learner_id, a.time_started, a.quiz_id) <
           std::tie(b.learner_id, b.time_started, b.quiz_id);
  });
  std::stable_sort(question_results.begin(), question_results.end(), [](const auto& a, const auto& b) {
    return std::tie(a.learner_id, a.quiz_id, a.question_id) <
           std::tie(b.learner_id, b.quiz_id, b.question_id);
  });
  std::stable_sort(quiz_items.begin(), quiz_items.end(),
                   [](const auto& a, const auto& b) { return a.quiz_id < b.quiz_id; });
  std::stable_sort(aggregates.begin(), aggregates.end(),
                   [](const auto& a, const auto& b) { return a.learner_id < b.learner_id; });
}

bool content_equal(const DatasetBundle& a, const DatasetBundle& b) {
  return a.dataset_id == b.dataset_id && a.profiles == b.profiles && a.events == b.events &&
         a.quiz_attempts == b.quiz_attempts && a.question_results == b.question_results &&
         a.quiz_items == b.quiz_items && a.aggregates == b.aggregates;
}

// ---------------------------------------------------------------------------
// D1 canonical CSVs

namespace {

bool is_na(std::string_view v) { return v.empty() || v == "NA" || v == "na" || v == "N/A"; }

std::string lower(std::string_view v) {
  std::string out(v);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<bool> parse_bool(std::string_view v) {
  const std::string l = lower(v);
  if (l == "1" || l == "true" || l == "yes" || l == "y") return true;
  if (l == "0" || l == "false" || l == "no" || l == "n") return false;
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view v) {
  const std::string l = lower(v);
  if (l == "f" || l == "female") return Gender::F;
  if (l == "m" || l == "male") return Gender::M;
  if (l.empty() || l == "na" || l == "o" || l == "other") return Gender::NA;
  return std::nullopt;
}

std::optional<ItemKind> parse_item_kind(std::string_view v) {
  if (v == "activity") return ItemKind::Activity;
  if (v == "resource") return ItemKind::Resource;
  return std::nullopt;
}

std::optional<Action> parse_action(std::string_view v) {
  if (v == "view") return Action::View;
  if (v == "attempt") return Action::Attempt;
  return std::nullopt;
}

std::optional<SkillTag> parse_skill(std::string_view v) {
  if (v == "memory") return SkillTag::Memory;
  if (v == "deduction") return SkillTag::Deduction;
  return std::nullopt;
}

std::optional<FormatTag> parse_format(std::string_view v) {
  if (v == "visual") return FormatTag::Visual;
  if (v == "verbal") return FormatTag::Verbal;
  if (v == "none" || v.empty()) return FormatTag::None;
  return std::nullopt;
}

std::optional<ContentTag> parse_content(std::string_view v) {
  if (v == "factual") return ContentTag::Factual;
  if (v == "practical") return ContentTag::Practical;
  if (v == "none" || v.empty()) return ContentTag::None;
  return std::nullopt;
}

// Column lookup for one canonical file; all columns are required.
struct Columns {
  std::vector<std::size_t> index;
  Columns(const csv::Table& t, std::initializer_list<std::string_view> names, const std::string& file) {
    for (auto n : names) index.push_back(t.require(n, file));
  }
  const std::string& get(const std::vector<std::string>& row, std::size_t i) const {
    static const std::string kEmpty;
    return index[i] < row.size() ? row[index[i]] : kEmpty;
  }
};

void issue(DatasetBundle& b, const std::string& file, std::size_t row, std::string kind, std::string msg) {
  b.load_issues.push_back({file, row, std::move(kind), std::move(msg)});
}

}  // namespace

DatasetBundle load_d1(const fs::path& directory) {
  static const char* kFiles[] = {"learners.csv", "events.csv", "quiz_attempts.csv", "quiz_items.csv",
                                 "question_results.csv"};
  DatasetBundle b;
  b.dataset_id = DatasetId::D1;
  for (const char* f : kFiles) {
    if (!fs::exists(directory / f)) throw SchemaError(std::string("missing file: ") + f + " in " + directory.string());
    b.provenance.push_back({f, file_sha256(directory / f)});
  }

  // learners.csv
  {
    const std::string file = "learners.csv";
    auto t = csv::read_file(directory / file);
    Columns c(t, {"learner_id", "age", "gender", "ed_level", "ed_field", "native_lang", "motivation", "descr_pos",
                  "descr_neg"},
              file);
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      LearnerProfile p;
      p.learner_id = c.get(row, 0);
      if (p.learner_id.empty()) {
        issue(b, file, r, "missing_field", "learner_id empty");
        continue;
      }
      if (!seen.insert(p.learner_id).second) {
        throw DataError(file + ": duplicate learner_id '" + p.learner_id + "' at row " + std::to_string(r));
      }
      if (const auto& v = c.get(row, 1); !is_na(v)) {
        if (auto a = csv::parse_int(v)) p.age = static_cast<int>(*a);
        else issue(b, file, r, "parse", "age not an integer: " + v);
      }
      if (auto g = parse_gender(c.get(row, 2))) p.gender = *g;
      else issue(b, file, r, "parse", "unknown gender: " + c.get(row, 2));
      if (const auto& v = c.get(row, 3); !is_na(v)) {
        if (auto e = csv::parse_int(v)) p.ed_level = static_cast<int>(*e);
        else issue(b, file, r, "parse", "ed_level not an integer: " + v);
      }
      if (const auto& v = c.get(row, 4); !is_na(v)) p.ed_field = v;
      if (const auto& v = c.get(row, 5); !is_na(v)) {
        if (auto n = parse_bool(v)) p.native_lang = *n;
        else issue(b, file, r, "parse", "native_lang not boolean: " + v);
      }
      if (const auto& v = c.get(row, 6); !is_na(v)) p.motivation = v;
      p.descr_pos = c.get(row, 7);
      p.descr_neg = c.get(row, 8);
      b.profiles.push_back(std::move(p));
    }
  }
  std::unordered_set<std::string> learners;
  for (const auto& p : b.profiles) learners.insert(p.learner_id);

  // quiz_items.csv
  std::unordered_map<std::string, bool> quiz_final;
  {
    const std::string file = "quiz_items.csv";
    auto t = csv::read_file(directory / file);
    Columns c(t, {"quiz_id", "format_tag", "content_tag", "is_final"}, file);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      QuizItemMeta q;
      q.quiz_id = c.get(row, 0);
      auto fmt = parse_format(c.get(row, 1));
      auto cnt = parse_content(c.get(row, 2));
      auto fin = parse_bool(c.get(row, 3));
      if (q.quiz_id.empty() || !fmt || !cnt || !fin) {
        issue(b, file, r, q.quiz_id.empty() ? "missing_field" : "parse", "unparsable quiz item row");
        continue;
      }
      q.format_tag = *fmt;
      q.content_tag = *cnt;
      q.is_final = *fin;
      if (quiz_final.count(q.quiz_id)) throw DataError(file + ": duplicate quiz_id '" + q.quiz_id + "'");
      quiz_final[q.quiz_id] = q.is_final;
      b.quiz_items.push_back(std::move(q));
    }
  }

  auto require_learner = [&](const std::string& file, std::size_t r, const std::string& id) {
    if (!learners.count(id)) {
      throw DataError(file + ": unknown learner_id '" + id + "' at row " + std::to_string(r));
    }
  };
  auto require_quiz = [&](const std::string& file, std::size_t r, const std::string& id) {
    if (!quiz_final.count(id)) {
      throw DataError(file + ": unknown quiz_id '" + id + "' at row " + std::to_string(r));
    }
  };

  // events.csv
  {
    const std::string file = "events.csv";
    auto t = csv::read_file(directory / file);
    Columns c(t, {"learner_id", "item_id", "item_kind", "action", "timestamp"}, file);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      InteractionEvent e;
      e.learner_id = c.get(row, 0);
      e.item_id = c.get(row, 1);
      auto kind = parse_item_kind(c.get(row, 2));
      auto action = parse_action(c.get(row, 3));
      auto ts = csv::parse_int(c.get(row, 4));
      if (e.learner_id.empty() || e.item_id.empty() || c.get(row, 4).empty()) {
        issue(b, file, r, "missing_field", "required field empty");
        continue;
      }
      if (!kind || !action || !ts) {
        issue(b, file, r, "parse", "unparsable event row");
        continue;
      }
      require_learner(file, r, e.learner_id);
      e.item_kind = *kind;
      e.action = *action;
      e.timestamp = *ts;
      b.events.push_back(std::move(e));
    }
  }

  // quiz_attempts.csv
  {
    const std::string file = "quiz_attempts.csv";
    auto t = csv::read_file(directory / file);
    Columns c(t, {"learner_id", "quiz_id", "grade", "max_grade", "time_started", "time_finished"}, file);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      QuizAttempt a;
      a.learner_id = c.get(row, 0);
      a.quiz_id = c.get(row, 1);
      auto grade = csv::parse_double(c.get(row, 2));
      auto max_grade = csv::parse_double(c.get(row, 3));
      auto t0 = csv::parse_int(c.get(row, 4));
      auto t1 = csv::parse_int(c.get(row, 5));
      if (a.learner_id.empty() || a.quiz_id.empty()) {
        issue(b, file, r, "missing_field", "required field empty");
        continue;
      }
      if (!grade || !max_grade || !t0 || !t1) {
        issue(b, file, r, "parse", "unparsable attempt row");
        continue;
      }
      require_learner(file, r, a.learner_id);
      require_quiz(file, r, a.quiz_id);
      a.grade = *grade;
      a.max_grade = *max_grade;
      a.time_started = *t0;
      a.time_finished = *t1;
      a.is_final = quiz_final[a.quiz_id];
      b.quiz_attempts.push_back(std::move(a));
    }
  }

  // question_results.csv
  {
    const std::string file = "question_results.csv";
    auto t = csv::read_file(directory / file);
    Columns c(t, {"learner_id", "quiz_id", "question_id", "skill_tag", "correct"}, file);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      QuestionResult q;
      q.learner_id = c.get(row, 0);
      q.quiz_id = c.get(row, 1);
      q.question_id = c.get(row, 2);
      auto skill = parse_skill(c.get(row, 3));
      auto correct = parse_bool(c.get(row, 4));
      if (q.learner_id.empty() || q.quiz_id.empty() || q.question_id.empty()) {
        issue(b, file, r, "missing_field", "required field empty");
        continue;
      }
      if (!skill || !correct) {
        issue(b, file, r, "parse", "unparsable question row");
        continue;
      }
      require_learner(file, r, q.learner_id);
      require_quiz(file, r, q.quiz_id);
      q.skill_tag = *skill;
      q.correct = *correct;
      b.question_results.push_back(std::move(q));
    }
  }

  b.sort_canonical();
  return b;
}

void write_d1(const DatasetBundle& bundle, const fs::path& directory) {
  fs::create_directories(directory);
  auto open = [&](const char* name) {
    std::ofstream out(directory / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (directory / name).string());
    return out;
  };
  auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("NA"); };
  {
    auto out = open("learners.csv");
    csv::write_row(out, {"learner_id", "age", "gender", "ed_level", "ed_field", "native_lang", "motivation",
                         "descr_pos", "descr_neg"});
    for (const auto& p : bundle.profiles) {
      csv::write_row(out, {p.learner_id, opt_int(p.age), std::string(to_string(p.gender)), opt_int(p.ed_level),
                           p.ed_field.value_or("NA"),
                           p.native_lang ? (*p.native_lang ? "true" : "false") : "NA",
                           p.motivation.value_or("NA"), p.descr_pos, p.descr_neg});
    }
  }
  {
    auto out = open("events.csv");
    csv::write_row(out, {"learner_id", "item_id", "item_kind", "action", "timestamp"});
    for (const auto& e : bundle.events) {
      csv::write_row(out, {e.learner_id, e.item_id, std::string(to_string(e.item_kind)),
                           std::string(to_string(e.action)), std::to_string(e.timestamp)});
    }
  }
  {
    auto out = open("quiz_attempts.csv");
    csv::write_row(out, {"learner_id", "quiz_id", "grade", "max_grade", "time_started", "time_finished"});
    for (const auto& a : bundle.quiz_attempts) {
      csv::write_row(out, {a.learner_id, a.quiz_id, csv::format_double(a.grade), csv::format_double(a.max_grade),
                           std::to_string(a.time_started), std::to_string(a.time_finished)});
    }
  }
  {
    auto out = open("quiz_items.csv");
    csv::write_row(out, {"quiz_id", "format_tag", "content_tag", "is_final"});
    for (const auto& q : bundle.quiz_items) {
      csv::write_row(out, {q.quiz_id, std::string(to_string(q.format_tag)), std::string(to_string(q.content_tag)),
                           q.is_final ? "true" : "false"});
    }
  }
  {
    auto out = open("question_results.csv");
    csv::write_row(out, {"learner_id", "quiz_id", "question_id", "skill_tag", "correct"});
    for (const auto& q : bundle.question_results) {
      csv::write_row(out, {q.learner_id, q.quiz_id, q.question_id, std::string(to_string(q.skill_tag)),
                           q.correct ? "true" : "false"});
    }
  }
}

// ---------------------------------------------------------------------------
// Band mappings

BandMappings BandMappings::defaults() {
  BandMappings m;
  m.version = "1";
  m.oulad_age = {{"0-35", 26}, {"35-55", 45}, {"55<=", 60}};
  m.oulad_education = {{"No Formal quals", 1},
                       {"Lower Than A Level", 2},
                       {"A Level or Equivalent", 3},
                       {"HE Qualification", 4},
                       {"Post Graduate Qualification", 5}};
  m.canvas_age = {{"{19-34}", 26}, {"{34-54}", 44}, {"{55 or older}", 60}};
  m.canvas_education = {{"Less than Secondary", 1},
                        {"Secondary", 2},
                        {"Bachelor's", 3},
                        {"Master's", 4},
                        {"Doctorate", 5}};
  return m;
}

BandMappings BandMappings::from_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("missing file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  BandMappings m;
  m.version = j.value("version", "1");
  auto read = [&](const char* dataset, const char* column, std::map<std::string, double>& out) {
    if (!j.contains(dataset) || !j[dataset].contains(column)) {
      throw SchemaError(path.string() + ": missing mapping " + dataset + "." + column);
    }
    out = j[dataset][column].get<std::map<std::string, double>>();
  };
  read("oulad", "age_band", m.oulad_age);
  read("oulad", "highest_education", m.oulad_education);
  read("canvas", "age_DI", m.canvas_age);
  read("canvas", "LoE_DI", m.canvas_education);
  return m;
}

std::string BandMappings::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["oulad"]["age_band"] = oulad_age;
  j["oulad"]["highest_education"] = oulad_education;
  j["canvas"]["age_DI"] = canvas_age;
  j["canvas"]["LoE_DI"] = canvas_education;
  return j.dump(2);
}

namespace {

int map_band(const std::map<std::string, double>& mapping, const std::string& label, const std::string& what) {
  auto it = mapping.find(label);
  if (it == mapping.end()) throw SchemaError("unknown " + what + " band label: '" + label + "'");
  return static_cast<int>(it->second);
}

}  // namespace

// ---------------------------------------------------------------------------
// OULAD (D2)

DatasetBundle load_oulad(const fs::path& directory, const OuladOptions& options) {
  static const char* kFiles[] = {"studentInfo.csv", "studentVle.csv", "studentAssessment.csv", "assessments.csv",
                                 "courses.csv"};
  DatasetBundle b;
  b.dataset_id = DatasetId::D2;
  for (const char* f : kFiles) {
    if (!fs::exists(directory / f)) throw SchemaError(std::string("missing file: ") + f + " in " + directory.string());
    b.provenance.push_back({f, file_sha256(directory / f)});
  }

  struct Chosen {
    std::string module, presentation;
    std::vector<std::string> row;
  };
  std::map<std::string, Chosen> chosen;  // id_student -> representative registration
  std::size_t c_gender = 0, c_edu = 0, c_age = 0;
  {
    const std::string file = "studentInfo.csv";
    csv::Reader reader(directory / file);
    const auto c_module = reader.require("code_module", file);
    const auto c_pres = reader.require("code_presentation", file);
    const auto c_id = reader.require("id_student", file);
    c_gender = reader.require("gender", file);
    c_edu = reader.require("highest_education", file);
    c_age = reader.require("age_band", file);
    const auto c_result = reader.require("final_result", file);
    std::vector<std::string> row;
    std::size_t r = 0;
    for (; reader.next(row); ++r) {
      row.resize(reader.header().size());
      map_band(options.mappings.oulad_age, row[c_age], "age");
      map_band(options.mappings.oulad_education, row[c_edu], "education");
      OuladRegistration reg{row[c_module], row[c_pres], row[c_id], row[c_result]};
      if (reg.id_student.empty()) {
        issue(b, file, r, "missing_field", "id_student empty");
        continue;
      }
      if (options.registration_filter && !options.registration_filter(reg)) {
        issue(b, file, r, "filtered", "registration excluded by filter");
        continue;
      }
      auto it = chosen.find(reg.id_student);
      if (it == chosen.end() ||
          std::tie(it->second.presentation, it->second.module) < std::tie(reg.code_presentation, reg.code_module)) {
        chosen[reg.id_student] = Chosen{reg.code_module, reg.code_presentation, row};
      }
    }
    const auto c_res = c_result;
    for (const auto& [id, ch] : chosen) {
      LearnerProfile p;
      p.learner_id = id;
      p.age = map_band(options.mappings.oulad_age, ch.row[c_age], "age");
      p.ed_level = map_band(options.mappings.oulad_education, ch.row[c_edu], "education");
      p.gender = parse_gender(ch.row[c_gender]).value_or(Gender::NA);
      b.profiles.push_back(std::move(p));
      LearnerAggregate agg;
      agg.learner_id = id;
      agg.n_interactions = 0.0;
      agg.final_result = ch.row[c_res];
      b.aggregates.push_back(std::move(agg));
    }
  }
  std::unordered_map<std::string, std::size_t> agg_index;
  for (std::size_t i = 0; i < b.aggregates.size(); ++i) agg_index[b.aggregates[i].learner_id] = i;
  auto registration_of = [&](const std::string& id) -> const Chosen* {
    auto it = chosen.find(id);
    return it == chosen.end() ? nullptr : &it->second;
  };

  // assessments.csv
  struct AssessmentInfo {
    std::string module, presentation;
    bool is_exam;
  };
  std::unordered_map<std::string, AssessmentInfo> assessments;
  std::set<std::pair<std::string, std::string>> used_presentations;
  for (const auto& [id, ch] : chosen) used_presentations.insert({ch.module, ch.presentation});
  {
    const std::string file = "assessments.csv";
    auto t = csv::read_file(directory / file);
    Columns c(t, {"code_module", "code_presentation", "id_assessment", "assessment_type"}, file);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      AssessmentInfo info{c.get(row, 0), c.get(row, 1), c.get(row, 3) == "Exam"};
      const std::string& id = c.get(row, 2);
      if (id.empty()) {
        issue(b, file, r, "missing_field", "id_assessment empty");
        continue;
      }
      assessments[id] = info;
      if (used_presentations.count({info.module, info.presentation})) {
        b.quiz_items.push_back({id, FormatTag::None, ContentTag::None, info.is_exam});
      }
    }
  }

  // studentAssessment.csv
  {
    const std::string file = "studentAssessment.csv";
    csv::Reader reader(directory / file);
    const auto c_assess = reader.require("id_assessment", file);
    const auto c_id = reader.require("id_student", file);
    const auto c_date = reader.require("date_submitted", file);
    const auto c_score = reader.require("score", file);
    std::vector<std::string> row;
    for (std::size_t r = 0; reader.next(row); ++r) {
      row.resize(reader.header().size());
      const Chosen* reg = registration_of(row[c_id]);
      if (!reg) continue;
      auto ait = assessments.find(row[c_assess]);
      if (ait == assessments.end()) {
        throw DataError(file + ": unknown id_assessment '" + row[c_assess] + "' at row " + std::to_string(r));
      }
      if (ait->second.module != reg->module || ait->second.presentation != reg->presentation) continue;
      auto score = csv::parse_double(row[c_score]);
      if (!score) {
        issue(b, file, r, row[c_score].empty() || row[c_score] == "?" ? "missing_field" : "parse",
              "score unavailable: '" + row[c_score] + "'");
        continue;
      }
      const auto date = csv::parse_int(row[c_date]).value_or(0);
      b.quiz_attempts.push_back(
          {row[c_id], row[c_assess], std::clamp(*score, 0.0, 100.0), 100.0, date, date, ait->second.is_exam});
    }
  }

  // studentVle.csv: clicks summed over the representative registration.
  {
    const std::string file = "studentVle.csv";
    csv::Reader reader(directory / file);
    const auto c_module = reader.require("code_module", file);
    const auto c_pres = reader.require("code_presentation", file);
    const auto c_id = reader.require("id_student", file);
    const auto c_click = reader.require("sum_click", file);
    std::vector<std::string> row;
    for (std::size_t r = 0; reader.next(row); ++r) {
      row.resize(reader.header().size());
      const Chosen* reg = registration_of(row[c_id]);
      if (!reg || reg->module != row[c_module] || reg->presentation != row[c_pres]) continue;
      auto clicks = csv::parse_double(row[c_click]);
      if (!clicks) {
        issue(b, file, r, "parse", "sum_click not numeric: '" + row[c_click] + "'");
        continue;
      }
      *b.aggregates[agg_index.at(row[c_id])].n_interactions += *clicks;
    }
  }

  b.sort_canonical();
  return b;
}

// ---------------------------------------------------------------------------
// Canvas Network person-course (D3)

DatasetBundle load_canvas(const fs::path& file, const CanvasOptions& options) {
  DatasetBundle b;
  b.dataset_id = DatasetId::D3;
  const std::string name = file.filename().string();
  csv::Reader reader(file);
  b.provenance.push_back({name, file_sha256(file)});
  const auto c_id = reader.require(options.id_column, name);
  const auto c_age = reader.require("age_DI", name);
  const auto c_edu = reader.require("LoE_DI", name);
  const auto c_events = reader.require(options.events_column, name);
  const auto c_course = reader.find(options.course_column);
  const auto c_gender = reader.find("gender");
  std::vector<std::pair<std::string, std::size_t>> outcome_cols;
  for (const auto& col : options.outcome_columns) {
    if (auto idx = reader.find(col)) outcome_cols.emplace_back(col, *idx);
  }
  std::unordered_set<std::string> seen;
  std::vector<std::string> row;
  for (std::size_t r = 0; reader.next(row); ++r) {
    row.resize(reader.header().size());
    std::string id = row[c_id];
    if (id.empty()) {
      issue(b, name, r, "missing_field", options.id_column + " empty");
      continue;
    }
    if (c_course) id = row[*c_course] + ":" + id;
    if (row[c_events].empty()) {
      issue(b, name, r, "missing_field", options.events_column + " empty");
      continue;
    }
    auto events = csv::parse_double(row[c_events]);
    if (!events) {
      issue(b, name, r, "parse", options.events_column + " not numeric: '" + row[c_events] + "'");
      continue;
    }
    if (!seen.insert(id).second) {
      issue(b, name, r, "duplicate", "duplicate learner row '" + id + "'");
      continue;
    }
    LearnerProfile p;
    p.learner_id = id;
    if (!is_na(row[c_age])) p.age = map_band(options.mappings.canvas_age, row[c_age], "age");
    if (!is_na(row[c_edu])) p.ed_level = map_band(options.mappings.canvas_education, row[c_edu], "education");
    if (c_gender) p.gender = parse_gender(row[*c_gender]).value_or(Gender::NA);
    LearnerAggregate agg;
    agg.learner_id = id;
    agg.n_interactions = *events;
    for (const auto& [col, idx] : outcome_cols) {
      if (auto v = csv::parse_double(row[idx])) agg.outcome_values[col] = *v;
    }
    b.profiles.push_back(std::move(p));
    b.aggregates.push_back(std::move(agg));
  }
  b.sort_canonical();
  return b;
}

// ---------------------------------------------------------------------------
// Validation

std::size_t ValidationReport::total() const {
  std::size_t n = 0;
  for (const auto& [k, c] : counts) n += c;
  return n;
}

void ValidationReport::add(std::string kind, std::string message, std::size_t row) {
  const std::size_t seen = counts[kind]++;
  if (seen < kMaxOffenders) first_offenders.push_back({std::move(kind), std::move(message), row});
}

ValidationReport validate_bundle(const DatasetBundle& b) {
  ValidationReport report;
  for (const auto& li : b.load_issues) {
    if (li.kind == "filtered") continue;
    report.add("load", li.file + " row " + std::to_string(li.row) + ": " + li.message, li.row);
  }

  std::unordered_set<std::string> learners;
  for (std::size_t i = 0; i < b.profiles.size(); ++i) {
    const auto& p = b.profiles[i];
    if (!learners.insert(p.learner_id).second) report.add("duplicate", "learner_id " + p.learner_id, i);
    if (b.dataset_id == DatasetId::D1 && p.age && (*p.age < 18 || *p.age > 99)) {
      report.add("range", "age " + std::to_string(*p.age) + " for " + p.learner_id, i);
    }
    if (b.dataset_id == DatasetId::D1 && p.ed_level && (*p.ed_level < 1 || *p.ed_level > 8)) {
      report.add("range", "ed_level " + std::to_string(*p.ed_level) + " for " + p.learner_id, i);
    }
  }
  std::unordered_map<std::string, const QuizItemMeta*> quizzes;
  for (std::size_t i = 0; i < b.quiz_items.size(); ++i) {
    const auto& q = b.quiz_items[i];
    if (!quizzes.emplace(q.quiz_id, &q).second) report.add("duplicate", "quiz_id " + q.quiz_id, i);
    if (b.dataset_id != DatasetId::D1) continue;
    if (q.is_final && (q.format_tag != FormatTag::None || q.content_tag != ContentTag::None)) {
      report.add("tag", "final quiz " + q.quiz_id + " carries a tag", i);
    }
    if (!q.is_final &&
        (q.format_tag != FormatTag::None) == (q.content_tag != ContentTag::None)) {
      report.add("tag", "quiz " + q.quiz_id + " must carry exactly one format or content tag", i);
    }
  }

  for (std::size_t i = 0; i < b.events.size(); ++i) {
    const auto& e = b.events[i];
    if (!learners.count(e.learner_id)) report.add("foreign_key", "event learner " + e.learner_id, i);
    if (e.item_kind == ItemKind::Resource && e.action != Action::View) {
      report.add("range", "resource " + e.item_id + " with non-view action", i);
    }
    if (i > 0 && b.events[i - 1].learner_id == e.learner_id && b.events[i - 1].timestamp > e.timestamp) {
      report.add("order", "timestamps decrease for " + e.learner_id, i);
    }
  }
  for (std::size_t i = 0; i < b.quiz_attempts.size(); ++i) {
    const auto& a = b.quiz_attempts[i];
    if (!learners.count(a.learner_id)) report.add("foreign_key", "attempt learner " + a.learner_id, i);
    if (!quizzes.count(a.quiz_id)) report.add("foreign_key", "attempt quiz " + a.quiz_id, i);
    if (!(a.max_grade > 0.0) || a.grade < 0.0 || a.grade > a.max_grade) {
      report.add("range", "grade " + csv::format_double(a.grade) + "/" + csv::format_double(a.max_grade), i);
    }
    if (a.time_finished < a.time_started) report.add("range", "attempt finishes before it starts", i);
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> skill_split;  // quiz -> (memory, deduction)
  for (std::size_t i = 0; i < b.question_results.size(); ++i) {
    const auto& q = b.question_results[i];
    if (!learners.count(q.learner_id)) report.add("foreign_key", "question learner " + q.learner_id, i);
    if (!quizzes.count(q.quiz_id)) report.add("foreign_key", "question quiz " + q.quiz_id, i);
    auto& split = skill_split[q.quiz_id];
    (q.skill_tag == SkillTag::Memory ? split.first : split.second)++;
  }
  for (const auto& [quiz, split] : skill_split) {
    if (split.first == 0 || split.second == 0) {
      report.add("tag", "quiz " + quiz + " questions not split between memory and deduction", 0);
    }
  }
  for (std::size_t i = 0; i < b.aggregates.size(); ++i) {
    if (!learners.count(b.aggregates[i].learner_id)) {
      report.add("foreign_key", "aggregate learner " + b.aggregates[i].learner_id, i);
    }
  }
  if (b.dataset_id == DatasetId::D3 && (!b.quiz_attempts.empty() || !b.question_results.empty())) {
    report.add("schema", "D3 bundle carries quiz data", 0);
  }
  return report;
}

}  // namespace edm
