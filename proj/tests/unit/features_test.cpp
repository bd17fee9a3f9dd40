#include <cmath>
#include <map>
#include <set>
#include <variant>

#include "doctest.h"
#include "edm/errors.hpp"
#include "edm/features.hpp"
#include "edm/synthgen.hpp"
#include "support.hpp"

using namespace edm;

namespace {

double num(const FeatureMatrix& m, std::size_t row, const std::string& col) {
  return std::get<double>(m.cells[row][*m.column(col)]);
}

DatasetBundle small_d1() {
  DatasetBundle b;
  b.dataset_id = DatasetId::D1;
  LearnerProfile p;
  p.learner_id = "L1";
  p.age = 30;
  p.gender = Gender::F;
  p.ed_level = 3;
  p.ed_field = "stem";
  p.native_lang = true;
  p.motivation = "very";
  b.profiles.push_back(p);
  b.quiz_items = {{"q1", FormatTag::Visual, ContentTag::None, false},
                  {"q2", FormatTag::None, ContentTag::Factual, false},
                  {"q3", FormatTag::Verbal, ContentTag::None, false},
                  {"final", FormatTag::None, ContentTag::None, true}};
  std::int64_t t = 0;
  const double grades[] = {8, 6, 10};
  const char* quiz[] = {"q1", "q2", "q3"};
  for (int i = 0; i < 3; ++i) {
    b.quiz_attempts.push_back({"L1", quiz[i], grades[i], 10, t, t + 100, false});
    t += 1000;
  }
  b.quiz_attempts.push_back({"L1", "final", 7, 10, t, t + 50, true});
  for (int i = 0; i < 12; ++i) b.events.push_back({"L1", "res" + std::to_string(i % 4), ItemKind::Resource, Action::View, i});
  for (int i = 0; i < 5; ++i) b.events.push_back({"L1", quiz[i % 3], ItemKind::Activity, Action::Attempt, 100 + i});
  b.question_results = {{"L1", "q1", "a", SkillTag::Memory, true},   {"L1", "q1", "b", SkillTag::Deduction, false},
                        {"L1", "q3", "c", SkillTag::Memory, true},   {"L1", "q3", "d", SkillTag::Deduction, true},
                        {"L1", "q2", "e", SkillTag::Memory, false},  {"L1", "q2", "f", SkillTag::Deduction, true}};
  return b;
}

}  // namespace

TEST_CASE("hand-built learner: grade average, action count, dwell time") {
  const auto m = build_feature_matrix(small_d1(), true);
  REQUIRE(m.rows() == 1);
  CHECK(num(m, 0, "avrg_grade") == doctest::Approx(8.0));
  CHECK(num(m, 0, "nb_action") == 17.0);
  CHECK(num(m, 0, "time") == 350.0);
  // items: 4 quizzes + 4 resources, touched: 4 resources + 3 quizzes
  CHECK(num(m, 0, "%_completion") == doctest::Approx(7.0 / 8.0));
  CHECK(num(m, 0, "visual") == doctest::Approx(0.5));
  CHECK(num(m, 0, "verbal") == doctest::Approx(1.0));
  CHECK(num(m, 0, "factual") == doctest::Approx(0.5));
  CHECK(num(m, 0, "memory") == doctest::Approx(2.0 / 3.0));
  CHECK(m.labels == std::vector<int>{1});
  CHECK(std::holds_alternative<std::monostate>(m.cells[0][*m.column("practical")]));
}

TEST_CASE("a learner without non-final attempts is quarantined") {
  auto b = small_d1();
  std::erase_if(b.quiz_attempts, [](const QuizAttempt& a) { return !a.is_final; });
  const auto m = build_minimal_features(b);
  CHECK(std::holds_alternative<std::monostate>(m.cells[0][*m.column("avrg_grade")]));
  const auto [kept, log] = filter_complete(m);
  CHECK(kept.rows() == 0);
  REQUIRE(log.removed.size() == 1);
  CHECK(log.removed[0].reasons.front().find("avrg_grade") != std::string::npos);
}

TEST_CASE("features of synthetic bundles match a brute-force recomputation") {
  PlantSpec spec;
  spec.n_learners = 60;
  spec.seed = 5;
  const auto synth = generate_bundle(spec);
  const auto& b = synth.bundle;
  const auto m = build_feature_matrix(b, true);

  std::set<std::string> universe;
  for (const auto& q : b.quiz_items) universe.insert(q.quiz_id);
  for (const auto& e : b.events) universe.insert(e.item_id);
  for (std::size_t r = 0; r < b.profiles.size(); ++r) {
    const auto& id = b.profiles[r].learner_id;
    double grade_sum = 0, grade_n = 0, dwell = 0, actions = 0;
    for (const auto& a : b.quiz_attempts) {
      if (a.learner_id != id) continue;
      dwell += static_cast<double>(a.time_finished - a.time_started);
      if (!a.is_final) grade_sum += 10 * a.grade / a.max_grade, grade_n += 1;
    }
    std::set<std::string> touched;
    for (const auto& e : b.events) {
      if (e.learner_id != id) continue;
      touched.insert(e.item_id);
      if ((e.item_kind == ItemKind::Resource && e.action == Action::View) ||
          (e.item_kind == ItemKind::Activity && e.action == Action::Attempt)) {
        actions += 1;
      }
    }
    double verbal_ok = 0, verbal_n = 0, ded_ok = 0, ded_n = 0;
    for (const auto& q : b.question_results) {
      if (q.learner_id != id) continue;
      const auto* meta = b.find_quiz(q.quiz_id);
      if (meta->is_final) continue;
      if (meta->format_tag == FormatTag::Verbal) verbal_n += 1, verbal_ok += q.correct;
      if (q.skill_tag == SkillTag::Deduction) ded_n += 1, ded_ok += q.correct;
    }
    CAPTURE(id);
    CHECK(num(m, r, "avrg_grade") == doctest::Approx(grade_sum / grade_n));
    CHECK(num(m, r, "time") == dwell);
    CHECK(num(m, r, "nb_action") == actions);
    CHECK(num(m, r, "%_completion") == doctest::Approx(touched.size() / static_cast<double>(universe.size())));
    CHECK(num(m, r, "verbal") == doctest::Approx(verbal_ok / verbal_n));
    CHECK(num(m, r, "deduction") == doctest::Approx(ded_ok / ded_n));
    CHECK((*m.labels)[r] == synth.truth.labels[r]);
  }
}

TEST_CASE("standardize maps [0, 10] to [-1, +1] and passes constants through") {
  auto data = testing::encoded(Matrix::from_rows({{0, 4}, {10, 4}}), {0, 1});
  const auto [z, stats] = standardize(data);
  CHECK(z.X(0, 0) == doctest::Approx(-1.0));
  CHECK(z.X(1, 0) == doctest::Approx(1.0));
  CHECK(z.X(0, 1) == 4.0);
  CHECK(stats.zero_variance == std::vector<bool>{false, true});
  // applying fitted statistics to new rows uses the training mean and scale
  auto other = testing::encoded(Matrix::from_rows({{15, 0}}), {1});
  CHECK(standardize(other, stats).first.X(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("encoding expands categoricals to one-hot groups and drops gender") {
  PlantSpec spec;
  spec.n_learners = 30;
  const auto enc = encode(filter_complete(build_feature_matrix(generate_bundle(spec).bundle, true)).first);
  bool has_gender = false;
  for (const auto& c : enc.columns) has_gender = has_gender || c.source == "gender";
  CHECK_FALSE(has_gender);
  const ManifestEntry* field = nullptr;
  for (const auto& g : enc.manifest) {
    if (g.spec == "ed_field") field = &g;
  }
  REQUIRE(field);
  CHECK(field->columns.size() == field->levels.size());
  for (std::size_t r = 0; r < enc.rows(); ++r) {
    double sum = 0;
    for (auto c : field->columns) sum += enc.X(r, c);
    CHECK(sum == 1.0);
  }
  // selecting a group keeps all of its columns
  const std::size_t idx = static_cast<std::size_t>(field - enc.manifest.data());
  const std::vector<std::size_t> one = {idx};
  CHECK(select_groups(enc, one).cols() == field->columns.size());
}

TEST_CASE("encode rejects missing cells") {
  auto m = build_minimal_features(small_d1());
  m.cells[0][*m.column("age")] = std::monostate{};
  CHECK_THROWS_AS(encode(m), std::invalid_argument);
}

TEST_CASE("feature matrix CSV round-trip") {
  testing::TempDir dir("fm");
  PlantSpec spec;
  spec.n_learners = 20;
  const auto m = build_feature_matrix(generate_bundle(spec).bundle, true);
  write_feature_matrix(m, dir.path / "f.csv");
  CHECK(read_feature_matrix(dir.path / "f.csv") == m);
}

TEST_CASE("common view has three z-scored columns per dataset") {
  PlantSpec spec;
  spec.n_learners = 40;
  const auto d1 = generate_bundle(spec).bundle;
  const std::vector<DatasetBundle> bundles = {d1, reshape_synthetic(d1, DatasetId::D2),
                                              reshape_synthetic(d1, DatasetId::D3)};
  const auto views = common_feature_view(bundles);
  REQUIRE(views.size() == 3);
  for (const auto& v : views) {
    CHECK(v.column_names() == std::vector<std::string>{"age", "ed_level", "n_interactions"});
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0;
      for (std::size_t r = 0; r < v.rows(); ++r) s += v.X(r, c);
      CHECK(std::abs(s / v.rows()) < 1e-9);
    }
  }
}

TEST_CASE("category parsing") {
  CHECK(to_string(parse_categories("BAD")) == "D+A+B");
  CHECK_THROWS(parse_categories("DX"));
}
