#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edm {

enum class DatasetId { D1, D2, D3 };

std::string_view to_string(DatasetId id);
DatasetId parse_dataset_id(std::string_view text);

enum class Gender { F, M, NA };
enum class ItemKind { Activity, Resource };
enum class Action { View, Attempt };
enum class SkillTag { Memory, Deduction };
enum class FormatTag { Visual, Verbal, None };
enum class ContentTag { Factual, Practical, None };

std::string_view to_string(Gender g);
std::string_view to_string(ItemKind k);
std::string_view to_string(Action a);
std::string_view to_string(SkillTag t);
std::string_view to_string(FormatTag t);
std::string_view to_string(ContentTag t);

/// Questionnaire answers plus demographics. Text answers are kept verbatim and never modeled.
struct LearnerProfile {
  std::string learner_id;
  std::optional<int> age;
  Gender gender = Gender::NA;
  std::optional<int> ed_level;
  std::optional<std::string> ed_field;
  std::optional<bool> native_lang;
  std::optional<std::string> motivation;
  std::string descr_pos;
  std::string descr_neg;

  bool operator==(const LearnerProfile&) const = default;
};

struct InteractionEvent {
  std::string learner_id;
  std::string item_id;
  ItemKind item_kind = ItemKind::Resource;
  Action action = Action::View;
  std::int64_t timestamp = 0;

  bool operator==(const InteractionEvent&) const = default;
};

struct QuizAttempt {
  std::string learner_id;
  std::string quiz_id;
  double grade = 0.0;
  double max_grade = 1.0;
  std::int64_t time_started = 0;
  std::int64_t time_finished = 0;
  // Mirrors QuizItemMeta::is_final; resolved from quiz_items at load time.
  bool is_final = false;

  bool operator==(const QuizAttempt&) const = default;
};

struct QuestionResult {
  std::string learner_id;
  std::string quiz_id;
  std::string question_id;
  SkillTag skill_tag = SkillTag::Memory;
  bool correct = false;

  bool operator==(const QuestionResult&) const = default;
};

struct QuizItemMeta {
  std::string quiz_id;
  FormatTag format_tag = FormatTag::None;
  ContentTag content_tag = ContentTag::None;
  bool is_final = false;

  bool operator==(const QuizItemMeta&) const = default;
};

/// Per-learner totals for datasets that ship aggregates instead of raw events
/// (OULAD clicks, Canvas event counts) and their outcome columns.
struct LearnerAggregate {
  std::string learner_id;
  std::optional<double> n_interactions;
  std::optional<std::string> final_result;     // OULAD final_result
  std::map<std::string, double> outcome_values;  // Canvas grade / completed_pct ...

  bool operator==(const LearnerAggregate&) const = default;
};

struct SourceDigest {
  std::string file;
  std::string sha256;

  bool operator==(const SourceDigest&) const = default;
};

/// A row dropped while loading because a required field was missing or unparsable.
struct LoadIssue {
  std::string file;
  std::size_t row = 0;  // 0-based data row index
  std::string kind;     // "missing_field" | "parse" | "filtered"
  std::string message;

  bool operator==(const LoadIssue&) const = default;
};

struct DatasetBundle {
  DatasetId dataset_id = DatasetId::D1;
  std::vector<LearnerProfile> profiles;
  std::vector<InteractionEvent> events;
  std::vector<QuizAttempt> quiz_attempts;
  std::vector<QuestionResult> question_results;
  std::vector<QuizItemMeta> quiz_items;
  std::vector<LearnerAggregate> aggregates;
  std::vector<SourceDigest> provenance;
  std::vector<LoadIssue> load_issues;

  const LearnerProfile* find_profile(std::string_view learner_id) const;
  const LearnerAggregate* find_aggregate(std::string_view learner_id) const;
  const QuizItemMeta* find_quiz(std::string_view quiz_id) const;

  /// Applies the documented sort: learner_id, then timestamp (stable).
  void sort_canonical();
};

/// Field-for-field equality of the data, ignoring provenance digests and load issues.
bool content_equal(const DatasetBundle& a, const DatasetBundle& b);

/// Canonical D1 layout: learners.csv, events.csv, quiz_attempts.csv,
/// quiz_items.csv, question_results.csv.
DatasetBundle load_d1(const std::filesystem::path& directory);

/// Writes the canonical D1 CSV set (the inverse of load_d1).
void write_d1(const DatasetBundle& bundle, const std::filesystem::path& directory);

/// Ordinal encodings for band-valued columns of the public datasets.
struct BandMappings {
  std::string version;
  std::map<std::string, double> oulad_age;
  std::map<std::string, double> oulad_education;
  std::map<std::string, double> canvas_age;
  std::map<std::string, double> canvas_education;

  static BandMappings defaults();
  static BandMappings from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
};

/// One studentInfo row, as seen by the registration filter hook.
struct OuladRegistration {
  std::string code_module;
  std::string code_presentation;
  std::string id_student;
  std::string final_result;
};

struct OuladOptions {
  BandMappings mappings = BandMappings::defaults();
  // Keep only registrations for which this returns true (null keeps all).
  std::function<bool(const OuladRegistration&)> registration_filter;
};

DatasetBundle load_oulad(const std::filesystem::path& directory, const OuladOptions& options = {});

struct CanvasOptions {
  BandMappings mappings = BandMappings::defaults();
  // Outcome columns retained for label rules.
  std::vector<std::string> outcome_columns = {"grade", "completed_pct"};
  std::string id_column = "userid_DI";
  std::string course_column = "course_id";
  std::string events_column = "nevents";
};

DatasetBundle load_canvas(const std::filesystem::path& file, const CanvasOptions& options = {});

struct Violation {
  std::string kind;  // range, foreign_key, duplicate, order, tag, schema, load
  std::string message;
  std::size_t row = 0;
};

struct ValidationReport {
  std::map<std::string, std::size_t> counts;
  std::vector<Violation> first_offenders;  // at most kMaxOffenders per kind

  static constexpr std::size_t kMaxOffenders = 5;

  bool clean() const { return counts.empty(); }
  std::size_t total() const;
  void add(std::string kind, std::string message, std::size_t row);
};

ValidationReport validate_bundle(const DatasetBundle& bundle);

}  // namespace edm
