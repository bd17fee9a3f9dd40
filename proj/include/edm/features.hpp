#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "edm/ingest.hpp"
#include "edm/matrix.hpp"

namespace edm {

/// Source of a feature: demographic, academic, behavioral, personality, learning preferences.
enum class SourceCategory { D, A, B, P, L };

char to_char(SourceCategory c);
SourceCategory parse_category(char c);
/// Parses "DAB" style strings into a category set.
std::set<SourceCategory> parse_categories(std::string_view text);
std::string to_string(const std::set<SourceCategory>& cats);

enum class FeatureKind { Numeric, Ordinal, Categorical };

std::string_view to_string(FeatureKind k);

struct FeatureSpec {
  std::string name;
  SourceCategory category = SourceCategory::D;
  FeatureKind kind = FeatureKind::Numeric;
  // Ordered levels for string-valued ordinal and categorical features.
  std::vector<std::string> levels;
  std::optional<std::pair<double, double>> declared_range;

  bool operator==(const FeatureSpec&) const = default;
};

using Cell = std::variant<std::monostate, double, std::string>;

/// Learner rows x named feature columns, with per-row quarantine flags.
struct FeatureMatrix {
  std::vector<FeatureSpec> specs;
  std::vector<std::string> row_ids;
  std::vector<std::vector<Cell>> cells;
  std::optional<std::vector<int>> labels;  // 1 = pass, 0 = fail
  std::vector<std::vector<std::string>> flags;

  std::size_t rows() const { return row_ids.size(); }
  std::optional<std::size_t> column(std::string_view name) const;
  void add_row(std::string id, std::vector<Cell> values, std::vector<std::string> row_flags = {});

  bool operator==(const FeatureMatrix&) const = default;
};

/// Pass/fail rule. D1 compares the final quiz to pass_threshold * max; D3 compares
/// `d3_column` to `d3_threshold` (defaults to pass_threshold).
struct LabelRule {
  double pass_threshold = 0.5;
  std::string d3_column = "grade";
  std::optional<double> d3_threshold;
};

/// Labels aligned with bundle.profiles; nullopt where no final outcome exists.
std::vector<std::optional<int>> derive_labels(const DatasetBundle& bundle, const LabelRule& rule = {});

/// Table 1 style features (only the subset a dataset provides for D2/D3).
FeatureMatrix build_minimal_features(const DatasetBundle& bundle);

/// Learning-preference scores from tagged quiz questions (D1-shaped bundles only).
FeatureMatrix build_additional_features(const DatasetBundle& bundle);

/// Joins two matrices built from the same bundle (same row ids in the same order).
FeatureMatrix join_columns(const FeatureMatrix& left, const FeatureMatrix& right);

/// Sets labels; rows without an outcome get a quarantine flag and label 0.
void attach_labels(FeatureMatrix& matrix, std::span<const std::optional<int>> labels);

/// Minimal (+ additional when available) features with labels attached.
FeatureMatrix build_feature_matrix(const DatasetBundle& bundle, bool with_additional, const LabelRule& rule = {});

struct RemovalLog {
  struct Entry {
    std::string row_id;
    std::vector<std::string> reasons;
  };
  std::vector<Entry> removed;
};

/// Drops every row carrying a quarantine flag.
std::pair<FeatureMatrix, RemovalLog> filter_complete(const FeatureMatrix& matrix);

/// Keeps only the columns whose category is in `keep` (order preserved).
FeatureMatrix select_categories(const FeatureMatrix& matrix, const std::set<SourceCategory>& keep);

// ---------------------------------------------------------------------------
// Encoded numeric matrices

struct EncodedColumn {
  std::string name;
  SourceCategory category = SourceCategory::D;
  std::string source;  // originating FeatureSpec name

  bool operator==(const EncodedColumn&) const = default;
};

/// One original feature and the encoded columns it expanded to.
struct ManifestEntry {
  std::string spec;
  SourceCategory category = SourceCategory::D;
  FeatureKind kind = FeatureKind::Numeric;
  std::vector<std::size_t> columns;
  std::vector<std::string> levels;

  bool operator==(const ManifestEntry&) const = default;
};

struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<bool> zero_variance;

  bool operator==(const StandardizationStats&) const = default;
};

struct EncodedMatrix {
  std::vector<EncodedColumn> columns;
  Matrix X;
  std::vector<int> labels;
  std::vector<std::string> row_ids;
  // Index of the row in the dataset it was derived from; resampled copies and
  // synthetic rows keep the index of their base row.
  std::vector<std::int64_t> origin;
  std::vector<ManifestEntry> manifest;
  std::optional<StandardizationStats> standardization;

  std::size_t rows() const { return X.rows(); }
  std::size_t cols() const { return X.cols(); }
  std::vector<std::string> column_names() const;

  bool operator==(const EncodedMatrix&) const = default;
};

struct EncodePolicy {
  std::set<std::string> drop = {"gender"};
};

/// Numeric passthrough, string ordinals to level index, categoricals one-hot,
/// dropped features removed. Throws SchemaError on an unseen level and
/// std::invalid_argument when the matrix still has missing cells.
EncodedMatrix encode(const FeatureMatrix& matrix, const EncodePolicy& policy = {});

/// Rows by index, labels/origins/ids carried along.
EncodedMatrix take_rows(const EncodedMatrix& m, std::span<const std::size_t> rows);

/// Keeps the manifest groups at the given manifest indices (one-hot groups stay whole).
EncodedMatrix select_groups(const EncodedMatrix& m, std::span<const std::size_t> groups);

/// Keeps the groups whose category is in `keep`.
EncodedMatrix select_categories(const EncodedMatrix& m, const std::set<SourceCategory>& keep);

/// Per-column z-score with population variance. With `fit`, applies the given
/// statistics; otherwise fits them. Zero-variance columns pass through unchanged and flagged.
std::pair<EncodedMatrix, StandardizationStats> standardize(const EncodedMatrix& m,
                                                           const std::optional<StandardizationStats>& fit = {});

/// Rows of the three-column {age, ed_level, n_interactions} view, each column
/// z-scored within its own dataset.
std::vector<EncodedMatrix> common_feature_view(std::span<const DatasetBundle> bundles, const LabelRule& rule = {});

/// Sums per-column values back onto their manifest groups (e.g. one-hot importances).
std::vector<std::pair<std::string, double>> aggregate_by_group(const EncodedMatrix& m, std::span<const double> per_column);

// ---------------------------------------------------------------------------
// Serialization

void write_feature_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path);
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

std::string manifest_json(const EncodedMatrix& m);

}  // namespace edm
