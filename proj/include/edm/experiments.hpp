#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "edm/features.hpp"
#include "edm/ingest.hpp"
#include "edm/model.hpp"
#include "edm/resample.hpp"
#include "edm/selection.hpp"
#include "edm/synthgen.hpp"
#include "edm/validation.hpp"

namespace edm {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class ExperimentKind { Balancing, Models, Sources, Transfer, Selection, Describe };

std::string_view to_string(ExperimentKind k);
ExperimentKind parse_experiment(std::string_view text);

enum class GridMode { Default, Compact };

/// Where one dataset comes from. `source` is d1, oulad, canvas or synthetic.
struct DatasetSource {
  DatasetId id = DatasetId::D1;
  std::string source = "synthetic";
  std::string path;
  // synthetic only
  std::size_t n_learners = 200;
  std::uint64_t seed = 1;
  std::vector<PlantedFeature> informative;
  double noise = 0.05;
  double target_ratio = 0.5;

  bool operator==(const DatasetSource&) const = default;
};

/// Three synthetic datasets shaped like D1, D2 and D3, so runs work without downloads.
std::vector<DatasetSource> default_datasets();

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Balancing;
  std::vector<DatasetSource> datasets = default_datasets();
  std::vector<ModelFamily> models = {ModelFamily::DecisionTree, ModelFamily::RandomForest, ModelFamily::Svm};
  std::vector<BalanceTechnique> balances = {BalanceTechnique::None, BalanceTechnique::Upsample,
                                            BalanceTechnique::Downsample, BalanceTechnique::UpAndDown,
                                            BalanceTechnique::Smote};
  BalanceTechnique balance = BalanceTechnique::UpAndDown;
  BalanceScope balance_scope = BalanceScope::TrainFolds;
  int smote_k = 5;
  std::string categories;  // empty: every category the dataset provides
  DatasetId ablation_dataset = DatasetId::D1;
  DatasetId selection_dataset = DatasetId::D1;
  std::uint64_t seed = 42;
  int folds = 10;
  int jobs = 0;  // 0: hardware concurrency
  Averaging averaging = Averaging::Macro;
  GridMode grid = GridMode::Default;
  double label_threshold = 0.5;
  std::string d3_label_column = "grade";
  std::string out = "results";

  /// Overlays the keys present in `j`; unknown keys and bad values raise ConfigError.
  void apply_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// folds >= 2, jobs >= 0, smote_k >= 1, threshold in [0, 1]; raises ConfigError.
  void validate() const;

  static ExperimentConfig from_file(const std::filesystem::path& path);
  int resolved_jobs() const;
  LabelRule label_rule() const;
  std::vector<ModelSpec> grid_for(ModelFamily family) const;
};

struct LoadedDataset {
  DatasetSource source;
  std::string resolved_path;
  DatasetBundle bundle;
  std::string digest;  // SHA-256 of the bundle content
};

/// Loads every configured dataset. Relative paths that do not exist are retried
/// under $EDM_DATA_DIR.
std::vector<LoadedDataset> load_datasets(const ExperimentConfig& config);

/// SHA-256 over a canonical text rendering of the bundle's records.
std::string bundle_digest(const DatasetBundle& bundle);

struct ResultTable {
  std::string name;  // file stem
  std::string caption;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<double>> cells;  // percent values rounded to 2 decimals, NaN = empty
  std::vector<std::string> notes;

  bool operator==(const ResultTable&) const = default;
};

double round2(double v);

struct ExperimentOutput {
  ExperimentKind experiment = ExperimentKind::Balancing;
  std::vector<ResultTable> tables;
  // Extra files (relative name -> content): plot data, selection results, summaries.
  std::vector<std::pair<std::string, std::string>> files;
  std::size_t leakage_checks = 0;
  std::size_t leakage_violations = 0;
};

using BundleList = std::vector<const DatasetBundle*>;

ExperimentOutput run_balancing_comparison(const BundleList& bundles, const ExperimentConfig& config);
ExperimentOutput run_model_comparison(const BundleList& bundles, const ExperimentConfig& config);
ExperimentOutput run_transfer_matrix(const BundleList& bundles, const ExperimentConfig& config);
ExperimentOutput run_source_ablation(const DatasetBundle& bundle, const std::set<SourceCategory>& categories,
                                     const ExperimentConfig& config);
ExperimentOutput run_selection_analysis(const DatasetBundle& bundle, const ExperimentConfig& config);
ExperimentOutput describe(const DatasetBundle& bundle, const LabelRule& rule = {});

/// Dispatches on config.experiment using the loaded datasets.
ExperimentOutput run_experiment(const ExperimentConfig& config, const std::vector<LoadedDataset>& datasets);

struct RunManifest {
  std::string config_path;
  ExperimentConfig config;
  std::vector<std::pair<std::string, std::string>> inputs;  // dataset label -> digest
  std::string tool_version = std::string(kToolVersion);

  nlohmann::json to_json() const;
  /// SHA-256 of the canonical JSON of the resolved config.
  std::string config_digest() const;
};

/// Writes <dir>/<experiment>/<table>.{md,csv}, extra files and manifest.json.
/// Every file starts with a provenance header. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentOutput& output, const RunManifest& manifest,
                                               const std::filesystem::path& dir);

std::string render_markdown(const ResultTable& table, const std::string& provenance);
std::string render_csv(const ResultTable& table, const std::string& provenance);
/// Reads a table written by render_csv (caption and notes from its comment lines).
ResultTable parse_result_csv(const std::string& text, const std::string& name = "");

}  // namespace edm
