// edm: command-line front end for ingest, validation, description, synthetic
// data generation and the experiment runs.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "edm/errors.hpp"
#include "edm/experiments.hpp"
#include "edm/features.hpp"
#include "edm/ingest.hpp"
#include "edm/synthgen.hpp"

namespace {

using namespace edm;

constexpr int kExitOk = 0;
constexpr int kExitExperiment = 1;
constexpr int kExitUsage = 2;

struct SourceArgs {
  std::string source = "d1";
  std::string path;
  std::string dataset;
  std::string mappings;
};

void add_source_flags(CLI::App* cmd, SourceArgs& args) {
  cmd->add_option("--source", args.source, "Dataset layout: d1, oulad or canvas")
      ->check(CLI::IsMember({"d1", "oulad", "canvas"}))
      ->capture_default_str();
  cmd->add_option("--path", args.path,
                  "D1 or OULAD directory, or Canvas CSV file (relative paths fall back to $EDM_DATA_DIR)")
      ->required();
  cmd->add_option("--dataset", args.dataset, "Dataset id D1, D2 or D3 (default from --source)");
  cmd->add_option("--mappings", args.mappings, "Band mapping JSON for OULAD/Canvas ordinal columns");
}

std::filesystem::path resolve(const std::string& path) {
  std::filesystem::path p = path;
  if (!std::filesystem::exists(p) && p.is_relative()) {
    if (const char* root = std::getenv("EDM_DATA_DIR")) p = std::filesystem::path(root) / p;
  }
  return p;
}

DatasetBundle load_source(const SourceArgs& args) {
  const auto path = resolve(args.path);
  BandMappings mappings = args.mappings.empty() ? BandMappings::defaults() : BandMappings::from_json_file(args.mappings);
  DatasetBundle b;
  if (args.source == "d1") {
    b = load_d1(path);
  } else if (args.source == "oulad") {
    OuladOptions o;
    o.mappings = mappings;
    b = load_oulad(path, o);
  } else {
    CanvasOptions o;
    o.mappings = mappings;
    b = load_canvas(path, o);
  }
  if (!args.dataset.empty()) b.dataset_id = parse_dataset_id(args.dataset);
  return b;
}

void print_report(const ValidationReport& report) {
  for (const auto& [kind, count] : report.counts) std::cerr << kind << ": " << count << "\n";
  for (const auto& v : report.first_offenders) std::cerr << "  [" << v.kind << "] row " << v.row << ": " << v.message << "\n";
}

int cmd_ingest(const SourceArgs& args, const std::string& out, bool additional, double threshold) {
  const auto bundle = load_source(args);
  LabelRule rule;
  rule.pass_threshold = threshold;
  const bool with_additional = additional && bundle.dataset_id == DatasetId::D1;
  const auto matrix = build_feature_matrix(bundle, with_additional, rule);
  const auto [complete, log] = filter_complete(matrix);
  write_feature_matrix(matrix, out);
  std::cerr << "learners: " << matrix.rows() << ", complete: " << complete.rows()
            << ", quarantined: " << log.removed.size() << ", load issues: " << bundle.load_issues.size() << "\n";
  for (const auto& e : log.removed) {
    std::cerr << "  " << e.row_id << ":";
    for (const auto& r : e.reasons) std::cerr << " " << r << ";";
    std::cerr << "\n";
  }
  std::cerr << "wrote " << out << "\n";
  return kExitOk;
}

int cmd_validate(const SourceArgs& args) {
  const auto bundle = load_source(args);
  const auto report = validate_bundle(bundle);
  if (report.clean()) {
    std::cerr << "clean: " << bundle.profiles.size() << " learners, " << bundle.events.size() << " events, "
              << bundle.quiz_attempts.size() << " quiz attempts\n";
    return kExitOk;
  }
  std::cerr << report.total() << " violations\n";
  print_report(report);
  return kExitUsage;
}

struct RunArgs {
  std::string config;
  std::string experiment;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::string balance;
  std::optional<int> jobs;
  std::string grid;
};

ExperimentConfig resolve_config(const RunArgs& args) {
  ExperimentConfig config;
  if (!args.config.empty()) config = ExperimentConfig::from_file(resolve(args.config));
  if (!args.experiment.empty()) config.experiment = parse_experiment(args.experiment);
  if (!args.out.empty()) config.out = args.out;
  if (args.seed) config.seed = *args.seed;
  if (args.folds) config.folds = *args.folds;
  if (!args.balance.empty()) config.balance = parse_balance_technique(args.balance);
  if (args.jobs) config.jobs = *args.jobs;
  if (!args.grid.empty()) {
    if (args.grid == "default") config.grid = GridMode::Default;
    else if (args.grid == "compact") config.grid = GridMode::Compact;
    else throw ConfigError("unknown grid: " + args.grid);
  }
  config.validate();
  return config;
}

int cmd_run(const RunArgs& args) {
  ExperimentConfig config;
  std::vector<LoadedDataset> datasets;
  try {
    config = resolve_config(args);
    datasets = load_datasets(config);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  RunManifest manifest;
  manifest.config_path = args.config;
  manifest.config = config;
  for (const auto& d : datasets) manifest.inputs.emplace_back(std::string(to_string(d.source.id)), d.digest);
  std::cerr << "running " << to_string(config.experiment) << " on " << datasets.size() << " dataset(s), "
            << config.folds << " folds, seed " << config.seed << "\n";
  ExperimentOutput output;
  std::vector<std::filesystem::path> written;
  try {
    output = run_experiment(config, datasets);
    written = emit_report(output, manifest, config.out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "experiment failed: " << e.what() << "\n";
    return kExitExperiment;
  }
  for (const auto& t : output.tables) std::cerr << "  table " << t.name << " (" << t.row_labels.size() << "x"
                                                << t.col_labels.size() << ")\n";
  std::cerr << "leakage checks: " << output.leakage_checks << ", violations: " << output.leakage_violations << "\n";
  std::cerr << "wrote " << written.size() << " files under " << (std::filesystem::path(config.out) / std::string(to_string(config.experiment))).string()
            << "\n";
  return output.leakage_violations == 0 ? kExitOk : kExitExperiment;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-source student performance prediction: ingest, validate, describe, synthesize and run experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(edm::kToolVersion));

  SourceArgs ingest_src;
  std::string ingest_out = "features.csv";
  bool ingest_additional = true;
  double ingest_threshold = 0.5;
  auto* ingest = app.add_subcommand("ingest", "Load a dataset and write its labeled feature matrix");
  add_source_flags(ingest, ingest_src);
  ingest->add_option("--out", ingest_out, "Output feature matrix CSV")->capture_default_str();
  ingest->add_flag("--minimal-only{false}", ingest_additional, "Skip the learning-preference features of D1");
  ingest->add_option("--pass-threshold", ingest_threshold, "Pass threshold as a fraction of the maximum grade")
      ->capture_default_str();

  SourceArgs validate_src;
  auto* validate = app.add_subcommand("validate", "Check a dataset against the schema and integrity rules");
  add_source_flags(validate, validate_src);

  RunArgs describe_args;
  auto* describe_cmd = app.add_subcommand("describe", "Per-feature summaries and histograms of the configured datasets");
  describe_cmd->add_option("--config", describe_args.config, "Experiment config JSON (datasets section is used)");
  describe_cmd->add_option("--out", describe_args.out, "Output directory");

  edm::PlantSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic D1-shaped dataset with a planted label rule");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--n", synth_spec.n_learners, "Number of learners")->capture_default_str();
  synth->add_option("--seed", synth_spec.seed, "Random seed")->capture_default_str();
  synth->add_option("--noise", synth_spec.noise, "Label flip probability")->capture_default_str();
  synth->add_option("--ratio", synth_spec.target_ratio, "Target share of passing learners")->capture_default_str();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one experiment and write its tables");
  run->add_option("--experiment", run_args.experiment, "balancing, models, sources, transfer, selection or describe");
  run->add_option("--config", run_args.config, "Experiment config JSON (see data/defaults.json)");
  run->add_option("--out", run_args.out, "Output directory (overrides the config)");
  run->add_option("--seed", run_args.seed, "Root seed (overrides the config)");
  run->add_option("--folds", run_args.folds, "Cross-validation folds, >= 2 (overrides the config)");
  run->add_option("--balance", run_args.balance,
                  "Balancing technique: none, upsample, downsample, up_and_down or smote (overrides the config)");
  run->add_option("--jobs", run_args.jobs, "Worker threads, 0 = all cores (overrides the config)");
  run->add_option("--grid", run_args.grid, "Hyperparameter grid: default or compact (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(ingest_src, ingest_out, ingest_additional, ingest_threshold);
    if (*validate) return cmd_validate(validate_src);
    if (*synth) {
      const auto data = edm::generate_bundle(synth_spec);
      edm::write_synthetic(data, synth_out);
      std::cerr << "wrote " << data.bundle.profiles.size() << " learners to " << synth_out << "\n";
      return kExitOk;
    }
    if (*describe_cmd) {
      describe_args.experiment = "describe";
      return cmd_run(describe_args);
    }
    if (*run) return cmd_run(run_args);
  } catch (const edm::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const edm::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitExperiment;
  }
  return kExitUsage;
}
