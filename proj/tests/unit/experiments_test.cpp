#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edm/csv.hpp"
#include "edm/errors.hpp"
#include "edm/experiments.hpp"
#include "support.hpp"

using namespace edm;
using nlohmann::json;

namespace {

ExperimentConfig small_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.folds = 3;
  c.jobs = 1;
  c.grid = GridMode::Compact;
  for (auto& d : c.datasets) d.n_learners = 60;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config overlay keeps unspecified defaults") {
  ExperimentConfig c;
  c.apply_json(json::parse(R"({"seed": 7, "folds": 5, "balance": "smote", "models": ["DT"]})"));
  CHECK(c.seed == 7);
  CHECK(c.folds == 5);
  CHECK(c.balance == BalanceTechnique::Smote);
  CHECK(c.models == std::vector<ModelFamily>{ModelFamily::DecisionTree});
  CHECK(c.smote_k == 5);
  CHECK(c.datasets.size() == 3);
  c.apply_json(json::parse(R"({"$schema": "x", "description": "y"})"));
  CHECK(c.seed == 7);
}

TEST_CASE("config errors") {
  ExperimentConfig c;
  CHECK_THROWS_AS(c.apply_json(json::parse(R"({"sed": 1})")), ConfigError);
  CHECK_THROWS_AS(c.apply_json(json::parse(R"({"balance": "magic"})")), ConfigError);
  CHECK_THROWS_AS(c.apply_json(json::parse(R"({"folds": "ten"})")), ConfigError);
  c.folds = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.label_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config JSON round-trips and the shipped defaults parse") {
  ExperimentConfig c;
  c.seed = 99;
  c.grid = GridMode::Compact;
  ExperimentConfig back;
  back.apply_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  const auto shipped = ExperimentConfig::from_file(std::filesystem::path(EDM_SOURCE_DIR) / "data/defaults.json");
  CHECK(shipped.to_json() == ExperimentConfig{}.to_json());
}

TEST_CASE("config digest changes with any field") {
  RunManifest a, b;
  CHECK(a.config_digest() == b.config_digest());
  b.config.smote_k = 4;
  CHECK(a.config_digest() != b.config_digest());
  b = {};
  b.config.datasets[2].seed = 10;
  CHECK(a.config_digest() != b.config_digest());
}

TEST_CASE("result CSV round-trip") {
  ResultTable t;
  t.name = "demo";
  t.caption = "A caption, with comma";
  t.row_labels = {"accuracy", "f_score"};
  t.col_labels = {"D1", "D2"};
  t.cells = {{70.25, std::nan("")}, {round2(55.555), 0.0}};
  t.notes = {"first note"};
  const auto back = parse_result_csv(render_csv(t, "prov"), "demo");
  CHECK(back.caption == t.caption);
  CHECK(back.notes == t.notes);
  CHECK(back.row_labels == t.row_labels);
  CHECK(back.col_labels == t.col_labels);
  CHECK(back.cells[0][0] == 70.25);
  CHECK(std::isnan(back.cells[0][1]));
  CHECK(back.cells[1][0] == 55.56);
  CHECK(render_markdown(t, "prov").rfind("<!-- provenance: prov -->", 0) == 0);
}

TEST_CASE("one table gives one markdown and one CSV file plus a manifest") {
  testing::TempDir dir("report");
  ExperimentOutput out;
  out.experiment = ExperimentKind::Models;
  ResultTable t;
  t.name = "only";
  t.row_labels = {"r"};
  t.col_labels = {"c"};
  t.cells = {{1.0}};
  out.tables = {t};
  RunManifest m;
  m.inputs = {{"D1", std::string(64, 'a')}};
  const auto written = emit_report(out, m, dir.path);
  CHECK(written.size() == 3);
  const auto root = dir.path / "models";
  CHECK(std::filesystem::exists(root / "only.md"));
  CHECK(std::filesystem::exists(root / "only.csv"));
  const auto csv_text = slurp(root / "only.csv");
  CHECK(csv_text.find("config_sha256=" + m.config_digest()) != std::string::npos);
  CHECK(csv_text.find("D1=aaaaaaaaaaaaaaaa") != std::string::npos);
  const auto manifest = json::parse(slurp(root / "manifest.json"));
  CHECK(manifest.at("files").size() == 2);
  CHECK(manifest.at("seed") == 42);
}

TEST_CASE("experiments leave their input bundles untouched") {
  auto config = small_config(ExperimentKind::Sources);
  const auto datasets = load_datasets(config);
  const auto before = datasets;
  for (auto kind : {ExperimentKind::Sources, ExperimentKind::Selection, ExperimentKind::Describe}) {
    config.experiment = kind;
    run_experiment(config, datasets);
  }
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    CHECK(content_equal(datasets[i].bundle, before[i].bundle));
    CHECK(bundle_digest(datasets[i].bundle) == before[i].digest);
  }
}

TEST_CASE("balancing comparison is deterministic and leak-free") {
  auto config = small_config(ExperimentKind::Balancing);
  config.balances = {BalanceTechnique::None, BalanceTechnique::Smote};
  const auto datasets = load_datasets(config);
  const auto a = run_experiment(config, datasets);
  const auto b = run_experiment(config, datasets);
  REQUIRE(a.tables.size() == 2);
  CHECK(a.tables == b.tables);
  CHECK(a.tables[1].name == "balancing_smote");
  CHECK(a.tables[0].col_labels == std::vector<std::string>{"D1", "D2", "D3"});
  CHECK(a.leakage_checks > 0);
  CHECK(a.leakage_violations == 0);
  for (const auto& row : a.tables[0].cells) {
    for (double v : row) CHECK((v >= 0 && v <= 100));
  }
}

TEST_CASE("source ablation rows run from single sources to the full combination") {
  auto config = small_config(ExperimentKind::Sources);
  config.categories = "DAB";
  const auto out = run_experiment(config, load_datasets(config));
  REQUIRE(out.tables.size() == 1);
  const auto& t = out.tables[0];
  CHECK(t.row_labels == std::vector<std::string>{"D", "A", "B", "D+A", "D+B", "A+B", "D+A+B"});
  const auto last = t.cells.back();
  double importance = 0;
  for (std::size_t c = 4; c < last.size(); ++c) importance += last[c];
  CHECK(importance == doctest::Approx(100.0).epsilon(0.001));
  config.categories = "DP";
  config.ablation_dataset = DatasetId::D3;
  CHECK_THROWS_AS(run_experiment(config, load_datasets(config)), DataError);
}

TEST_CASE("describe histograms account for every row") {
  PlantSpec spec;
  spec.n_learners = 30;
  const auto out = describe(generate_bundle(spec).bundle);
  std::string hist;
  for (const auto& [name, content] : out.files) {
    if (name == "D1_histograms.csv") hist = content;
  }
  REQUIRE_FALSE(hist.empty());
  const auto table = csv::parse(hist);
  const auto feature = table.require("feature", "hist");
  const auto count = table.require("count", "hist");
  std::map<std::string, double> totals;
  for (const auto& row : table.rows) totals[row[feature]] += *csv::parse_double(row[count]);
  CHECK(totals.size() > 5);
  for (const auto& [name, total] : totals) {
    CAPTURE(name);
    CHECK(total == 30);
  }
  const auto empty = describe(DatasetBundle{});
  CHECK_FALSE(empty.files.empty());
}
