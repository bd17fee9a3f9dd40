#include <algorithm>
#include <cstdlib>
#include <set>
#include <fstream>
#include <sstream>
#include <thread>

#include "edm/csv.hpp"
#include "edm/digest.hpp"
#include "edm/errors.hpp"
#include "edm/experiments.hpp"

namespace edm {

using nlohmann::json;

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Balancing: return "balancing";
    case ExperimentKind::Models: return "models";
    case ExperimentKind::Sources: return "sources";
    case ExperimentKind::Transfer: return "transfer";
    case ExperimentKind::Selection: return "selection";
    case ExperimentKind::Describe: return "describe";
  }
  return "balancing";
}

ExperimentKind parse_experiment(std::string_view text) {
  for (auto k : {ExperimentKind::Balancing, ExperimentKind::Models, ExperimentKind::Sources, ExperimentKind::Transfer,
                 ExperimentKind::Selection, ExperimentKind::Describe}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown experiment: " + std::string(text));
}

namespace {

std::vector<PlantedFeature> default_plant(DatasetId id) {
  switch (id) {
    case DatasetId::D1: return {{"verbal", 1.0}, {"time", 1.0}};
    case DatasetId::D2: return {{"avrg_grade", 1.0}, {"nb_action", 1.0}};
    case DatasetId::D3: return {{"nb_action", 1.0}, {"age", 0.5}};
  }
  return {};
}

}  // namespace

std::vector<DatasetSource> default_datasets() {
  std::vector<DatasetSource> out;
  std::uint64_t seed = 1;
  for (auto id : {DatasetId::D1, DatasetId::D2, DatasetId::D3}) {
    DatasetSource s;
    s.id = id;
    s.seed = seed++;
    s.informative = default_plant(id);
    out.push_back(s);
  }
  return out;
}

namespace {

json source_json(const DatasetSource& s) {
  json j = {{"id", std::string(to_string(s.id))}, {"source", s.source}};
  if (s.source == "synthetic") {
    j["n_learners"] = s.n_learners;
    j["seed"] = s.seed;
    j["noise"] = s.noise;
    j["target_ratio"] = s.target_ratio;
    j["informative"] = json::array();
    for (const auto& f : s.informative) j["informative"].push_back({{"name", f.name}, {"weight", f.weight}});
  } else {
    j["path"] = s.path;
  }
  return j;
}

DatasetSource source_from(const json& j) {
  static const std::set<std::string> known = {"id",   "source",     "path",  "n_learners",  "seed",
                                              "noise", "target_ratio", "informative"};
  if (!j.is_object()) throw ConfigError("datasets entries must be objects");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown dataset key: " + k);
  }
  DatasetSource s;
  s.id = parse_dataset_id(j.at("id").get<std::string>());
  s.source = j.value("source", std::string("synthetic"));
  if (s.source != "synthetic" && s.source != "d1" && s.source != "oulad" && s.source != "canvas") {
    throw ConfigError("unknown dataset source: " + s.source);
  }
  s.path = j.value("path", std::string());
  if (s.source != "synthetic" && s.path.empty()) throw ConfigError("dataset " + s.source + " needs a path");
  s.n_learners = j.value("n_learners", s.n_learners);
  s.seed = j.value("seed", s.seed);
  s.noise = j.value("noise", s.noise);
  s.target_ratio = j.value("target_ratio", s.target_ratio);
  if (j.contains("informative")) {
    for (const auto& f : j.at("informative")) s.informative.push_back({f.at("name"), f.value("weight", 1.0)});
  } else {
    s.informative = default_plant(s.id);
  }
  return s;
}

template <class T, class F>
std::vector<T> parse_list(const json& j, F parse) {
  if (!j.is_array()) throw ConfigError("expected a list");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(parse(v.get<std::string>()));
  return out;
}

}  // namespace

void ExperimentConfig::apply_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "experiment") experiment = parse_experiment(v.get<std::string>());
      else if (key == "datasets") {
        datasets.clear();
        for (const auto& d : v) datasets.push_back(source_from(d));
      } else if (key == "models") models = parse_list<ModelFamily>(v, parse_model_family);
      else if (key == "balances") balances = parse_list<BalanceTechnique>(v, parse_balance_technique);
      else if (key == "balance") balance = parse_balance_technique(v.get<std::string>());
      else if (key == "balance_scope") balance_scope = parse_balance_scope(v.get<std::string>());
      else if (key == "smote_k") smote_k = v.get<int>();
      else if (key == "categories") categories = v.get<std::string>();
      else if (key == "ablation_dataset") ablation_dataset = parse_dataset_id(v.get<std::string>());
      else if (key == "selection_dataset") selection_dataset = parse_dataset_id(v.get<std::string>());
      else if (key == "seed") seed = v.get<std::uint64_t>();
      else if (key == "folds") folds = v.get<int>();
      else if (key == "jobs") jobs = v.get<int>();
      else if (key == "averaging") averaging = parse_averaging(v.get<std::string>());
      else if (key == "grid") {
        const auto g = v.get<std::string>();
        if (g == "default") grid = GridMode::Default;
        else if (g == "compact") grid = GridMode::Compact;
        else throw ConfigError("unknown grid: " + g);
      } else if (key == "label_threshold") label_threshold = v.get<double>();
      else if (key == "d3_label_column") d3_label_column = v.get<std::string>();
      else if (key == "out") out = v.get<std::string>();
      else if (key == "$schema" || key == "description") continue;
      else throw ConfigError("unknown config key: " + key);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
}

json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = std::string(to_string(experiment));
  j["datasets"] = json::array();
  for (const auto& d : datasets) j["datasets"].push_back(source_json(d));
  j["models"] = json::array();
  for (auto m : models) j["models"].push_back(std::string(to_string(m)));
  j["balances"] = json::array();
  for (auto b : balances) j["balances"].push_back(std::string(to_string(b)));
  j["balance"] = std::string(to_string(balance));
  j["balance_scope"] = std::string(to_string(balance_scope));
  j["smote_k"] = smote_k;
  j["categories"] = categories;
  j["ablation_dataset"] = std::string(to_string(ablation_dataset));
  j["selection_dataset"] = std::string(to_string(selection_dataset));
  j["seed"] = seed;
  j["folds"] = folds;
  j["jobs"] = jobs;
  j["averaging"] = std::string(to_string(averaging));
  j["grid"] = grid == GridMode::Default ? "default" : "compact";
  j["label_threshold"] = label_threshold;
  j["d3_label_column"] = d3_label_column;
  j["out"] = out;
  return j;
}

void ExperimentConfig::validate() const {
  if (folds < 2) throw ConfigError("folds must be >= 2 (got " + std::to_string(folds) + ")");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  if (smote_k < 1) throw ConfigError("smote_k must be >= 1");
  if (!(label_threshold >= 0.0 && label_threshold <= 1.0)) throw ConfigError("label_threshold must be in [0, 1]");
  if (models.empty()) throw ConfigError("models must not be empty");
  if (balances.empty()) throw ConfigError("balances must not be empty");
  if (datasets.empty()) throw ConfigError("no datasets configured");
  std::set<DatasetId> seen;
  for (const auto& d : datasets) {
    if (!seen.insert(d.id).second) throw ConfigError("dataset " + std::string(to_string(d.id)) + " listed twice");
  }
  try {
    parse_categories(categories);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("categories: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c;
  try {
    c.apply_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return c;
}

int ExperimentConfig::resolved_jobs() const {
  if (jobs > 0) return jobs;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

LabelRule ExperimentConfig::label_rule() const {
  LabelRule r;
  r.pass_threshold = label_threshold;
  r.d3_column = d3_label_column;
  return r;
}

std::vector<ModelSpec> ExperimentConfig::grid_for(ModelFamily family) const {
  if (grid == GridMode::Default) return default_grid(family);
  std::vector<ModelSpec> out;
  for (int depth : {3, 5}) {
    ModelSpec s;
    s.family = family;
    s.tree.max_depth = depth;
    s.n_trees = 50;
    if (family != ModelFamily::Svm) out.push_back(s);
  }
  for (double c : {0.1, 1.0}) {
    ModelSpec s;
    s.family = ModelFamily::Svm;
    s.svm.C = c;
    if (family == ModelFamily::Svm) out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string bundle_digest(const DatasetBundle& b) {
  std::ostringstream s;
  s << "dataset," << to_string(b.dataset_id) << '\n';
  auto opt = [](const auto& o) {
    std::ostringstream t;
    if (o) t << *o;
    return t.str();
  };
  for (const auto& p : b.profiles) {
    s << "p," << p.learner_id << ',' << opt(p.age) << ',' << to_string(p.gender) << ',' << opt(p.ed_level) << ','
      << opt(p.ed_field) << ',' << opt(p.native_lang) << ',' << opt(p.motivation) << ',' << csv::escape(p.descr_pos)
      << ',' << csv::escape(p.descr_neg) << '\n';
  }
  for (const auto& e : b.events) {
    s << "e," << e.learner_id << ',' << e.item_id << ',' << to_string(e.item_kind) << ',' << to_string(e.action) << ','
      << e.timestamp << '\n';
  }
  for (const auto& a : b.quiz_attempts) {
    s << "a," << a.learner_id << ',' << a.quiz_id << ',' << csv::format_double(a.grade) << ','
      << csv::format_double(a.max_grade) << ',' << a.time_started << ',' << a.time_finished << ',' << a.is_final
      << '\n';
  }
  for (const auto& q : b.question_results) {
    s << "q," << q.learner_id << ',' << q.quiz_id << ',' << q.question_id << ',' << to_string(q.skill_tag) << ','
      << q.correct << '\n';
  }
  for (const auto& q : b.quiz_items) {
    s << "i," << q.quiz_id << ',' << to_string(q.format_tag) << ',' << to_string(q.content_tag) << ',' << q.is_final
      << '\n';
  }
  for (const auto& g : b.aggregates) {
    s << "g," << g.learner_id << ','
      << (g.n_interactions ? csv::format_double(*g.n_interactions) : std::string()) << ',' << opt(g.final_result);
    for (const auto& [k, v] : g.outcome_values) s << ',' << k << '=' << csv::format_double(v);
    s << '\n';
  }
  return sha256_hex(s.str());
}

std::vector<LoadedDataset> load_datasets(const ExperimentConfig& config) {
  std::vector<LoadedDataset> out;
  for (const auto& src : config.datasets) {
    LoadedDataset d;
    d.source = src;
    if (src.source == "synthetic") {
      PlantSpec spec;
      spec.n_learners = src.n_learners;
      spec.seed = src.seed;
      spec.informative = src.informative;
      spec.noise = src.noise;
      spec.target_ratio = src.target_ratio;
      d.bundle = reshape_synthetic(generate_bundle(spec).bundle, src.id);
      d.resolved_path = "synthetic:" + std::to_string(src.seed);
    } else {
      std::filesystem::path p = src.path;
      if (!std::filesystem::exists(p) && p.is_relative()) {
        if (const char* root = std::getenv("EDM_DATA_DIR")) p = std::filesystem::path(root) / p;
      }
      d.resolved_path = p.string();
      if (src.source == "d1") d.bundle = load_d1(p);
      else if (src.source == "oulad") d.bundle = load_oulad(p);
      else d.bundle = load_canvas(p);
      d.bundle.dataset_id = src.id;
    }
    d.digest = bundle_digest(d.bundle);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace edm
