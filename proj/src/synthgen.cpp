#include "edm/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "edm/errors.hpp"
#include "edm/features.hpp"
#include "edm/rng.hpp"

namespace edm {

std::string GroundTruth::to_json() const {
  nlohmann::json j;
  j["informative"] = nlohmann::json::array();
  for (std::size_t i = 0; i < informative.size(); ++i) {
    j["informative"].push_back(
        {{"name", informative[i].name}, {"weight", informative[i].weight}, {"mean", mean[i]}, {"scale", scale[i]}});
  }
  j["rule"] = "label = [sum(weight * (x - mean) / scale) >= threshold], then flipped for learners in 'flipped'";
  j["threshold"] = threshold;
  j["noise"] = noise;
  j["flipped"] = flipped;
  j["labels"] = nlohmann::json::object();
  for (std::size_t i = 0; i < learner_ids.size(); ++i) j["labels"][learner_ids[i]] = labels[i];
  return j.dump(2);
}

namespace {

constexpr std::int64_t kCourseStart = 1'700'000'000;

struct Latent {
  double ability[4];  // visual, verbal, factual, practical
  double memory_bias;
  double pace;
  double view_rate;
};

const char* kTags[] = {"visual", "verbal", "factual", "practical"};

std::string padded(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

SyntheticDataset generate_bundle(const PlantSpec& spec) {
  if (spec.n_learners < 2) throw std::invalid_argument("generate_bundle: need at least 2 learners");
  if (spec.informative.empty()) throw std::invalid_argument("generate_bundle: at least one informative feature");
  if (!(spec.noise >= 0.0 && spec.noise < 0.5)) throw std::invalid_argument("generate_bundle: noise must be in [0, 0.5)");
  if (spec.quizzes_per_tag < 1) throw std::invalid_argument("generate_bundle: quizzes_per_tag must be >= 1");
  if (spec.questions_per_quiz < 2 || spec.questions_per_quiz % 2 != 0) {
    throw std::invalid_argument("generate_bundle: questions_per_quiz must be even and >= 2");
  }
  const double adjusted = (spec.target_ratio - spec.noise) / (1.0 - 2.0 * spec.noise);
  if (!(adjusted >= 0.0 && adjusted <= 1.0)) {
    throw DataError("generate_bundle: target ratio " + std::to_string(spec.target_ratio) +
                    " cannot be reached with noise " + std::to_string(spec.noise));
  }

  Rng rng(derive_seed(spec.seed, "synthgen"));
  DatasetBundle b;
  b.dataset_id = DatasetId::D1;

  // Course: for every tag a resource then a quiz, repeated; one final quiz.
  struct Item {
    std::string resource;
    std::string quiz;
    int tag;
  };
  std::vector<Item> course;
  for (int round = 0; round < spec.quizzes_per_tag; ++round) {
    for (int t = 0; t < 4; ++t) {
      const std::string suffix = std::string(kTags[t]) + "_" + std::to_string(round + 1);
      course.push_back({"res_" + suffix, "quiz_" + suffix, t});
      QuizItemMeta meta;
      meta.quiz_id = "quiz_" + suffix;
      if (t == 0) meta.format_tag = FormatTag::Visual;
      if (t == 1) meta.format_tag = FormatTag::Verbal;
      if (t == 2) meta.content_tag = ContentTag::Factual;
      if (t == 3) meta.content_tag = ContentTag::Practical;
      b.quiz_items.push_back(meta);
    }
  }
  b.quiz_items.push_back({"quiz_final", FormatTag::None, ContentTag::None, true});

  static const char* kFields[] = {"stem", "health", "humanities", "business"};
  static const char* kMotivation[] = {"little", "moderate", "very"};
  static const Gender kGenders[] = {Gender::F, Gender::M, Gender::NA};
  const int q_per = spec.questions_per_quiz;

  for (std::size_t i = 0; i < spec.n_learners; ++i) {
    LearnerProfile p;
    p.learner_id = padded("L", i + 1, 4);
    p.age = 18 + static_cast<int>(rng.below(43));
    p.gender = kGenders[rng.below(3)];
    p.ed_level = 1 + static_cast<int>(rng.below(8));
    p.ed_field = kFields[rng.below(4)];
    p.native_lang = rng.bernoulli(0.7);
    p.motivation = kMotivation[rng.below(3)];
    b.profiles.push_back(p);

    Latent z{};
    for (double& a : z.ability) a = rng.uniform(0.15, 0.95);
    z.memory_bias = rng.uniform(-0.1, 0.1);
    z.pace = rng.uniform(0.5, 2.0);
    z.view_rate = rng.uniform(0.3, 1.0);

    std::int64_t clock = kCourseStart + static_cast<std::int64_t>(rng.below(86'400));
    auto attempt = [&](const std::string& quiz, bool is_final) -> QuizAttempt& {
      b.events.push_back({p.learner_id, quiz, ItemKind::Activity, Action::Attempt, clock});
      const auto dwell = static_cast<std::int64_t>(std::llround(z.pace * 600.0 * rng.uniform(0.8, 1.2)));
      b.quiz_attempts.push_back({p.learner_id, quiz, 0.0, 10.0, clock, clock + dwell, is_final});
      clock += dwell + 60 + static_cast<std::int64_t>(rng.below(3600));
      return b.quiz_attempts.back();
    };
    for (const auto& item : course) {
      const auto views = rng.bernoulli(z.view_rate) ? 1 + rng.below(3) : 0;
      for (std::uint64_t v = 0; v < views; ++v) {
        b.events.push_back({p.learner_id, item.resource, ItemKind::Resource, Action::View, clock});
        clock += 30 + static_cast<std::int64_t>(rng.below(900));
      }
      auto& a = attempt(item.quiz, false);
      int correct = 0;
      for (int q = 0; q < q_per; ++q) {
        const bool memory = q < q_per / 2;
        const double prob = std::clamp(z.ability[item.tag] + (memory ? z.memory_bias : -z.memory_bias), 0.0, 1.0);
        const bool ok = rng.bernoulli(prob);
        correct += ok;
        b.question_results.push_back({p.learner_id, item.quiz, item.quiz + "_q" + std::to_string(q + 1),
                                      memory ? SkillTag::Memory : SkillTag::Deduction, ok});
      }
      a.grade = 10.0 * correct / q_per;
    }
    attempt("quiz_final", true);
  }
  b.sort_canonical();

  // Realized feature values, exactly as the feature builders compute them.
  const auto features = encode(join_columns(build_minimal_features(b), build_additional_features(b)));
  const std::size_t n = spec.n_learners;
  GroundTruth truth;
  truth.informative = spec.informative;
  truth.noise = spec.noise;
  std::vector<double> score(n, 0.0);
  for (const auto& f : spec.informative) {
    const auto names = features.column_names();
    auto it = std::find(names.begin(), names.end(), f.name);
    if (it == names.end()) throw std::invalid_argument("generate_bundle: cannot plant feature '" + f.name + "'");
    const auto col = features.X.column(static_cast<std::size_t>(it - names.begin()));
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / static_cast<double>(n));
    if (!(sd > 0.0)) sd = 1.0;
    truth.mean.push_back(mean);
    truth.scale.push_back(sd);
    for (std::size_t r = 0; r < n; ++r) score[r] += f.weight * (col[r] - mean) / sd;
  }

  // Threshold between the sorted scores so that round(adjusted * n) learners clear it.
  std::vector<double> sorted = score;
  std::sort(sorted.begin(), sorted.end());
  const auto n_pos = static_cast<std::size_t>(std::llround(adjusted * static_cast<double>(n)));
  if (n_pos == 0) {
    truth.threshold = sorted.back() + 1.0;
  } else if (n_pos == n) {
    truth.threshold = sorted.front();
  } else {
    truth.threshold = (sorted[n - n_pos - 1] + sorted[n - n_pos]) / 2.0;
  }

  Rng noise_rng(derive_seed(spec.seed, "synthgen-noise"));
  Rng grade_rng(derive_seed(spec.seed, "synthgen-final"));
  std::unordered_map<std::string, int> label_of;
  for (std::size_t r = 0; r < n; ++r) {
    int label = score[r] >= truth.threshold ? 1 : 0;
    if (noise_rng.bernoulli(spec.noise)) {
      label = 1 - label;
      truth.flipped.push_back(features.row_ids[r]);
    }
    truth.learner_ids.push_back(features.row_ids[r]);
    truth.labels.push_back(label);
    label_of[features.row_ids[r]] = label;
  }
  for (auto& a : b.quiz_attempts) {
    if (!a.is_final) continue;
    a.grade = label_of.at(a.learner_id) ? 5.0 + static_cast<double>(grade_rng.below(6))
                                         : static_cast<double>(grade_rng.below(5));
  }
  return {std::move(b), std::move(truth)};
}

DatasetBundle reshape_synthetic(const DatasetBundle& d1, DatasetId target) {
  if (d1.dataset_id != DatasetId::D1) throw std::invalid_argument("reshape_synthetic: expects a D1-shaped bundle");
  if (target == DatasetId::D1) return d1;
  DatasetBundle out;
  out.dataset_id = target;
  out.profiles = d1.profiles;
  for (auto& p : out.profiles) {
    p.ed_field.reset();
    p.native_lang.reset();
    p.motivation.reset();
  }
  std::unordered_map<std::string, double> clicks;
  for (const auto& e : d1.events) clicks[e.learner_id] += 1.0;
  std::unordered_map<std::string, double> final_grade;
  for (const auto& a : d1.quiz_attempts) {
    if (a.is_final) {
      final_grade[a.learner_id] = a.grade / a.max_grade;
    } else if (target == DatasetId::D2) {
      out.quiz_attempts.push_back(a);
    }
  }
  if (target == DatasetId::D2) {
    for (const auto& q : d1.quiz_items) {
      if (!q.is_final) out.quiz_items.push_back({q.quiz_id, FormatTag::None, ContentTag::None, false});
    }
  }
  for (const auto& p : d1.profiles) {
    LearnerAggregate agg;
    agg.learner_id = p.learner_id;
    agg.n_interactions = clicks.count(p.learner_id) ? clicks[p.learner_id] : 0.0;
    auto it = final_grade.find(p.learner_id);
    if (it != final_grade.end()) {
      if (target == DatasetId::D2) {
        agg.final_result = it->second >= 0.5 ? "Pass" : "Fail";
      } else {
        agg.outcome_values["grade"] = it->second;
      }
    }
    out.aggregates.push_back(std::move(agg));
  }
  return out;
}

void write_synthetic(const SyntheticDataset& data, const std::filesystem::path& directory) {
  write_d1(data.bundle, directory);
  std::ofstream out(directory / "ground_truth.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (directory / "ground_truth.json").string());
  out << data.truth.to_json() << '\n';
}

}  // namespace edm
