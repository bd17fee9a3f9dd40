#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edm/ingest.hpp"

namespace edm {

struct PlantedFeature {
  std::string name;  // any numeric or ordinal feature of the D1 builders
  double weight = 1.0;

  bool operator==(const PlantedFeature&) const = default;
};

struct PlantSpec {
  std::size_t n_learners = 200;
  std::uint64_t seed = 0;
  std::vector<PlantedFeature> informative = {{"verbal", 1.0}, {"time", 1.0}};
  double noise = 0.05;         // label flip probability, in [0, 0.5)
  double target_ratio = 0.5;   // share of label 1
  int quizzes_per_tag = 2;     // per format tag and per content tag
  int questions_per_quiz = 6;  // even: half memory, half deduction
};

/// Label rule: score = sum_i weight_i * (x_i - mean_i) / scale_i over the
/// realized feature values; label = [score >= threshold] (the logistic of
/// score - threshold is >= 0.5), then flipped for the learners listed in `flipped`.
struct GroundTruth {
  std::vector<PlantedFeature> informative;
  std::vector<double> mean;
  std::vector<double> scale;
  double threshold = 0.0;
  double noise = 0.0;
  std::vector<std::string> flipped;
  std::vector<std::string> learner_ids;
  std::vector<int> labels;

  std::string to_json() const;
};

struct SyntheticDataset {
  DatasetBundle bundle;
  GroundTruth truth;
};

/// Deterministic D1-shaped bundle. Throws std::invalid_argument for an invalid
/// spec and DataError when the class ratio cannot be reached under the noise rate.
SyntheticDataset generate_bundle(const PlantSpec& spec);

/// Recasts a synthetic D1 bundle in the shape of the public datasets: D2 keeps the
/// non-final quiz attempts, a click total and a Pass/Fail result; D3 keeps only an
/// event total and a 0-1 grade. Labels are unchanged.
DatasetBundle reshape_synthetic(const DatasetBundle& d1, DatasetId target);

/// Canonical D1 CSVs plus ground_truth.json.
void write_synthetic(const SyntheticDataset& data, const std::filesystem::path& directory);

}  // namespace edm
