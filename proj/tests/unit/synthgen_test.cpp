#include <cmath>

#include "doctest.h"
#include "edm/errors.hpp"
#include "edm/experiments.hpp"
#include "edm/features.hpp"
#include "edm/synthgen.hpp"
#include "support.hpp"

using namespace edm;

TEST_CASE("synthetic bundles are deterministic and valid") {
  PlantSpec spec;
  spec.n_learners = 80;
  spec.seed = 17;
  const auto a = generate_bundle(spec);
  const auto b = generate_bundle(spec);
  CHECK(content_equal(a.bundle, b.bundle));
  CHECK(a.truth.to_json() == b.truth.to_json());
  CHECK(validate_bundle(a.bundle).clean());
  spec.seed = 18;
  CHECK_FALSE(content_equal(a.bundle, generate_bundle(spec).bundle));
}

TEST_CASE("realized class ratio tracks the target") {
  for (double ratio : {0.3, 0.5, 0.7}) {
    PlantSpec spec;
    spec.n_learners = 400;
    spec.target_ratio = ratio;
    spec.noise = 0.05;
    spec.seed = 2;
    const auto s = generate_bundle(spec);
    double ones = 0;
    for (int l : s.truth.labels) ones += l;
    CAPTURE(ratio);
    CHECK(std::abs(ones / 400 - ratio) < 0.06);
    // flips are the only disagreements with the planted rule
    CHECK(s.truth.flipped.size() < 60);
  }
}

TEST_CASE("planted rule reproduces noise-free labels") {
  PlantSpec spec;
  spec.n_learners = 100;
  spec.noise = 0.0;
  const auto s = generate_bundle(spec);
  CHECK(s.truth.flipped.empty());
  const auto m = build_feature_matrix(s.bundle, true);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double score = 0;
    for (std::size_t i = 0; i < s.truth.informative.size(); ++i) {
      const double x = std::get<double>(m.cells[r][*m.column(s.truth.informative[i].name)]);
      score += s.truth.informative[i].weight * (x - s.truth.mean[i]) / s.truth.scale[i];
    }
    CHECK(((score >= s.truth.threshold) ? 1 : 0) == (*m.labels)[r]);
  }
}

TEST_CASE("invalid plant specs are rejected") {
  PlantSpec spec;
  spec.noise = 0.5;
  CHECK_THROWS_AS(generate_bundle(spec), std::invalid_argument);
  spec = {};
  spec.informative = {{"not_a_feature", 1.0}};
  CHECK_THROWS(generate_bundle(spec));
  spec = {};
  spec.noise = 0.3;
  spec.target_ratio = 0.1;
  CHECK_THROWS_AS(generate_bundle(spec), DataError);
}

TEST_CASE("reshaped bundles look like the public datasets") {
  PlantSpec spec;
  spec.n_learners = 50;
  const auto d1 = generate_bundle(spec).bundle;
  const auto d2 = reshape_synthetic(d1, DatasetId::D2);
  const auto d3 = reshape_synthetic(d1, DatasetId::D3);
  CHECK(validate_bundle(d2).clean());
  CHECK(validate_bundle(d3).clean());
  CHECK(d3.quiz_attempts.empty());
  CHECK(d2.aggregates.size() == 50);
  // labels survive the reshape
  const auto l1 = derive_labels(d1), l2 = derive_labels(d2), l3 = derive_labels(d3);
  CHECK(l1 == l2);
  CHECK(l1 == l3);
}

TEST_CASE("written synthetic data loads back") {
  testing::TempDir dir("synth");
  PlantSpec spec;
  spec.n_learners = 25;
  const auto s = generate_bundle(spec);
  write_synthetic(s, dir.path);
  CHECK(std::filesystem::exists(dir.path / "ground_truth.json"));
  CHECK(content_equal(load_d1(dir.path), s.bundle));
}
