#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "edm/metrics.hpp"

using namespace edm;

TEST_CASE("hand-computed confusion metrics") {
  Confusion c;
  c.tp = 3;
  c.fp = 1;
  c.tn = 4;
  c.fn = 2;
  const auto m = compute_metrics(c);
  CHECK(m.accuracy == doctest::Approx(70.0));
  // ((3/4) + (4/6)) / 2
  CHECK(m.precision == doctest::Approx(100.0 * (0.75 + 4.0 / 6.0) / 2));
  CHECK(m.precision == doctest::Approx(70.83).epsilon(1e-4));
  // recall: (3/5 + 4/5) / 2
  CHECK(m.recall == doctest::Approx(70.0));
  const double f1_pos = 2 * 0.75 * 0.6 / (0.75 + 0.6);
  const double f1_neg = 2 * (4.0 / 6) * 0.8 / (4.0 / 6 + 0.8);
  CHECK(m.f_score == doctest::Approx(100.0 * (f1_pos + f1_neg) / 2));
  CHECK_FALSE(m.undefined_class);

  // weighted by true class support (5 positives, 5 negatives here = macro)
  CHECK(compute_metrics(c, Averaging::Weighted).precision == doctest::Approx(m.precision));
}

TEST_CASE("weighted averaging uses class support") {
  Confusion c;
  c.tp = 8;
  c.fn = 2;
  c.tn = 1;
  c.fp = 1;
  const auto w = compute_metrics(c, Averaging::Weighted);
  const double p_pos = 8.0 / 9, p_neg = 1.0 / 3;
  CHECK(w.precision == doctest::Approx(100.0 * (10 * p_pos + 2 * p_neg) / 12));
}

TEST_CASE("a class that is never predicted contributes zero and is flagged") {
  const std::vector<int> truth = {1, 1, 0, 0};
  const std::vector<int> pred = {1, 1, 1, 1};
  const auto c = confusion_of(truth, pred);
  CHECK(c == Confusion{2, 2, 0, 0});
  const auto m = compute_metrics(c);
  CHECK(m.undefined_class);
  CHECK(m.precision == doctest::Approx(25.0));
}

TEST_CASE("empty confusion is rejected") { CHECK_THROWS_AS(compute_metrics(Confusion{}), std::invalid_argument); }

TEST_CASE("aggregate uses the sample standard deviation") {
  MetricsReport r;
  for (double a : {60.0, 70.0, 80.0}) {
    Metrics m;
    m.accuracy = a;
    r.folds.push_back(m);
  }
  aggregate(r);
  CHECK(r.mean.accuracy == doctest::Approx(70.0));
  CHECK(r.std_dev.accuracy == doctest::Approx(10.0));
  CHECK(r.std_error.accuracy == doctest::Approx(10.0 / std::sqrt(3.0)));

  std::ostringstream out;
  write_metrics_csv(r, out);
  const auto text = out.str();
  CHECK(text.find("mean") != std::string::npos);
  CHECK(text.find("stderr") != std::string::npos);
}
