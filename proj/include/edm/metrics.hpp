#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edm {

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  Confusion& operator+=(const Confusion& o);
  bool operator==(const Confusion&) const = default;
};

Confusion confusion_of(std::span<const int> truth, std::span<const int> predicted);

enum class Averaging { Macro, Weighted };

std::string_view to_string(Averaging a);
Averaging parse_averaging(std::string_view text);

/// Percentages in [0, 100].
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  // A class with no predicted (or no true) members contributed 0.
  bool undefined_class = false;

  bool operator==(const Metrics&) const = default;
};

/// Accuracy plus per-class precision/recall/F1 averaged over the two classes.
/// Throws std::invalid_argument on an empty confusion.
Metrics compute_metrics(const Confusion& c, Averaging averaging = Averaging::Macro);

struct MetricsReport {
  std::vector<Metrics> folds;
  Metrics mean;
  Metrics std_dev;   // sample standard deviation across folds
  Metrics std_error; // std_dev / sqrt(#folds)
  Confusion totals;
  Averaging averaging = Averaging::Macro;
  std::string balance;  // technique and scope that ran
  std::size_t provenance_checks = 0;
  std::size_t provenance_violations = 0;

  bool operator==(const MetricsReport&) const = default;
};

/// Fills mean/std_dev/std_error from folds.
void aggregate(MetricsReport& report);

/// One row per fold, then mean, std and stderr rows.
void write_metrics_csv(const MetricsReport& report, std::ostream& out);

}  // namespace edm
