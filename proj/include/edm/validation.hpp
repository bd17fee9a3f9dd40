#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "edm/features.hpp"
#include "edm/metrics.hpp"
#include "edm/model.hpp"
#include "edm/resample.hpp"

namespace edm {

/// Test-fold index sets. Each class is shuffled and dealt round-robin so that
/// per-class counts differ by at most one across folds. Throws DataError when a
/// class has fewer than k members.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y, int k, std::uint64_t seed);

/// Stratified train/test split holding out `test_fraction` of each class.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(std::span<const int> y,
                                                                                double test_fraction,
                                                                                std::uint64_t seed);

/// Shared counters for the leakage guard, summed across every cross-validation that uses them.
struct LeakageTally {
  std::atomic<std::size_t> checks{0};
  std::atomic<std::size_t> violations{0};
};

/// Counts training rows whose origin also appears in `test`.
std::size_t count_leaked_rows(const EncodedMatrix& train, const EncodedMatrix& test);

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  Averaging averaging = Averaging::Macro;
  BalanceSpec balance;
  LeakageTally* tally = nullptr;
};

/// Per fold: balance the training part (or the whole dataset first, per scope),
/// fit standardization on training rows only, train, evaluate on the untouched
/// test fold. Seeds derive from options.seed and the fold number.
MetricsReport cross_validate(const EncodedMatrix& data, const ModelSpec& spec, const CvOptions& options);

struct GridResult {
  std::size_t best = 0;
  std::vector<ModelSpec> points;
  std::vector<MetricsReport> reports;

  const ModelSpec& best_spec() const { return points.at(best); }
  const MetricsReport& best_report() const { return reports.at(best); }
};

/// Cross-validates every grid point with the same folds; best = highest mean
/// accuracy, ties to the lexicographically smallest grid key.
GridResult grid_search(const EncodedMatrix& data, const std::vector<ModelSpec>& grid, const CvOptions& options,
                       int jobs = 1);

}  // namespace edm
