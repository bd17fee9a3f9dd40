#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edm/features.hpp"
#include "edm/matrix.hpp"
#include "edm/model.hpp"
#include "edm/validation.hpp"

namespace edm {

enum class SelectionMethod { FE, BE, RFE, RFECV, ANOVA, KENDALL };

std::string_view to_string(SelectionMethod m);

struct SelectionStep {
  std::size_t step = 0;
  std::string feature;  // added (FE), removed (BE, RFE) or ranked (filters)
  double score = 0.0;

  bool operator==(const SelectionStep&) const = default;
};

struct CurvePoint {
  std::size_t k = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double std_error = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

/// Features are manifest groups: a one-hot categorical is one feature.
struct SelectionResult {
  SelectionMethod method = SelectionMethod::FE;
  // Wrappers: the chosen set, in the order it was picked (FE) or manifest order.
  // Filters: every feature, best first.
  std::vector<std::string> ordered;
  std::vector<SelectionStep> steps;
  std::optional<std::size_t> chosen_k;
  std::optional<double> baseline_score;  // BE: score of the full set
  std::vector<CurvePoint> curve;         // RFECV only
  std::string k_rule;                    // RFECV only
  std::vector<std::string> undefined;    // filters: features whose score is undefined

  bool operator==(const SelectionResult&) const = default;
};

struct WrapperOptions {
  CvOptions cv;
  std::optional<std::size_t> k;
  int jobs = 1;
};

/// Greedy forward selection by CV accuracy. Without k it stops once no addition
/// strictly improves; with k it adds exactly k. Ties pick the lowest manifest index.
SelectionResult forward_elimination(const EncodedMatrix& data, const ModelSpec& spec, const WrapperOptions& options);

/// Greedy backward elimination. Without k it removes while the best removal does
/// not lower the score; with k it removes down to k. Ties remove the lowest index.
SelectionResult backward_elimination(const EncodedMatrix& data, const ModelSpec& spec, const WrapperOptions& options);

/// Feature groups in elimination order (first dropped first), using importances of
/// the model refit at every step. Ties drop the highest manifest index.
std::vector<std::size_t> rfe_elimination_order(const EncodedMatrix& data, const ModelSpec& spec,
                                                const BalanceSpec& balance, std::uint64_t seed,
                                                std::size_t stop_at = 1, std::vector<double>* dropped_scores = nullptr);

SelectionResult rfe(const EncodedMatrix& data, const ModelSpec& spec, std::size_t k, const CvOptions& cv);

/// Per fold: RFE ranking on the training part, then every k evaluated on the test
/// fold. k* is the smallest k whose mean is within one standard error of the best.
SelectionResult rfe_cv(const EncodedMatrix& data, const ModelSpec& spec, const CvOptions& cv, int jobs = 1);

struct FilterScores {
  std::vector<double> values;
  std::vector<bool> undefined;
};

/// One-way F per column with the two label groups.
FilterScores anova_f(const Matrix& X, std::span<const int> y);

/// Kendall tau-b of each column against y, O(n log n).
FilterScores kendall_tau(const Matrix& X, std::span<const int> y);
double kendall_tau_b(std::span<const double> x, std::span<const double> y, bool* undefined = nullptr);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Matrix values;                // NaN where undefined (off the diagonal)
  std::vector<bool> undefined;  // per column: zero variance
};

CorrelationMatrix pearson_matrix(const EncodedMatrix& data);
CorrelationMatrix pearson_matrix(const Matrix& X);

/// Ranks feature groups by the largest |score| among their columns.
SelectionResult filter_ranking(SelectionMethod method, const EncodedMatrix& data);

void write_selection_csv(const SelectionResult& result, std::ostream& out);
std::string selection_json(const SelectionResult& result);
void write_curve_csv(const SelectionResult& result, std::ostream& out);

}  // namespace edm
