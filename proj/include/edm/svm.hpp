#pragma once

#include <cstdint>
#include <vector>

#include "edm/features.hpp"

namespace edm {

struct SvmParams {
  double C = 1.0;
  int epochs = 20;

  bool operator==(const SvmParams&) const = default;
};

/// Linear soft-margin classifier: predicts 1 when w.x + b > 0.
struct LinearMarginModel {
  std::vector<double> weights;
  double bias = 0.0;
  double C = 1.0;
  StandardizationStats stats;
  // Primal objective 0.5|w|^2 + C sum hinge of the averaged iterate after each epoch.
  std::vector<double> objective_trace;

  double decision(std::span<const double> x) const;
  int predict_row(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : 0; }
  std::vector<int> predict(const Matrix& X) const;

  bool operator==(const LinearMarginModel&) const = default;
};

/// 0.5 |w|^2 + C sum_i max(0, 1 - y_i (w.x_i + b)) with y in {-1, +1}.
double svm_objective(const LinearMarginModel& model, const Matrix& X, std::span<const int> labels);

/// Seeded Pegasos-style subgradient descent with step 1/(lambda t), lambda = 1/(C n),
/// returning the average of all iterates. Throws std::invalid_argument if `data`
/// was not produced by standardize().
LinearMarginModel train_svm(const EncodedMatrix& data, const SvmParams& params, std::uint64_t seed);

}  // namespace edm
