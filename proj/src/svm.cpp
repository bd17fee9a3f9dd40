#include "edm/svm.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "edm/rng.hpp"

namespace edm {

double LinearMarginModel::decision(std::span<const double> x) const {
  if (x.size() != weights.size()) throw std::invalid_argument("predict: column count mismatch");
  double s = bias;
  for (std::size_t j = 0; j < x.size(); ++j) s += weights[j] * x[j];
  return s;
}

std::vector<int> LinearMarginModel::predict(const Matrix& X) const {
  std::vector<int> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict_row(X.row(r));
  return out;
}

double svm_objective(const LinearMarginModel& model, const Matrix& X, std::span<const int> labels) {
  double reg = 0.0;
  for (double w : model.weights) reg += w * w;
  double hinge = 0.0;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const double y = labels[r] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * model.decision(X.row(r)));
  }
  return 0.5 * reg + model.C * hinge;
}

LinearMarginModel train_svm(const EncodedMatrix& data, const SvmParams& params, std::uint64_t seed) {
  if (!data.standardization) throw std::invalid_argument("train_svm: input must be standardized first");
  if (data.rows() == 0) throw std::invalid_argument("train_svm: empty training set");
  if (params.C < 0.0) throw std::invalid_argument("train_svm: C must be >= 0");
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  LinearMarginModel model;
  model.C = params.C;
  model.stats = *data.standardization;
  model.weights.assign(d, 0.0);
  if (params.C == 0.0) {
    // Only the regularizer remains: w = 0, b = 0.
    model.objective_trace.push_back(svm_objective(model, data.X, data.labels));
    return model;
  }

  const double lambda = 1.0 / (params.C * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  // The bias rides along as weight d on a constant input of 1.
  std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < std::max(1, params.epochs); ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = data.labels[i] == 1 ? 1.0 : -1.0;
      const auto x = data.X.row(i);
      double margin = w[d];
      for (std::size_t j = 0; j < d; ++j) margin += w[j] * x[j];
      margin *= y;
      const double shrink = 1.0 - eta * lambda;
      for (auto& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * y * x[j];
        w[d] += eta * y;
      }
      double norm = 0.0;
      for (double v : w) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > radius) {
        for (auto& v : w) v *= radius / norm;
      }
      const double rate = 1.0 / static_cast<double>(t);
      for (std::size_t j = 0; j <= d; ++j) avg[j] += (w[j] - avg[j]) * rate;
    }
    model.weights.assign(avg.begin(), avg.begin() + static_cast<std::ptrdiff_t>(d));
    model.bias = avg[d];
    model.objective_trace.push_back(svm_objective(model, data.X, data.labels));
  }
  return model;
}

}  // namespace edm
