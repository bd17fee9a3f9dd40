#include "edm/metrics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "edm/csv.hpp"
#include "edm/errors.hpp"

namespace edm {

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

Confusion confusion_of(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("confusion_of: size mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == 1) (truth[i] == 1 ? c.tp : c.fp)++;
    else (truth[i] == 0 ? c.tn : c.fn)++;
  }
  return c;
}

std::string_view to_string(Averaging a) { return a == Averaging::Macro ? "macro" : "weighted"; }

Averaging parse_averaging(std::string_view text) {
  if (text == "macro") return Averaging::Macro;
  if (text == "weighted") return Averaging::Weighted;
  throw ConfigError("unknown averaging mode: " + std::string(text));
}

Metrics compute_metrics(const Confusion& c, Averaging averaging) {
  const double n = static_cast<double>(c.total());
  if (n == 0.0) throw std::invalid_argument("compute_metrics: empty confusion");
  Metrics m;
  m.accuracy = 100.0 * static_cast<double>(c.tp + c.tn) / n;

  // Index 0: class 0 (fail), index 1: class 1 (pass).
  const double hit[2] = {static_cast<double>(c.tn), static_cast<double>(c.tp)};
  const double predicted[2] = {static_cast<double>(c.tn + c.fn), static_cast<double>(c.tp + c.fp)};
  const double support[2] = {static_cast<double>(c.tn + c.fp), static_cast<double>(c.tp + c.fn)};
  double p[2], r[2], f[2];
  for (int k = 0; k < 2; ++k) {
    if (predicted[k] == 0.0 || support[k] == 0.0) m.undefined_class = true;
    p[k] = predicted[k] > 0.0 ? hit[k] / predicted[k] : 0.0;
    r[k] = support[k] > 0.0 ? hit[k] / support[k] : 0.0;
    f[k] = p[k] + r[k] > 0.0 ? 2.0 * p[k] * r[k] / (p[k] + r[k]) : 0.0;
  }
  const double w0 = averaging == Averaging::Macro ? 0.5 : support[0] / n;
  const double w1 = averaging == Averaging::Macro ? 0.5 : support[1] / n;
  m.precision = 100.0 * (w0 * p[0] + w1 * p[1]);
  m.recall = 100.0 * (w0 * r[0] + w1 * r[1]);
  m.f_score = 100.0 * (w0 * f[0] + w1 * f[1]);
  return m;
}

void aggregate(MetricsReport& report) {
  const std::size_t k = report.folds.size();
  report.mean = report.std_dev = report.std_error = Metrics{};
  if (k == 0) return;
  auto fields = [](Metrics& m) { return std::array<double*, 4>{&m.accuracy, &m.precision, &m.recall, &m.f_score}; };
  auto mean = fields(report.mean);
  auto sd = fields(report.std_dev);
  auto se = fields(report.std_error);
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0.0;
    for (auto& f : report.folds) s += *fields(f)[i];
    *mean[i] = s / static_cast<double>(k);
    double v = 0.0;
    for (auto& f : report.folds) v += (*fields(f)[i] - *mean[i]) * (*fields(f)[i] - *mean[i]);
    *sd[i] = k > 1 ? std::sqrt(v / static_cast<double>(k - 1)) : 0.0;
    *se[i] = *sd[i] / std::sqrt(static_cast<double>(k));
  }
  for (const auto& f : report.folds) report.mean.undefined_class |= f.undefined_class;
}

void write_metrics_csv(const MetricsReport& report, std::ostream& out) {
  out << "# averaging=" << to_string(report.averaging) << "\n";
  out << "# balance=" << report.balance << "\n";
  csv::write_row(out, {"fold", "accuracy", "precision", "recall", "f_score", "undefined_class"});
  auto row = [&](const std::string& label, const Metrics& m) {
    csv::write_row(out, {label, csv::format_double(m.accuracy), csv::format_double(m.precision),
                         csv::format_double(m.recall), csv::format_double(m.f_score),
                         m.undefined_class ? "1" : "0"});
  };
  for (std::size_t i = 0; i < report.folds.size(); ++i) row(std::to_string(i), report.folds[i]);
  row("mean", report.mean);
  row("std", report.std_dev);
  row("stderr", report.std_error);
}

}  // namespace edm
