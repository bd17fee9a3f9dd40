#include "edm/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edm/errors.hpp"
#include "edm/rng.hpp"

namespace edm {

std::string_view to_string(BalanceTechnique t) {
  switch (t) {
    case BalanceTechnique::None: return "none";
    case BalanceTechnique::Upsample: return "upsample";
    case BalanceTechnique::Downsample: return "downsample";
    case BalanceTechnique::UpAndDown: return "up_and_down";
    case BalanceTechnique::Smote: return "smote";
  }
  return "none";
}

BalanceTechnique parse_balance_technique(std::string_view text) {
  if (text == "none" || text == "baseline") return BalanceTechnique::None;
  if (text == "upsample") return BalanceTechnique::Upsample;
  if (text == "downsample") return BalanceTechnique::Downsample;
  if (text == "up_and_down" || text == "up+down") return BalanceTechnique::UpAndDown;
  if (text == "smote") return BalanceTechnique::Smote;
  throw ConfigError("unknown balance technique: " + std::string(text));
}

std::string_view to_string(BalanceScope s) {
  return s == BalanceScope::TrainFolds ? "train-folds" : "whole-dataset";
}

BalanceScope parse_balance_scope(std::string_view text) {
  if (text == "train-folds") return BalanceScope::TrainFolds;
  if (text == "whole-dataset") return BalanceScope::WholeDataset;
  throw ConfigError("unknown balance scope: " + std::string(text));
}

namespace {

// Appends a copy of row `src` of `from` to `to`, with an optional replacement feature vector.
void append_row(EncodedMatrix& to, const EncodedMatrix& from, std::size_t src, std::span<const double> values,
                const std::string& id_suffix) {
  to.X.append_row(values);
  to.labels.push_back(from.labels[src]);
  if (!from.row_ids.empty()) to.row_ids.push_back(from.row_ids[src] + id_suffix);
  if (!from.origin.empty()) to.origin.push_back(from.origin[src]);
}

EncodedMatrix empty_like(const EncodedMatrix& m) {
  EncodedMatrix out;
  out.columns = m.columns;
  out.manifest = m.manifest;
  out.standardization = m.standardization;
  out.X = Matrix(0, m.cols());
  return out;
}

std::vector<std::size_t> subsample(std::vector<std::size_t> rows, std::size_t keep, Rng& rng) {
  // Partial Fisher-Yates, then restore input order.
  for (std::size_t i = 0; i < keep; ++i) {
    std::size_t j = i + rng.below(rows.size() - i);
    std::swap(rows[i], rows[j]);
  }
  rows.resize(keep);
  std::sort(rows.begin(), rows.end());
  return rows;
}

// k nearest minority neighbours of each minority row (Euclidean, z-scored
// columns, ties by lower row position).
std::vector<std::vector<std::size_t>> minority_neighbours(const EncodedMatrix& data,
                                                          const std::vector<std::size_t>& minority, int k) {
  const std::size_t cols = data.cols();
  std::vector<double> mean(cols, 0.0), scale(cols, 1.0);
  const double n = static_cast<double>(data.rows());
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) s += data.X(r, c);
    mean[c] = s / n;
    double v = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) v += (data.X(r, c) - mean[c]) * (data.X(r, c) - mean[c]);
    const double sd = std::sqrt(v / n);
    if (sd > 0.0) scale[c] = sd;
  }
  std::vector<std::vector<std::size_t>> out(minority.size());
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t a = 0; a < minority.size(); ++a) {
    dist.clear();
    for (std::size_t b = 0; b < minority.size(); ++b) {
      if (a == b) continue;
      double d = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double diff = (data.X(minority[a], c) - data.X(minority[b], c)) / scale[c];
        d += diff * diff;
      }
      dist.emplace_back(d, b);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (int i = 0; i < k; ++i) out[a].push_back(dist[static_cast<std::size_t>(i)].second);
  }
  return out;
}

}  // namespace

EncodedMatrix rebalance(const EncodedMatrix& data, const BalanceSpec& spec) {
  if (spec.technique == BalanceTechnique::None) return data;
  if (data.labels.size() != data.rows()) throw DataError("rebalance: labels required");

  std::vector<std::size_t> rows_of[2];
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const int y = data.labels[r];
    if (y != 0 && y != 1) throw DataError("rebalance: labels must be binary");
    rows_of[y].push_back(r);
  }
  if (rows_of[0].empty() || rows_of[1].empty()) throw DataError("rebalance: one class is empty");
  // Minority is the smaller class; on a tie class 1 is treated as minority (no-op).
  const int minority = rows_of[1].size() <= rows_of[0].size() ? 1 : 0;
  const auto& min_rows = rows_of[minority];
  const auto& maj_rows = rows_of[1 - minority];
  const std::size_t n_min = min_rows.size();
  const std::size_t n_maj = maj_rows.size();

  Rng rng(spec.seed);
  EncodedMatrix out = empty_like(data);

  auto add_originals = [&](const std::vector<std::size_t>& rows) {
    for (auto r : rows) append_row(out, data, r, data.X.row(r), "");
  };
  auto add_duplicates = [&](const std::vector<std::size_t>& pool, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t r = pool[rng.below(pool.size())];
      append_row(out, data, r, data.X.row(r), "#dup" + std::to_string(i));
    }
  };

  switch (spec.technique) {
    case BalanceTechnique::Upsample: {
      std::vector<std::size_t> all(data.rows());
      std::iota(all.begin(), all.end(), 0);
      add_originals(all);
      add_duplicates(min_rows, n_maj - n_min);
      break;
    }
    case BalanceTechnique::Downsample: {
      auto kept = subsample(maj_rows, n_min, rng);
      kept.insert(kept.end(), min_rows.begin(), min_rows.end());
      std::sort(kept.begin(), kept.end());
      add_originals(kept);
      break;
    }
    case BalanceTechnique::UpAndDown: {
      const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(n_min + n_maj) / 2.0));
      auto kept = subsample(maj_rows, target, rng);
      kept.insert(kept.end(), min_rows.begin(), min_rows.end());
      std::sort(kept.begin(), kept.end());
      add_originals(kept);
      add_duplicates(min_rows, target - n_min);
      break;
    }
    case BalanceTechnique::Smote: {
      if (spec.smote_k < 1) throw DataError("rebalance: smote_k must be >= 1");
      if (static_cast<std::size_t>(spec.smote_k) >= n_min) {
        throw DataError("rebalance: smote_k (" + std::to_string(spec.smote_k) + ") must be below the minority count (" +
                        std::to_string(n_min) + ")");
      }
      std::vector<std::size_t> all(data.rows());
      std::iota(all.begin(), all.end(), 0);
      add_originals(all);
      const auto neighbours = minority_neighbours(data, min_rows, spec.smote_k);
      std::vector<double> synthetic(data.cols());
      for (std::size_t i = 0; i < n_maj - n_min; ++i) {
        const std::size_t a = rng.below(n_min);
        const std::size_t b = neighbours[a][rng.below(neighbours[a].size())];
        const double u = rng.uniform();
        const auto x = data.X.row(min_rows[a]);
        const auto nn = data.X.row(min_rows[b]);
        for (std::size_t c = 0; c < synthetic.size(); ++c) synthetic[c] = x[c] + u * (nn[c] - x[c]);
        append_row(out, data, min_rows[a], synthetic, "#smote" + std::to_string(i));
      }
      break;
    }
    case BalanceTechnique::None:
      break;
  }
  return out;
}

}  // namespace edm
