#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "edm/features.hpp"
#include "edm/matrix.hpp"
#include "edm/rng.hpp"

namespace testing {

// Numeric columns x0.. in category A, one manifest group per column.
inline edm::EncodedMatrix encoded(const edm::Matrix& X, const std::vector<int>& y) {
  edm::EncodedMatrix m;
  m.X = X;
  m.labels = y;
  for (std::size_t c = 0; c < X.cols(); ++c) {
    const std::string name = "x" + std::to_string(c);
    m.columns.push_back({name, edm::SourceCategory::A, name});
    m.manifest.push_back({name, edm::SourceCategory::A, edm::FeatureKind::Numeric, {c}, {}});
  }
  for (std::size_t r = 0; r < X.rows(); ++r) {
    m.row_ids.push_back("r" + std::to_string(r));
    m.origin.push_back(static_cast<std::int64_t>(r));
  }
  return m;
}

// y depends on x0 only, plus `noise_cols` standard-normal columns.
inline edm::EncodedMatrix separable(std::size_t n, std::size_t noise_cols, std::uint64_t seed, double minority = 0.4) {
  edm::Rng rng(seed);
  edm::Matrix X(n, 1 + noise_cols);
  std::vector<int> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    y[r] = rng.uniform() < minority ? 1 : 0;
    X(r, 0) = y[r] * 2.0 + rng.normal() * 0.5;
    for (std::size_t c = 1; c <= noise_cols; ++c) X(r, c) = rng.normal();
  }
  return encoded(X, y);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("edm_test_" + tag + "_" + std::to_string(edm::mix64(reinterpret_cast<std::uintptr_t>(this))));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace testing
