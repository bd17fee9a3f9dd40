#pragma once

#include <cstdint>
#include <string_view>

#include "edm/features.hpp"

namespace edm {

enum class BalanceTechnique { None, Upsample, Downsample, UpAndDown, Smote };

/// Where balancing happens relative to cross-validation.
enum class BalanceScope { TrainFolds, WholeDataset };

std::string_view to_string(BalanceTechnique t);
BalanceTechnique parse_balance_technique(std::string_view text);
std::string_view to_string(BalanceScope s);
BalanceScope parse_balance_scope(std::string_view text);

struct BalanceSpec {
  BalanceTechnique technique = BalanceTechnique::UpAndDown;
  std::uint64_t seed = 0;
  int smote_k = 5;
  BalanceScope scope = BalanceScope::TrainFolds;
};

/// Brings both classes to equal counts:
///  - upsample: minority drawn with replacement up to the majority count
///  - downsample: majority subsampled without replacement to the minority count
///  - up_and_down: both classes resized to round((n_min + n_maj) / 2)
///  - smote: minority grown with x + u (x_nn - x) points until counts match
/// Original rows come first in input order, followed by added rows. Throws
/// DataError if a class is empty or smote_k >= minority count.
EncodedMatrix rebalance(const EncodedMatrix& data, const BalanceSpec& spec);

}  // namespace edm
