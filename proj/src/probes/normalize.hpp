#pragma once

#include <string>
#include <utility>
#include <vector>

#include "probes/activation_set.hpp"

namespace memaudit {

inline constexpr double kStdFloor = 1e-8;

struct SideStats {
  Vector mean;
  Vector std;  // population std, floored at kStdFloor
};

// Index c of pos/neg holds the statistics of cluster c; a single entry means
// global normalization.
struct NormalizationStats {
  std::vector<SideStats> pos;
  std::vector<SideStats> neg;
  std::vector<std::string> warnings;
};

// Per side: subtract the column mean and divide by the column std, computed
// over all pairs or, when cluster_ids is set, within each cluster. Columns
// with zero variance are floored and reported in warnings. Throws
// Error(InvalidArgument) for fewer than two pairs or an empty cluster.
std::pair<ActivationPairSet, NormalizationStats> normalize(const ActivationPairSet& set);

// Applies previously fitted statistics (e.g. train-set statistics to the test
// set). Cluster ids of the input select the statistics.
ActivationPairSet apply_normalization(const ActivationPairSet& set, const NormalizationStats& stats);

}  // namespace memaudit
