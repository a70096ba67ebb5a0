#include "probes/normalize.hpp"

#include <algorithm>

#include "util/error.hpp"

namespace memaudit {

namespace {

std::vector<int> cluster_of(const ActivationPairSet& set) {
  if (set.cluster_ids) return *set.cluster_ids;
  return std::vector<int>(set.size(), 0);
}

SideStats fit_side(const Matrix& m, const std::vector<Eigen::Index>& rows, const char* side, int cluster,
                   std::vector<std::string>& warnings) {
  SideStats s;
  const auto n = static_cast<double>(rows.size());
  // Shifted by the first row so that constant columns get an exact mean.
  const Vector shift = m.row(rows.front()).transpose();
  Vector acc = Vector::Zero(m.cols());
  for (auto r : rows) acc += m.row(r).transpose() - shift;
  s.mean = shift + acc / n;
  Vector var = Vector::Zero(m.cols());
  for (auto r : rows) var += (m.row(r).transpose() - s.mean).array().square().matrix();
  var /= n;
  s.std = var.array().sqrt().matrix();
  for (Eigen::Index j = 0; j < s.std.size(); ++j) {
    if (s.std[j] < kStdFloor) {
      s.std[j] = kStdFloor;
      warnings.push_back(std::string("zero-variance column ") + std::to_string(j) + " (" + side + ", cluster " +
                         std::to_string(cluster) + ") floored");
    }
  }
  return s;
}

void apply_side(Matrix& m, Eigen::Index row, const SideStats& s) {
  m.row(row) = ((m.row(row).transpose() - s.mean).array() / s.std.array()).matrix().transpose();
}

}  // namespace

std::pair<ActivationPairSet, NormalizationStats> normalize(const ActivationPairSet& set) {
  set.validate();
  if (set.size() < 2) throw Error(ErrorCode::InvalidArgument, "normalization needs at least two pairs");
  const std::vector<int> clusters = cluster_of(set);
  const int k = *std::max_element(clusters.begin(), clusters.end()) + 1;
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < clusters.size(); ++i) members[static_cast<std::size_t>(clusters[i])].push_back(static_cast<Eigen::Index>(i));

  NormalizationStats stats;
  for (int c = 0; c < k; ++c) {
    const auto& rows = members[static_cast<std::size_t>(c)];
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "cluster " + std::to_string(c) + " is empty");
    stats.pos.push_back(fit_side(set.pos, rows, "pos", c, stats.warnings));
    stats.neg.push_back(fit_side(set.neg, rows, "neg", c, stats.warnings));
  }
  return {apply_normalization(set, stats), std::move(stats)};
}

ActivationPairSet apply_normalization(const ActivationPairSet& set, const NormalizationStats& stats) {
  set.validate();
  ActivationPairSet out = set;
  const std::vector<int> clusters = cluster_of(set);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto c = static_cast<std::size_t>(clusters[i]);
    if (c >= stats.pos.size()) {
      throw Error(ErrorCode::InvalidArgument, "no normalization statistics for cluster " + std::to_string(c));
    }
    if (stats.pos[c].mean.size() != set.pos.cols()) {
      throw Error(ErrorCode::Config, "normalization statistics have a different dimension");
    }
    apply_side(out.pos, static_cast<Eigen::Index>(i), stats.pos[c]);
    apply_side(out.neg, static_cast<Eigen::Index>(i), stats.neg[c]);
  }
  return out;
}

}  // namespace memaudit
