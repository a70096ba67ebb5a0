#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

namespace memaudit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Row i of pos/neg holds the activations of the assertion/negation of pair i.
struct ActivationPairSet {
  Matrix pos;
  Matrix neg;
  std::optional<std::vector<bool>> labels;
  std::optional<std::vector<int>> cluster_ids;

  std::size_t size() const { return static_cast<std::size_t>(pos.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(pos.cols()); }

  // Throws Error(InvalidArgument) on shape mismatch, wrong label/cluster
  // lengths, negative cluster ids or non-finite entries.
  void validate() const;

  ActivationPairSet subset(std::span<const std::size_t> rows) const;

  // n x 2*dim matrix [pos | neg].
  Matrix concatenated() const;
};

}  // namespace memaudit
