#include "probes/activation_set.hpp"

#include "util/error.hpp"

namespace memaudit {

void ActivationPairSet::validate() const {
  if (pos.rows() != neg.rows() || pos.cols() != neg.cols()) {
    throw Error(ErrorCode::InvalidArgument, "positive and negative activation matrices differ in shape");
  }
  if (labels && labels->size() != size()) throw Error(ErrorCode::InvalidArgument, "label count != pair count");
  if (cluster_ids) {
    if (cluster_ids->size() != size()) throw Error(ErrorCode::InvalidArgument, "cluster id count != pair count");
    for (int c : *cluster_ids) {
      if (c < 0) throw Error(ErrorCode::InvalidArgument, "negative cluster id");
    }
  }
  if (!pos.allFinite() || !neg.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite activation entry");
}

ActivationPairSet ActivationPairSet::subset(std::span<const std::size_t> rows) const {
  ActivationPairSet out;
  out.pos.resize(static_cast<Eigen::Index>(rows.size()), pos.cols());
  out.neg.resize(static_cast<Eigen::Index>(rows.size()), neg.cols());
  if (labels) out.labels.emplace();
  if (cluster_ids) out.cluster_ids.emplace();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    if (rows[i] >= size()) throw Error(ErrorCode::InvalidArgument, "subset row out of range");
    out.pos.row(static_cast<Eigen::Index>(i)) = pos.row(r);
    out.neg.row(static_cast<Eigen::Index>(i)) = neg.row(r);
    if (labels) out.labels->push_back((*labels)[rows[i]]);
    if (cluster_ids) out.cluster_ids->push_back((*cluster_ids)[rows[i]]);
  }
  return out;
}

Matrix ActivationPairSet::concatenated() const {
  Matrix out(pos.rows(), pos.cols() + neg.cols());
  out << pos, neg;
  return out;
}

}  // namespace memaudit
