#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dataset/statements.hpp"
#include "probes/ccs.hpp"
#include "probes/kmeans.hpp"
#include "probes/normalize.hpp"

namespace memaudit {

enum class ProbeVariant { Ccs, ClusterNorm };

std::string_view to_string(ProbeVariant variant);
ProbeVariant parse_probe_variant(std::string_view name);

struct ProbeRunOptions {
  ProbeVariant variant = ProbeVariant::Ccs;
  int k = 5;
  int kmeans_max_iters = 300;
  // Cluster-Norm only: take clusters from set.cluster_ids instead of k-means.
  bool use_supplied_clusters = false;
  SplitSpec split;
  CcsConfig ccs;
  double threshold = 0.5;
};

struct ProbeRunResult {
  ProbeParams probe;
  EvalMetrics metrics;
  std::optional<ClusterAssignment> clusters;  // fitted on the train side
  std::vector<std::string> warnings;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

// Split, normalize (globally, or per cluster for Cluster-Norm, with
// statistics fitted on the train side), train CCS without labels, evaluate on
// the held-out side. Cluster-Norm clusters the concatenated [pos | neg]
// activations with k-means; held-out pairs join their nearest centroid.
ProbeRunResult run_probe(const ActivationPairSet& set, const ProbeRunOptions& options);

}  // namespace memaudit
