#include "probes/probe_run.hpp"

#include <algorithm>

#include "util/error.hpp"
#include "util/rng.hpp"

namespace memaudit {

std::string_view to_string(ProbeVariant variant) {
  return variant == ProbeVariant::Ccs ? "ccs" : "cluster-norm";
}

ProbeVariant parse_probe_variant(std::string_view name) {
  if (name == "ccs") return ProbeVariant::Ccs;
  if (name == "cluster-norm" || name == "cluster_norm") return ProbeVariant::ClusterNorm;
  throw Error(ErrorCode::Config, "unknown probe variant '" + std::string(name) + "'");
}

ProbeRunResult run_probe(const ActivationPairSet& set, const ProbeRunOptions& options) {
  set.validate();
  if (!set.labels) throw Error(ErrorCode::Metrics, "probe evaluation needs labels");
  const SplitIndices idx = split_indices(set.size(), options.split);
  ActivationPairSet train = set.subset(idx.train);
  ActivationPairSet test = set.subset(idx.test);

  ProbeRunResult result;
  result.n_train = train.size();
  result.n_test = test.size();

  if (options.variant == ProbeVariant::Ccs) {
    train.cluster_ids.reset();
    test.cluster_ids.reset();
  } else if (options.use_supplied_clusters) {
    if (!set.cluster_ids) throw Error(ErrorCode::Config, "Cluster-Norm with supplied clusters needs cluster ids");
    // Re-index so that every train cluster is non-empty and test-only
    // clusters fall back to the nearest train cluster mean.
    std::vector<int> ids = *train.cluster_ids;
    std::vector<int> uniq = ids;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    auto remap = [&](int c) {
      return static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), c) - uniq.begin());
    };
    for (auto& c : *train.cluster_ids) c = remap(c);
    Matrix centroids = Matrix::Zero(static_cast<Eigen::Index>(uniq.size()), static_cast<Eigen::Index>(2 * set.dim()));
    std::vector<double> counts(uniq.size(), 0.0);
    const Matrix train_cat = train.concatenated();
    for (std::size_t i = 0; i < train.size(); ++i) {
      centroids.row((*train.cluster_ids)[i]) += train_cat.row(static_cast<Eigen::Index>(i));
      counts[static_cast<std::size_t>((*train.cluster_ids)[i])] += 1.0;
    }
    for (std::size_t c = 0; c < uniq.size(); ++c) centroids.row(static_cast<Eigen::Index>(c)) /= counts[c];
    const std::vector<int> nearest = assign_nearest(test.concatenated(), centroids);
    for (std::size_t i = 0; i < test.size(); ++i) {
      const int c = (*test.cluster_ids)[i];
      const bool known = std::binary_search(uniq.begin(), uniq.end(), c);
      (*test.cluster_ids)[i] = known ? remap(c) : nearest[i];
    }
  } else {
    ClusterAssignment clusters =
        kmeans(train.concatenated(), options.k, derive_seed(options.ccs.seed, "cluster-norm/kmeans"),
               options.kmeans_max_iters);
    train.cluster_ids = clusters.assignment;
    test.cluster_ids = assign_nearest(test.concatenated(), clusters.centroids);
    result.clusters = std::move(clusters);
  }

  auto [train_norm, stats] = normalize(train);
  const ActivationPairSet test_norm = apply_normalization(test, stats);
  result.warnings = stats.warnings;
  result.probe = train_ccs(train_norm, options.ccs);
  result.metrics = evaluate(result.probe, test_norm, options.threshold);
  return result;
}

}  // namespace memaudit
