#pragma once

#include <cstdint>
#include <span>

#include "probes/activation_set.hpp"

namespace memaudit {

// Consistency (p_pos - (1 - p_neg))^2 plus confidence min(p_pos, p_neg)^2.
double ccs_loss(double p_pos, double p_neg);

double sigmoid(double z);

// Linear probe p(x) = sigmoid(orientation * (weights . x + bias)).
struct ProbeParams {
  Vector weights;
  double bias = 0.0;
  double training_loss = 0.0;
  int orientation = 1;  // +1 or -1, set by evaluate()
};

struct CcsConfig {
  int n_restarts = 10;
  int epochs = 1000;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

// Mean ccs_loss over the pairs at (weights, bias); orientation is ignored.
double mean_ccs_loss(const Vector& weights, double bias, const ActivationPairSet& set);

// Analytic gradient of mean_ccs_loss. At p_pos == p_neg the min term's
// subgradient is assigned to p_pos. Returns the loss.
double mean_ccs_gradient(const Vector& weights, double bias, const ActivationPairSet& set, Vector& grad_weights,
                         double& grad_bias);

// Full-batch gradient descent from n_restarts seeded starts (weights ~
// N(0, 1/dim), bias 0); returns the restart with the lowest final loss, ties
// to the lower restart index. Labels are never read. Restarts whose loss
// turns non-finite are dropped; Error(Training) if all are dropped.
ProbeParams train_ccs(const ActivationPairSet& train_set, const CcsConfig& config);

// (p_pos + 1 - p_neg) / 2. Error(Config) on dimension mismatch.
double probe_score(const ProbeParams& probe, const Vector& pos, const Vector& neg);

struct EvalMetrics {
  double balanced_accuracy = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  std::size_t n_eval = 0;
};

// Balanced accuracy of "score >= threshold means true". Error(Metrics) if
// both classes are not present.
EvalMetrics metrics_from_scores(std::span<const double> scores, const std::vector<bool>& labels, double threshold = 0.5);

// Scores the labeled pairs; when balanced accuracy is below 0.5 the probe's
// orientation is flipped and the better of the two readings is kept, so the
// result is never below 0.5.
EvalMetrics evaluate(ProbeParams& probe, const ActivationPairSet& test_set, double threshold = 0.5);

}  // namespace memaudit
