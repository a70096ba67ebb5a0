#include "probes/ccs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "util/error.hpp"
#include "util/rng.hpp"

namespace memaudit {

double ccs_loss(double p_pos, double p_neg) {
  const double consistency = p_pos - (1.0 - p_neg);
  const double confidence = std::min(p_pos, p_neg);
  return consistency * consistency + confidence * confidence;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

Vector sigmoid(const Vector& z) { return z.unaryExpr([](double v) { return memaudit::sigmoid(v); }); }

void check_dims(const Vector& weights, const ActivationPairSet& set) {
  if (static_cast<std::size_t>(weights.size()) != set.dim()) {
    throw Error(ErrorCode::Config, "probe dimension " + std::to_string(weights.size()) + " != activation dimension " +
                                       std::to_string(set.dim()));
  }
}

}  // namespace

double mean_ccs_loss(const Vector& weights, double bias, const ActivationPairSet& set) {
  check_dims(weights, set);
  const Vector p_pos = sigmoid((set.pos * weights).array() + bias);
  const Vector p_neg = sigmoid((set.neg * weights).array() + bias);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p_pos.size(); ++i) total += ccs_loss(p_pos[i], p_neg[i]);
  return total / static_cast<double>(p_pos.size());
}

double mean_ccs_gradient(const Vector& weights, double bias, const ActivationPairSet& set, Vector& grad_weights,
                         double& grad_bias) {
  check_dims(weights, set);
  const Eigen::Index n = set.pos.rows();
  const Vector p_pos = sigmoid((set.pos * weights).array() + bias);
  const Vector p_neg = sigmoid((set.neg * weights).array() + bias);
  Vector g_pos(n), g_neg(n);
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pp = p_pos[i];
    const double pn = p_neg[i];
    total += ccs_loss(pp, pn);
    const double c = pp + pn - 1.0;
    double d_pos = 2.0 * c;
    double d_neg = 2.0 * c;
    if (pp <= pn) {
      d_pos += 2.0 * pp;
    } else {
      d_neg += 2.0 * pn;
    }
    g_pos[i] = d_pos * pp * (1.0 - pp) * inv_n;
    g_neg[i] = d_neg * pn * (1.0 - pn) * inv_n;
  }
  grad_weights = set.pos.transpose() * g_pos + set.neg.transpose() * g_neg;
  grad_bias = g_pos.sum() + g_neg.sum();
  return total * inv_n;
}

ProbeParams train_ccs(const ActivationPairSet& train_set, const CcsConfig& config) {
  train_set.validate();
  if (train_set.size() < 2) throw Error(ErrorCode::InvalidArgument, "CCS training needs at least two pairs");
  if (config.n_restarts < 1 || config.epochs < 0 || !(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::Config, "CCS needs n_restarts >= 1, epochs >= 0 and learning_rate > 0");
  }
  // Labels are deliberately stripped.
  ActivationPairSet unlabeled;
  unlabeled.pos = train_set.pos;
  unlabeled.neg = train_set.neg;

  const auto dim = static_cast<Eigen::Index>(unlabeled.dim());
  const double init_scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::optional<ProbeParams> best;
  Vector grad_w(dim);
  double grad_b = 0.0;
  for (int restart = 0; restart < config.n_restarts; ++restart) {
    Rng rng(derive_seed(config.seed, "ccs/restart/" + std::to_string(restart)));
    Vector w(dim);
    for (Eigen::Index j = 0; j < dim; ++j) w[j] = rng.normal() * init_scale;
    double b = 0.0;
    bool finite = true;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      const double loss = mean_ccs_gradient(w, b, unlabeled, grad_w, grad_b);
      if (!std::isfinite(loss) || !grad_w.allFinite() || !std::isfinite(grad_b)) {
        finite = false;
        break;
      }
      w -= config.learning_rate * grad_w;
      b -= config.learning_rate * grad_b;
    }
    if (!finite) continue;
    const double final_loss = mean_ccs_loss(w, b, unlabeled);
    if (!std::isfinite(final_loss) || !w.allFinite()) continue;
    if (!best || final_loss < best->training_loss) {
      best = ProbeParams{w, b, final_loss, 1};
    }
  }
  if (!best) throw Error(ErrorCode::Training, "every CCS restart diverged");
  return *best;
}

double probe_score(const ProbeParams& probe, const Vector& pos, const Vector& neg) {
  if (pos.size() != probe.weights.size() || neg.size() != probe.weights.size()) {
    throw Error(ErrorCode::Config, "activation dimension does not match the probe");
  }
  const double o = probe.orientation >= 0 ? 1.0 : -1.0;
  const double p_pos = sigmoid(o * (probe.weights.dot(pos) + probe.bias));
  const double p_neg = sigmoid(o * (probe.weights.dot(neg) + probe.bias));
  return 0.5 * (p_pos + (1.0 - p_neg));
}

EvalMetrics metrics_from_scores(std::span<const double> scores, const std::vector<bool>& labels, double threshold) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::InvalidArgument, "score/label count mismatch");
  std::size_t tp = 0, tn = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i]) {
      ++pos;
      tp += predicted ? 1 : 0;
    } else {
      ++neg;
      tn += predicted ? 0 : 1;
    }
  }
  if (pos == 0 || neg == 0) throw Error(ErrorCode::Metrics, "evaluation set must contain both classes");
  EvalMetrics m;
  m.tpr = static_cast<double>(tp) / static_cast<double>(pos);
  m.tnr = static_cast<double>(tn) / static_cast<double>(neg);
  m.balanced_accuracy = (m.tpr + m.tnr) / 2.0;
  m.n_eval = scores.size();
  return m;
}

EvalMetrics evaluate(ProbeParams& probe, const ActivationPairSet& test_set, double threshold) {
  test_set.validate();
  if (!test_set.labels) throw Error(ErrorCode::Metrics, "evaluation needs labels");
  if (static_cast<std::size_t>(probe.weights.size()) != test_set.dim()) {
    throw Error(ErrorCode::Config, "activation dimension does not match the probe");
  }
  const std::vector<bool>& labels = *test_set.labels;

  auto score_all = [&](const ProbeParams& p) {
    std::vector<double> s(test_set.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      s[i] = probe_score(p, test_set.pos.row(r).transpose(), test_set.neg.row(r).transpose());
    }
    return s;
  };

  const EvalMetrics as_is = metrics_from_scores(score_all(probe), labels, threshold);
  if (as_is.balanced_accuracy >= 0.5) return as_is;
  ProbeParams flipped = probe;
  flipped.orientation = -probe.orientation;
  const EvalMetrics other = metrics_from_scores(score_all(flipped), labels, threshold);
  if (other.balanced_accuracy > as_is.balanced_accuracy) {
    probe.orientation = flipped.orientation;
    return other;
  }
  // Scores sitting exactly on the threshold are "true" under both
  // orientations, so both readings can fall below 0.5; report max(a, 1 - a).
  EvalMetrics mirrored = as_is;
  mirrored.balanced_accuracy = 1.0 - as_is.balanced_accuracy;
  mirrored.tpr = 1.0 - as_is.tpr;
  mirrored.tnr = 1.0 - as_is.tnr;
  probe.orientation = flipped.orientation;
  return mirrored;
}

}  // namespace memaudit
