#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "backend/backend.hpp"
#include "dataset/records.hpp"

namespace memaudit {

// A salient feature unrelated to truth: each statement's entity is hashed into
// one of n_clusters clusters, and the activation is shifted along a seeded
// direction by polarity_sign * cluster_sign * magnitude, with cluster signs
// spread evenly over [-1, 1] (two clusters: -1 and +1). Because the shift
// flips with the statement's polarity, it is as contrast-consistent as the
// truth direction and can capture an unsupervised probe.
struct ConfoundSpec {
  std::uint64_t direction_seed = 7;
  double magnitude = 5.0;
  int n_clusters = 2;
};

struct MockSpec {
  std::size_t dim = 32;
  std::uint64_t truth_direction_seed = 1;
  std::uint64_t noise_seed = 0;
  double noise_scale = 0.1;
  // 0 gives pure-noise activations (plus the polarity offset).
  double truth_magnitude = 1.0;
  // Constant per-side offset separating assertions from negations.
  double polarity_magnitude = 1.0;
  std::optional<ConfoundSpec> confound;
  int n_layers = 16;

  // Generation side: the raw records the mock can look up and the subset of
  // record keys ("1", "1::1193") it reproduces verbatim.
  FieldKind field_kind = FieldKind::Item;
  std::vector<std::string> records;
  std::set<std::string> planted_memorized_ids;

  // Activation side: entity texts that are genuine, and statement templates
  // used to recover (entity, polarity) from a statement. The three default
  // templates are always tried.
  std::unordered_set<std::string> genuine_entities;
  std::vector<std::string> statement_templates;

  // Throws Error(Config) when dim < 2, noise_scale < 0 or n_layers < 1.
  void validate() const;
};

// Deterministic test double. Every response is a pure function of
// (MockSpec, request).
//
// Generation: the last line of the final user turn is read as a key prefix
// ("1::", "1::1193::", optionally after "Input: "). A planted key yields the
// gold continuation (or the whole gold line after "Input: "); any other key
// yields a hash-derived fabrication that never equals the gold record, and
// "Unknown" for keys absent from the records in "Input:" mode. Requests
// starting with the APE meta-prompts yield numbered instructions and
// echo-with-suffix variations.
//
// Activations: truth_magnitude * s * truth_dir + polarity offset + confound +
// noise_scale * N(0, I), where s = +1 when the statement is true (genuine
// entity asserted, or fake entity negated), -1 when false and 0 when the
// statement cannot be parsed. Noise is seeded by (noise_seed, layer, text).
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockSpec spec);

  GenerationResponse generate(const GenerationRequest& request) override;
  ActivationVector extract_activation(const ActivationRequest& request) override;
  std::string identity() const override;
  std::size_t max_in_flight() const override { return 8; }

  const MockSpec& spec() const { return spec_; }
  const std::vector<double>& truth_direction() const { return truth_dir_; }
  const std::vector<double>& confound_direction() const { return confound_dir_; }

  // Cluster of an entity under the confound spec (0 when there is none).
  int confound_cluster(std::string_view entity) const;

  // Splits text into the mock's token units (alnum runs and single symbols,
  // leading whitespace attached).
  static std::vector<std::string> tokenize(std::string_view text);

 private:
  std::string answer(const GenerationRequest& request) const;
  std::string fabricate(const std::string& key) const;

  MockSpec spec_;
  std::vector<double> truth_dir_;
  std::vector<double> polarity_dir_;
  std::vector<double> confound_dir_;
  std::unordered_map<std::string, std::string> by_key_;
  std::vector<std::string> templates_;
};

// Record key without the trailing delimiter: "1::Toy Story..." -> "1".
std::string record_id(std::string_view line, FieldKind kind);

}  // namespace memaudit
