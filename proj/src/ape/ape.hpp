#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ape/meta_prompts.hpp"
#include "backend/backend.hpp"
#include "dataset/records.hpp"
#include "json.hpp"
#include "util/error.hpp"

namespace memaudit {

// input + output is a raw record line: {"1::", "Toy Story (1995)::Animation|Children's|Comedy"}.
struct DemoPair {
  std::string input;
  std::string output;
  bool operator==(const DemoPair&) const = default;
};

DemoPair demo_from_line(std::string_view line, FieldKind kind);

struct PromptCandidate {
  std::string instruction;
  std::optional<double> score;
  int generation = 0;
  double temperature = 0.0;
  // Filled by evaluation.
  std::size_t matched = 0;
  std::size_t total = 0;
};

// Backend failure while generating candidates. partial() holds the
// candidates produced before the failure.
class ApeBackendError : public Error {
 public:
  ApeBackendError(ErrorCode code, const std::string& what, std::vector<PromptCandidate> partial)
      : Error(code, what), partial_(std::move(partial)) {}
  const std::vector<PromptCandidate>& partial() const noexcept { return partial_; }

 private:
  std::vector<PromptCandidate> partial_;
};

struct ApeConfig {
  std::size_t n_candidates = 100;
  std::size_t n_demos = 5;
  std::size_t top_k = 10;
  // Generation rounds per temperature, the initial proposal included.
  int n_iterations = 3;
  std::vector<double> temperatures{0.1, 0.5, 0.7, 0.9, 1.2, 2.0};
  std::size_t validation_size = 200;
  std::size_t probe_size = 500;
  FieldKind field_kind = FieldKind::Item;
  std::uint64_t seed = 0;
  std::string proposal_meta_prompt{kProposalMetaPrompt};
  std::string variation_meta_prompt{kVariationMetaPrompt};
  // Items match on the title alone unless set; users and ratings always
  // match every remaining field.
  bool full_record_match = false;
  // Extra generation attempts allowed to make up for duplicate candidates.
  std::size_t dedup_retry_budget = 100;
  // 0 = the backend's own cap.
  std::size_t max_in_flight = 0;

  // Throws Error(Config) on an inconsistent configuration.
  void validate() const;
};

// Trims, collapses whitespace runs, then compares case-sensitively.
bool exact_match(std::string_view prediction, std::string_view gold);

// Candidate instructions from the proposal meta-prompt followed by the demos,
// sampled at the given temperature. Candidates are deduplicated on
// normalized text; duplicates are re-drawn with fresh request seeds up to
// dedup_retry_budget extra attempts. A failing backend call raises
// ApeBackendError with the candidates collected so far.
std::vector<PromptCandidate> propose_prompts(Backend& backend, std::span<const DemoPair> demos, std::size_t n,
                                             double temperature, std::uint64_t seed, const ApeConfig& config = {});

struct PromptEvaluation {
  double score = 0.0;
  std::size_t matched = 0;
  std::size_t total = 0;
  std::size_t failures = 0;  // backend errors, counted as non-matches
  std::vector<std::string> errors;
};

// The query is the instruction, the demos as raw lines, then the key prefix
// of the record. Generation runs at temperature 0. The completion is cut at
// its first newline and at the expected field count before matching.
std::string build_evaluation_query(std::string_view instruction, std::span<const DemoPair> demos,
                                   std::string_view key_prefix);
// The part of a completion that is compared against the gold completion.
std::string extract_prediction(std::string_view completion, FieldKind kind, bool full_record_match);
std::string gold_target(std::string_view line, FieldKind kind, bool full_record_match);

PromptEvaluation evaluate_prompt(Backend& backend, const PromptCandidate& candidate, std::span<const DemoPair> demos,
                                 std::span<const std::string> records, FieldKind kind, const ApeConfig& config = {});

// n variations of the top candidates (parents taken round-robin), one
// variation meta-prompt per request. Generation index = max parent
// generation + 1. Error(Config) on an empty top list.
std::vector<PromptCandidate> refine(Backend& backend, std::span<const PromptCandidate> top, std::size_t n,
                                    double temperature, std::uint64_t seed, const ApeConfig& config = {});

// Highest scores first; ties by lower generation, then text.
std::vector<PromptCandidate> select_top_k(std::span<const PromptCandidate> pool, std::size_t k);

struct TemperatureCoverage {
  double temperature = 0.0;
  FieldKind field_kind = FieldKind::Item;
  double coverage = 0.0;  // matched / n_probed on the probe set
  std::size_t matched = 0;
  std::size_t n_probed = 0;
  std::string best_prompt;
  double best_validation_score = 0.0;
  // Best validation score seen up to and including each iteration.
  std::vector<double> best_history;
  bool completed = false;
  std::string error;
};

struct ApeStateEntry {
  double temperature = 0.0;
  int iteration = 0;
  PromptCandidate candidate;
};

struct CoverageReport {
  FieldKind field_kind = FieldKind::Item;
  std::size_t validation_size = 0;
  std::size_t probe_size = 0;
  std::vector<TemperatureCoverage> rows;
  std::vector<ApeStateEntry> state;
};

// Samples disjoint demo, validation and probe records, then for every
// temperature runs propose -> evaluate -> refine for n_iterations, keeps the
// best candidate ever seen and reports its coverage on the probe set. A
// backend failure ends the sweep; finished temperatures stay marked
// completed.
CoverageReport run_ape(Backend& backend, const Dataset& dataset, const ApeConfig& config);

std::string state_to_jsonl(std::span<const ApeStateEntry> state);
nlohmann::json to_json(const CoverageReport& report);

// Reference coverages from prior work, per field.
struct BaselineValues {
  std::string name;
  std::optional<double> item;
  std::optional<double> user;
  std::optional<double> rating;
  std::optional<double> get(FieldKind kind) const;
};

// Published reference values for LLaMA-1B and LLaMA-3B.
BaselineValues baseline_llama_1b();
BaselineValues baseline_llama_3b();

struct ComparisonRow {
  double temperature = 0.0;
  FieldKind field_kind = FieldKind::Item;
  double coverage = 0.0;
  std::optional<double> baseline;
  std::optional<double> delta;  // coverage - baseline; absent with no baseline
  bool missing_baseline = false;
};

std::vector<ComparisonRow> baseline_compare(std::span<const CoverageReport> reports, const BaselineValues& baseline);

// Temperatures as rows, item/user/rating coverage as columns, plus an optional
// baseline row.
std::string render_coverage_table(std::span<const CoverageReport> reports, const BaselineValues* baseline = nullptr);

}  // namespace memaudit
