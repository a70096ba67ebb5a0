#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataset/records.hpp"

namespace memaudit {

inline constexpr std::string_view kEntitySlot = "{entity}";
inline constexpr std::string_view kPolaritySlot = "{polarity}";
inline constexpr std::string_view kAssertPhrase = "is";
inline constexpr std::string_view kNegatePhrase = "is not";

// An assertion and its negation about one entity. label is true iff the
// entity is genuine.
struct ContrastPair {
  std::string positive_text;
  std::string negative_text;
  std::optional<bool> label;
  FieldKind field_kind = FieldKind::Item;
  std::string source_id;
  bool operator==(const ContrastPair&) const = default;
};

struct Entity {
  std::string text;
  std::string source_id;
};

// "The movie {entity} {polarity} in MovieLens-1M" and the user/rating analogues.
std::string default_template(FieldKind kind);

// Throws Error(Template) unless each slot occurs exactly once.
void validate_template(std::string_view tmpl);

std::string render_statement(std::string_view tmpl, std::string_view entity, bool assert_membership);

// Genuine entities yield label=true pairs, fakes label=false, in that order.
std::vector<ContrastPair> build_contrast_pairs(std::span<const Entity> genuine, std::span<const Entity> fakes,
                                               std::string_view tmpl, FieldKind kind);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded permutation of [0, n); |train| = round(train_fraction * n). Throws
// Error(Split) if either side would be empty.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

std::pair<std::vector<ContrastPair>, std::vector<ContrastPair>> split_pairs(const std::vector<ContrastPair>& pairs,
                                                                            const SplitSpec& spec);

// Entity rendering of real records: year-stripped title for movies, the raw
// line for users and ratings.
Entity entity_of(const MovieRecord& r);
Entity entity_of(const UserRecord& r);
Entity entity_of(const RatingRecord& r);

struct StatementOptions {
  std::size_t max_records = 0;  // 0 = all genuine records
  double fake_ratio = 1.0;      // fakes per genuine record
  std::uint64_t seed = 0;
  std::string template_text;    // empty = default_template(kind)
  bool fake_title_year = true;
};

// Samples genuine records of one kind, generates matching fakes and renders
// the labeled contrast pairs.
std::vector<ContrastPair> build_statement_set(const Dataset& dataset, FieldKind kind, const StatementOptions& options);

std::string to_jsonl(std::span<const ContrastPair> pairs);
std::vector<ContrastPair> from_jsonl(std::string_view text);

}  // namespace memaudit
