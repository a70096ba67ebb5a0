#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>

#include "dataset/records.hpp"

namespace memaudit {

inline constexpr int kFakeRetryBudget = 100;

struct FakeTitleOptions {
  // Appends " (YYYY)" with a year drawn from the range seen in the real titles.
  bool append_year = true;
  int retry_budget = kFakeRetryBudget;
};

// Blends two distinct real titles (years stripped): a segment of one title,
// starting at a word start and ending at a two-character unit boundary, is
// joined to the tail of the other title cut at a unit boundary, e.g.
// "Toy Story" + "Jumanji" -> "Story" + "manji". The blend never equals a
// real title. Throws Error(Generation) if fewer than two distinct titles are
// given or the retry budget runs out.
std::string generate_fake_title(std::span<const std::string> real_titles, std::uint64_t seed,
                                const FakeTitleOptions& options = {});

// One deterministic blend attempt; exposed for tests.
std::string blend_titles(std::string_view prefix_source, std::string_view suffix_source,
                         std::size_t prefix_word, std::size_t prefix_end_unit, std::size_t suffix_cut_unit);

// Draws synthetic user/rating rows from the per-field value ranges of the real
// data; a membership oracle built once in the constructor guarantees the draw
// is absent from the real data. Each draw is a pure function of the seed.
class FakeRecordGenerator {
 public:
  FakeRecordGenerator(std::span<const UserRecord> users, std::span<const RatingRecord> ratings,
                      int retry_budget = kFakeRetryBudget);

  UserRecord fake_user(std::uint64_t seed) const;
  // The (user_id, movie_id) pair of the result never occurs in the real ratings.
  RatingRecord fake_rating(std::uint64_t seed) const;

  bool is_real_user(const UserRecord& r) const;
  bool is_real_rating_pair(std::int64_t user_id, std::int64_t movie_id) const;

 private:
  struct IntRange {
    std::int64_t lo = 0;
    std::int64_t hi = -1;
    bool empty() const { return hi < lo; }
    void add(std::int64_t v);
  };

  int retry_budget_;
  IntRange user_id_, age_, occupation_, zip_len_;
  IntRange r_user_, r_movie_, r_rating_, r_time_;
  std::unordered_set<std::string> real_users_;
  std::unordered_set<std::uint64_t> real_pairs_;
};

// Serialized fake record of the given kind (user or rating).
std::string generate_fake_record(FieldKind kind, const Dataset& real, std::uint64_t seed);

}  // namespace memaudit
