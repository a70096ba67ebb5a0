#include "dataset/fakes.hpp"

#include <algorithm>
#include <charconv>
#include <optional>

#include "util/error.hpp"
#include "util/rng.hpp"
#include "util/text.hpp"

namespace memaudit {

namespace {

struct TitleUnits {
  std::vector<std::size_t> word_starts;
  std::vector<std::size_t> boundaries;  // sorted, includes word starts and ends
};

TitleUnits units_of(std::string_view s) {
  TitleUnits u;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    if (i >= s.size()) break;
    std::size_t end = i;
    while (end < s.size() && s[end] != ' ') ++end;
    u.word_starts.push_back(i);
    for (std::size_t b = i; b < end; b += 2) u.boundaries.push_back(b);
    u.boundaries.push_back(end);
    i = end;
  }
  return u;
}

std::vector<std::size_t> ends_after(const TitleUnits& u, std::size_t start) {
  std::vector<std::size_t> out;
  for (std::size_t b : u.boundaries) {
    if (b > start) out.push_back(b);
  }
  return out;
}

std::vector<std::size_t> interior_cuts(const TitleUnits& u, std::size_t len) {
  std::vector<std::size_t> out;
  for (std::size_t b : u.boundaries) {
    if (b > 0 && b < len) out.push_back(b);
  }
  return out;
}

std::optional<int> year_of(std::string_view title) {
  title = trim(title);
  if (title.size() < 6 || title.back() != ')' || title[title.size() - 6] != '(') return std::nullopt;
  int year = 0;
  const char* first = title.data() + title.size() - 5;
  auto [ptr, ec] = std::from_chars(first, first + 4, year);
  if (ec != std::errc() || ptr != first + 4) return std::nullopt;
  return year;
}

}  // namespace

std::string blend_titles(std::string_view prefix_source, std::string_view suffix_source,
                         std::size_t prefix_word, std::size_t prefix_end_unit, std::size_t suffix_cut_unit) {
  const TitleUnits a = units_of(prefix_source);
  const TitleUnits b = units_of(suffix_source);
  if (prefix_word >= a.word_starts.size()) throw Error(ErrorCode::InvalidArgument, "prefix word out of range");
  const std::size_t start = a.word_starts[prefix_word];
  const auto ends = ends_after(a, start);
  const auto cuts = interior_cuts(b, suffix_source.size());
  if (prefix_end_unit >= ends.size() || suffix_cut_unit >= cuts.size()) {
    throw Error(ErrorCode::InvalidArgument, "unit boundary out of range");
  }
  std::string joined(trim(prefix_source.substr(start, ends[prefix_end_unit] - start)));
  joined += trim(suffix_source.substr(cuts[suffix_cut_unit]));
  return normalize_whitespace(joined);
}

std::string generate_fake_title(std::span<const std::string> real_titles, std::uint64_t seed,
                                const FakeTitleOptions& options) {
  std::unordered_set<std::string> real;
  std::vector<std::string> stripped;
  int min_year = 0, max_year = -1;
  for (const auto& t : real_titles) {
    real.insert(normalize_whitespace(t));
    std::string s = normalize_whitespace(strip_year(t));
    real.insert(s);
    stripped.push_back(std::move(s));
    if (auto y = year_of(t)) {
      if (max_year < min_year) min_year = max_year = *y;
      min_year = std::min(min_year, *y);
      max_year = std::max(max_year, *y);
    }
  }
  std::sort(stripped.begin(), stripped.end());
  stripped.erase(std::unique(stripped.begin(), stripped.end()), stripped.end());
  stripped.erase(std::remove_if(stripped.begin(), stripped.end(), [](const std::string& s) { return s.empty(); }),
                 stripped.end());
  if (stripped.size() < 2) {
    throw Error(ErrorCode::Generation, "fake title generation needs at least two distinct real titles");
  }

  Rng rng(seed);
  for (int attempt = 0; attempt < options.retry_budget; ++attempt) {
    const std::size_t i = rng.below(stripped.size());
    std::size_t j = rng.below(stripped.size() - 1);
    if (j >= i) ++j;
    const std::string& a = stripped[i];
    const std::string& b = stripped[j];
    const TitleUnits ua = units_of(a);
    const TitleUnits ub = units_of(b);
    const std::size_t word = rng.below(ua.word_starts.size());
    const auto ends = ends_after(ua, ua.word_starts[word]);
    const auto cuts = interior_cuts(ub, b.size());
    if (cuts.empty()) continue;  // single-character title
    const std::size_t end_unit = rng.below(ends.size());
    const std::size_t cut_unit = rng.below(cuts.size());
    std::string candidate = blend_titles(a, b, word, end_unit, cut_unit);
    if (candidate.size() < 2 || real.contains(candidate)) continue;
    if (options.append_year && max_year >= min_year) {
      candidate += " (" + std::to_string(rng.between(min_year, max_year)) + ")";
      if (real.contains(candidate)) continue;
    }
    return candidate;
  }
  throw Error(ErrorCode::Generation, "fake title retry budget exhausted");
}

void FakeRecordGenerator::IntRange::add(std::int64_t v) {
  if (empty()) {
    lo = hi = v;
  } else {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}

namespace {
std::uint64_t pair_key(std::int64_t user_id, std::int64_t movie_id) {
  return (static_cast<std::uint64_t>(user_id) << 32) ^ static_cast<std::uint64_t>(movie_id);
}
}  // namespace

FakeRecordGenerator::FakeRecordGenerator(std::span<const UserRecord> users, std::span<const RatingRecord> ratings,
                                         int retry_budget)
    : retry_budget_(retry_budget) {
  real_users_.reserve(users.size());
  for (const auto& u : users) {
    user_id_.add(u.user_id);
    age_.add(u.age);
    occupation_.add(u.occupation);
    zip_len_.add(static_cast<std::int64_t>(u.zip.size()));
    real_users_.insert(serialize(u));
  }
  real_pairs_.reserve(ratings.size());
  for (const auto& r : ratings) {
    r_user_.add(r.user_id);
    r_movie_.add(r.movie_id);
    r_rating_.add(r.rating);
    r_time_.add(r.timestamp);
    real_pairs_.insert(pair_key(r.user_id, r.movie_id));
  }
}

bool FakeRecordGenerator::is_real_user(const UserRecord& r) const { return real_users_.contains(serialize(r)); }

bool FakeRecordGenerator::is_real_rating_pair(std::int64_t user_id, std::int64_t movie_id) const {
  return real_pairs_.contains(pair_key(user_id, movie_id));
}

UserRecord FakeRecordGenerator::fake_user(std::uint64_t seed) const {
  if (real_users_.empty()) throw Error(ErrorCode::Generation, "no real users to derive field ranges from");
  static constexpr char kDigits[] = "0123456789";
  Rng rng(seed);
  for (int attempt = 0; attempt < retry_budget_; ++attempt) {
    UserRecord r;
    r.user_id = rng.between(user_id_.lo, user_id_.hi);
    r.gender = rng.below(2) == 0 ? 'M' : 'F';
    r.age = static_cast<int>(rng.between(age_.lo, age_.hi));
    r.occupation = static_cast<int>(rng.between(occupation_.lo, occupation_.hi));
    const auto len = rng.between(zip_len_.lo, zip_len_.hi);
    for (std::int64_t k = 0; k < len; ++k) r.zip.push_back(kDigits[rng.below(10)]);
    if (!is_real_user(r)) return r;
  }
  throw Error(ErrorCode::Generation, "fake user retry budget exhausted");
}

RatingRecord FakeRecordGenerator::fake_rating(std::uint64_t seed) const {
  if (real_pairs_.empty()) throw Error(ErrorCode::Generation, "no real ratings to derive field ranges from");
  Rng rng(seed);
  for (int attempt = 0; attempt < retry_budget_; ++attempt) {
    RatingRecord r;
    r.user_id = rng.between(r_user_.lo, r_user_.hi);
    r.movie_id = rng.between(r_movie_.lo, r_movie_.hi);
    r.rating = static_cast<int>(rng.between(r_rating_.lo, r_rating_.hi));
    r.timestamp = rng.between(r_time_.lo, r_time_.hi);
    if (!is_real_rating_pair(r.user_id, r.movie_id)) return r;
  }
  throw Error(ErrorCode::Generation, "fake rating retry budget exhausted");
}

std::string generate_fake_record(FieldKind kind, const Dataset& real, std::uint64_t seed) {
  switch (kind) {
    case FieldKind::User: return serialize(FakeRecordGenerator(real.users, {}).fake_user(seed));
    case FieldKind::Rating: return serialize(FakeRecordGenerator({}, real.ratings).fake_rating(seed));
    case FieldKind::Item: break;
  }
  throw Error(ErrorCode::InvalidArgument, "generate_fake_record handles user and rating rows; use generate_fake_title");
}

}  // namespace memaudit
