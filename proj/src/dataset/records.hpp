#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memaudit {

// Which of the three MovieLens-1M files a record or statement refers to.
enum class FieldKind { Item, User, Rating };

std::string_view to_string(FieldKind kind);
FieldKind parse_field_kind(std::string_view name);

struct MovieRecord {
  std::int64_t movie_id = 0;
  std::string title;  // includes the "(YYYY)" release year
  std::vector<std::string> genres;
  bool operator==(const MovieRecord&) const = default;
};

struct UserRecord {
  std::int64_t user_id = 0;
  char gender = 'M';
  int age = 0;
  int occupation = 0;
  std::string zip;
  bool operator==(const UserRecord&) const = default;
};

struct RatingRecord {
  std::int64_t user_id = 0;
  std::int64_t movie_id = 0;
  int rating = 0;
  std::int64_t timestamp = 0;
  bool operator==(const RatingRecord&) const = default;
};

struct DatasetStats {
  std::size_t n_users = 0;
  std::size_t n_movies = 0;
  std::size_t n_ratings = 0;
  bool operator==(const DatasetStats&) const = default;
};

// Parsers take decoded (UTF-8) text. Lines are "::"-delimited; blank lines are
// skipped and a trailing '\r' is tolerated. Malformed lines raise ParseError,
// semantic violations (range, duplicate id) raise ValidationError.
std::vector<MovieRecord> parse_movies(std::string_view raw_text);
std::vector<UserRecord> parse_users(std::string_view raw_text);
std::vector<RatingRecord> parse_ratings(std::string_view raw_text);

std::string serialize(const MovieRecord& record);
std::string serialize(const UserRecord& record);
std::string serialize(const RatingRecord& record);

DatasetStats dataset_stats(std::span<const MovieRecord> movies, std::span<const UserRecord> users,
                           std::span<const RatingRecord> ratings);

struct DatasetPaths {
  std::filesystem::path movies;
  std::filesystem::path users;
  std::filesystem::path ratings;
};

struct Dataset {
  std::vector<MovieRecord> movies;
  std::vector<UserRecord> users;
  std::vector<RatingRecord> ratings;
};

// Reads the files as Latin-1 and parses them. Empty paths are skipped.
Dataset load_dataset(const DatasetPaths& paths);

// Raw lines of one file kind, in file order.
std::vector<std::string> raw_lines(const Dataset& dataset, FieldKind kind);

// Number of leading "::" fields forming the lookup key of a raw line
// (movieID / userID / userID::movieID).
std::size_t key_field_count(FieldKind kind);

// Splits a raw line into key prefix (including the trailing "::") and the
// remaining completion: "1::Toy Story (1995)::Animation" -> {"1::", "Toy Story (1995)::Animation"}.
std::pair<std::string, std::string> split_key(std::string_view line, FieldKind kind);

// Number of "::" fields in a raw line of this kind.
std::size_t field_count(FieldKind kind);

// True iff the line parses as a record of this kind.
bool is_well_formed(std::string_view line, FieldKind kind);

// "Toy Story (1995)" -> "Toy Story". Titles without a trailing year are returned trimmed.
std::string strip_year(std::string_view title);

}  // namespace memaudit
