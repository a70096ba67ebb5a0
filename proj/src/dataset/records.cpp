#include "dataset/records.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <unordered_set>

#include "util/error.hpp"
#include "util/text.hpp"

namespace memaudit {

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Item: return "item";
    case FieldKind::User: return "user";
    case FieldKind::Rating: return "rating";
  }
  return "item";
}

FieldKind parse_field_kind(std::string_view name) {
  if (name == "item" || name == "movies" || name == "movie") return FieldKind::Item;
  if (name == "user" || name == "users") return FieldKind::User;
  if (name == "rating" || name == "ratings") return FieldKind::Rating;
  throw Error(ErrorCode::Config, "unknown field kind '" + std::string(name) + "'");
}

namespace {

constexpr std::string_view kDelim = "::";
constexpr std::size_t kMaxFields = 8;

struct Fields {
  std::array<std::string_view, kMaxFields> values{};
  std::size_t count = 0;
};

// Splits on "::"; count > kMaxFields is reported as kMaxFields + 1.
Fields split_fields(std::string_view line) {
  Fields f;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(kDelim, start);
    if (f.count == kMaxFields) {
      f.count = kMaxFields + 1;
      return f;
    }
    if (pos == std::string_view::npos) {
      f.values[f.count++] = line.substr(start);
      return f;
    }
    f.values[f.count++] = line.substr(start, pos - start);
    start = pos + kDelim.size();
  }
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  if (text.size() > 1 && text[0] == '0') return false;  // canonical form only
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// Calls row(fields, line_no, line) for each non-blank line.
template <typename Row>
void for_each_line(std::string_view raw, std::size_t expected_fields, Row&& row) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view line = raw.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    Fields f = split_fields(line);
    if (f.count != expected_fields) {
      throw ParseError(line_no, std::string(line),
                       "expected " + std::to_string(expected_fields) + " '::'-separated fields");
    }
    row(f, line_no, line);
  }
}

[[noreturn]] void bad_int(std::size_t line_no, std::string_view line, std::string_view field) {
  throw ParseError(line_no, std::string(line), "field '" + std::string(field) + "' is not an integer");
}

}  // namespace

std::vector<MovieRecord> parse_movies(std::string_view raw_text) {
  std::vector<MovieRecord> out;
  std::unordered_set<std::int64_t> seen;
  for_each_line(raw_text, 3, [&](const Fields& f, std::size_t line_no, std::string_view line) {
    MovieRecord r;
    if (!parse_int(f.values[0], r.movie_id)) bad_int(line_no, line, "movieID");
    if (r.movie_id <= 0) throw ValidationError(line_no, "line " + std::to_string(line_no) + ": movieID must be positive");
    if (f.values[1].empty()) throw ParseError(line_no, std::string(line), "empty title");
    r.title = std::string(f.values[1]);
    for (std::string_view g : split(f.values[2], "|")) {
      if (g.empty()) throw ParseError(line_no, std::string(line), "empty genre");
      r.genres.emplace_back(g);
    }
    if (!seen.insert(r.movie_id).second) {
      throw ValidationError(line_no, "line " + std::to_string(line_no) + ": duplicate movieID " +
                                         std::to_string(r.movie_id));
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<UserRecord> parse_users(std::string_view raw_text) {
  std::vector<UserRecord> out;
  std::unordered_set<std::int64_t> seen;
  for_each_line(raw_text, 5, [&](const Fields& f, std::size_t line_no, std::string_view line) {
    UserRecord r;
    if (!parse_int(f.values[0], r.user_id)) bad_int(line_no, line, "userID");
    if (r.user_id <= 0) throw ValidationError(line_no, "line " + std::to_string(line_no) + ": userID must be positive");
    if (f.values[1] != "M" && f.values[1] != "F") {
      throw ValidationError(line_no, "line " + std::to_string(line_no) + ": gender must be M or F");
    }
    r.gender = f.values[1][0];
    if (!parse_int(f.values[2], r.age)) bad_int(line_no, line, "age");
    if (!parse_int(f.values[3], r.occupation)) bad_int(line_no, line, "occupation");
    if (f.values[4].empty()) throw ParseError(line_no, std::string(line), "empty zip");
    for (char c : f.values[4]) {
      const auto u = static_cast<unsigned char>(c);
      if (!std::isalnum(u) && c != '-') throw ParseError(line_no, std::string(line), "zip is not alphanumeric");
    }
    r.zip = std::string(f.values[4]);
    if (!seen.insert(r.user_id).second) {
      throw ValidationError(line_no, "line " + std::to_string(line_no) + ": duplicate userID " +
                                         std::to_string(r.user_id));
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<RatingRecord> parse_ratings(std::string_view raw_text) {
  std::vector<RatingRecord> out;
  out.reserve(raw_text.size() / 24);
  for_each_line(raw_text, 4, [&](const Fields& f, std::size_t line_no, std::string_view line) {
    RatingRecord r;
    if (!parse_int(f.values[0], r.user_id)) bad_int(line_no, line, "userID");
    if (!parse_int(f.values[1], r.movie_id)) bad_int(line_no, line, "movieID");
    if (!parse_int(f.values[2], r.rating)) bad_int(line_no, line, "rating");
    if (!parse_int(f.values[3], r.timestamp)) bad_int(line_no, line, "timestamp");
    if (r.user_id <= 0 || r.movie_id <= 0) {
      throw ValidationError(line_no, "line " + std::to_string(line_no) + ": ids must be positive");
    }
    if (r.rating < 1 || r.rating > 5) {
      throw ValidationError(line_no, "line " + std::to_string(line_no) + ": rating " +
                                         std::to_string(r.rating) + " outside [1,5]");
    }
    if (r.timestamp < 0) {
      throw ValidationError(line_no, "line " + std::to_string(line_no) + ": negative timestamp");
    }
    out.push_back(r);
  });
  return out;
}

std::string serialize(const MovieRecord& record) {
  return std::to_string(record.movie_id) + "::" + record.title + "::" + join(record.genres, "|");
}

std::string serialize(const UserRecord& record) {
  return std::to_string(record.user_id) + "::" + std::string(1, record.gender) + "::" +
         std::to_string(record.age) + "::" + std::to_string(record.occupation) + "::" + record.zip;
}

std::string serialize(const RatingRecord& record) {
  return std::to_string(record.user_id) + "::" + std::to_string(record.movie_id) + "::" +
         std::to_string(record.rating) + "::" + std::to_string(record.timestamp);
}

DatasetStats dataset_stats(std::span<const MovieRecord> movies, std::span<const UserRecord> users,
                           std::span<const RatingRecord> ratings) {
  return DatasetStats{users.size(), movies.size(), ratings.size()};
}

Dataset load_dataset(const DatasetPaths& paths) {
  Dataset ds;
  if (!paths.movies.empty()) ds.movies = parse_movies(latin1_to_utf8(read_file(paths.movies)));
  if (!paths.users.empty()) ds.users = parse_users(latin1_to_utf8(read_file(paths.users)));
  if (!paths.ratings.empty()) ds.ratings = parse_ratings(latin1_to_utf8(read_file(paths.ratings)));
  return ds;
}

std::vector<std::string> raw_lines(const Dataset& dataset, FieldKind kind) {
  std::vector<std::string> out;
  switch (kind) {
    case FieldKind::Item:
      out.reserve(dataset.movies.size());
      for (const auto& r : dataset.movies) out.push_back(serialize(r));
      break;
    case FieldKind::User:
      out.reserve(dataset.users.size());
      for (const auto& r : dataset.users) out.push_back(serialize(r));
      break;
    case FieldKind::Rating:
      out.reserve(dataset.ratings.size());
      for (const auto& r : dataset.ratings) out.push_back(serialize(r));
      break;
  }
  return out;
}

std::size_t key_field_count(FieldKind kind) { return kind == FieldKind::Rating ? 2 : 1; }

std::size_t field_count(FieldKind kind) {
  switch (kind) {
    case FieldKind::Item: return 3;
    case FieldKind::User: return 5;
    case FieldKind::Rating: return 4;
  }
  return 0;
}

std::pair<std::string, std::string> split_key(std::string_view line, FieldKind kind) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < key_field_count(kind); ++i) {
    const std::size_t d = line.find(kDelim, pos);
    if (d == std::string_view::npos) {
      throw Error(ErrorCode::InvalidArgument, "line has no key prefix: '" + std::string(line) + "'");
    }
    pos = d + kDelim.size();
  }
  return {std::string(line.substr(0, pos)), std::string(line.substr(pos))};
}

bool is_well_formed(std::string_view line, FieldKind kind) {
  if (line.find('\n') != std::string_view::npos || trim(line).empty()) return false;
  try {
    switch (kind) {
      case FieldKind::Item: return parse_movies(line).size() == 1;
      case FieldKind::User: return parse_users(line).size() == 1;
      case FieldKind::Rating: return parse_ratings(line).size() == 1;
    }
  } catch (const Error&) {
    return false;
  }
  return false;
}

std::string strip_year(std::string_view title) {
  std::string_view t = trim(title);
  // "(dddd)" at the end
  if (t.size() >= 6 && t.back() == ')') {
    const std::size_t open = t.size() - 6;
    bool digits = t[open] == '(';
    for (std::size_t i = open + 1; digits && i < t.size() - 1; ++i) {
      digits = std::isdigit(static_cast<unsigned char>(t[i])) != 0;
    }
    if (digits) return std::string(trim(t.substr(0, open)));
  }
  return std::string(t);
}

}  // namespace memaudit
