#include "dataset/statements.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "json.hpp"

#include "dataset/fakes.hpp"
#include "util/error.hpp"
#include "util/rng.hpp"
#include "util/text.hpp"

namespace memaudit {

using nlohmann::json;

std::string default_template(FieldKind kind) {
  switch (kind) {
    case FieldKind::Item: return "The movie {entity} {polarity} in MovieLens-1M";
    case FieldKind::User: return "The user record {entity} {polarity} in MovieLens-1M";
    case FieldKind::Rating: return "The rating record {entity} {polarity} in MovieLens-1M";
  }
  return {};
}

namespace {
std::size_t count_of(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

void replace_once(std::string& s, std::string_view slot, std::string_view value) {
  const std::size_t pos = s.find(slot);
  s.replace(pos, slot.size(), value);
}
}  // namespace

void validate_template(std::string_view tmpl) {
  const auto entities = count_of(tmpl, kEntitySlot);
  const auto polarities = count_of(tmpl, kPolaritySlot);
  if (entities != 1 || polarities != 1) {
    throw Error(ErrorCode::Template, "template needs exactly one " + std::string(kEntitySlot) + " and one " +
                                         std::string(kPolaritySlot) + " slot: '" + std::string(tmpl) + "'");
  }
}

std::string render_statement(std::string_view tmpl, std::string_view entity, bool assert_membership) {
  validate_template(tmpl);
  std::string out(tmpl);
  // Polarity first: the entity text could itself contain a slot marker.
  replace_once(out, kPolaritySlot, assert_membership ? kAssertPhrase : kNegatePhrase);
  replace_once(out, kEntitySlot, entity);
  return out;
}

std::vector<ContrastPair> build_contrast_pairs(std::span<const Entity> genuine, std::span<const Entity> fakes,
                                               std::string_view tmpl, FieldKind kind) {
  validate_template(tmpl);
  std::vector<ContrastPair> out;
  out.reserve(genuine.size() + fakes.size());
  auto emit = [&](const Entity& e, bool label) {
    out.push_back(ContrastPair{render_statement(tmpl, e.text, true), render_statement(tmpl, e.text, false), label,
                               kind, e.source_id});
  };
  for (const auto& e : genuine) emit(e, true);
  for (const auto& e : fakes) emit(e, false);
  return out;
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::Split, "train_fraction must lie in (0,1)");
  }
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  if (n < 2 || n_train == 0 || n_train >= n) {
    throw Error(ErrorCode::Split, "split of " + std::to_string(n) + " items leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

std::pair<std::vector<ContrastPair>, std::vector<ContrastPair>> split_pairs(const std::vector<ContrastPair>& pairs,
                                                                            const SplitSpec& spec) {
  const SplitIndices idx = split_indices(pairs.size(), spec);
  std::vector<ContrastPair> train, test;
  train.reserve(idx.train.size());
  test.reserve(idx.test.size());
  for (auto i : idx.train) train.push_back(pairs[i]);
  for (auto i : idx.test) test.push_back(pairs[i]);
  return {std::move(train), std::move(test)};
}

Entity entity_of(const MovieRecord& r) { return {strip_year(r.title), "movie:" + std::to_string(r.movie_id)}; }

Entity entity_of(const UserRecord& r) { return {serialize(r), "user:" + std::to_string(r.user_id)}; }

Entity entity_of(const RatingRecord& r) {
  return {serialize(r), "rating:" + std::to_string(r.user_id) + ":" + std::to_string(r.movie_id)};
}

namespace {

template <typename Record>
std::vector<std::size_t> sample_indices(const std::vector<Record>& records, std::size_t max_records, Rng& rng) {
  std::vector<std::size_t> idx(records.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (max_records == 0 || max_records >= idx.size()) return idx;
  rng.shuffle(idx);
  idx.resize(max_records);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<ContrastPair> build_statement_set(const Dataset& dataset, FieldKind kind, const StatementOptions& options) {
  const std::string tmpl = options.template_text.empty() ? default_template(kind) : options.template_text;
  validate_template(tmpl);
  Rng rng(derive_seed(options.seed, "statements/sample"));
  const std::uint64_t fake_seed = derive_seed(options.seed, "statements/fakes");
  std::vector<Entity> genuine, fakes;

  auto n_fakes = [&](std::size_t n_genuine) {
    return static_cast<std::size_t>(std::llround(options.fake_ratio * static_cast<double>(n_genuine)));
  };

  switch (kind) {
    case FieldKind::Item: {
      for (auto i : sample_indices(dataset.movies, options.max_records, rng)) {
        genuine.push_back(entity_of(dataset.movies[i]));
      }
      std::vector<std::string> titles;
      titles.reserve(dataset.movies.size());
      for (const auto& m : dataset.movies) titles.push_back(m.title);
      std::unordered_set<std::string> used;
      FakeTitleOptions fto;
      fto.append_year = options.fake_title_year;
      const std::size_t want = n_fakes(genuine.size());
      for (std::uint64_t k = 0; fakes.size() < want; ++k) {
        if (k > want + kFakeRetryBudget) throw Error(ErrorCode::Generation, "could not generate distinct fake titles");
        std::string name = strip_year(generate_fake_title(titles, fake_seed + k, fto));
        if (!used.insert(name).second) continue;
        fakes.push_back({name, "fake-movie:" + std::to_string(fakes.size())});
      }
      break;
    }
    case FieldKind::User: {
      for (auto i : sample_indices(dataset.users, options.max_records, rng)) {
        genuine.push_back(entity_of(dataset.users[i]));
      }
      FakeRecordGenerator gen(dataset.users, {});
      std::unordered_set<std::string> used;
      const std::size_t want = n_fakes(genuine.size());
      for (std::uint64_t k = 0; fakes.size() < want; ++k) {
        if (k > want + kFakeRetryBudget) throw Error(ErrorCode::Generation, "could not generate distinct fake users");
        std::string line = serialize(gen.fake_user(fake_seed + k));
        if (!used.insert(line).second) continue;
        fakes.push_back({line, "fake-user:" + std::to_string(fakes.size())});
      }
      break;
    }
    case FieldKind::Rating: {
      for (auto i : sample_indices(dataset.ratings, options.max_records, rng)) {
        genuine.push_back(entity_of(dataset.ratings[i]));
      }
      FakeRecordGenerator gen({}, dataset.ratings);
      std::unordered_set<std::string> used;
      const std::size_t want = n_fakes(genuine.size());
      for (std::uint64_t k = 0; fakes.size() < want; ++k) {
        if (k > want + kFakeRetryBudget) throw Error(ErrorCode::Generation, "could not generate distinct fake ratings");
        std::string line = serialize(gen.fake_rating(fake_seed + k));
        if (!used.insert(line).second) continue;
        fakes.push_back({line, "fake-rating:" + std::to_string(fakes.size())});
      }
      break;
    }
  }
  return build_contrast_pairs(genuine, fakes, tmpl, kind);
}

std::string to_jsonl(std::span<const ContrastPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    json j{{"positive_text", p.positive_text},
           {"negative_text", p.negative_text},
           {"label", p.label ? json(*p.label) : json(nullptr)},
           {"field_kind", to_string(p.field_kind)},
           {"source_id", p.source_id}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ContrastPair> from_jsonl(std::string_view text) {
  std::vector<ContrastPair> out;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, "\n")) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      ContrastPair p;
      p.positive_text = j.at("positive_text").get<std::string>();
      p.negative_text = j.at("negative_text").get<std::string>();
      if (!j.at("label").is_null()) p.label = j.at("label").get<bool>();
      p.field_kind = parse_field_kind(j.at("field_kind").get<std::string>());
      p.source_id = j.at("source_id").get<std::string>();
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string(line), e.what());
    }
  }
  return out;
}

}  // namespace memaudit
