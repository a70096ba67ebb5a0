#include <cmath>
#include <algorithm>
#include <set>

#include "dataset/statements.hpp"
#include "doctest.h"
#include "util/error.hpp"

using namespace memaudit;

TEST_CASE("genuine and fake movies render the assert/negate pair") {
  const std::vector<Entity> genuine = {{"Toy Story", "movie:1"}};
  const std::vector<Entity> fakes = {{"Storymanji", "fake-movie:0"}};
  const auto pairs = build_contrast_pairs(genuine, fakes, default_template(FieldKind::Item), FieldKind::Item);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].positive_text == "The movie Toy Story is in MovieLens-1M");
  CHECK(pairs[0].negative_text == "The movie Toy Story is not in MovieLens-1M");
  CHECK(pairs[0].label == true);
  CHECK(pairs[1].positive_text == "The movie Storymanji is in MovieLens-1M");
  CHECK(pairs[1].negative_text == "The movie Storymanji is not in MovieLens-1M");
  CHECK(pairs[1].label == false);
  CHECK(pairs[1].source_id == "fake-movie:0");
}

TEST_CASE("empty inputs give no pairs") {
  CHECK(build_contrast_pairs({}, {}, default_template(FieldKind::Item), FieldKind::Item).empty());
}

TEST_CASE("templates need exactly one entity slot and one polarity slot") {
  CHECK_THROWS_AS(validate_template("The movie {entity} in MovieLens-1M"), Error);
  CHECK_THROWS_AS(validate_template("{polarity} only"), Error);
  CHECK_THROWS_AS(validate_template("{entity} {entity} {polarity}"), Error);
  try {
    build_contrast_pairs({}, {}, "no slots", FieldKind::Item);
    FAIL("expected a template error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Template);
  }
}

TEST_CASE("split of 10 at 0.8 is 8/2, deterministic and a partition") {
  const SplitSpec spec{0.8, 42};
  const auto a = split_indices(10, spec);
  CHECK(a.train.size() == 8);
  CHECK(a.test.size() == 2);
  const auto b = split_indices(10, spec);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  std::vector<std::size_t> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
}

TEST_CASE("split sizes follow round(f * n)") {
  for (std::size_t n = 2; n < 60; ++n) {
    for (double f : {0.1, 0.25, 0.5, 0.8, 0.9}) {
      const auto expected = static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
      if (expected == 0 || expected == n) {
        CHECK_THROWS_AS(split_indices(n, {f, 1}), Error);
        continue;
      }
      const auto s = split_indices(n, {f, 1});
      CHECK(s.train.size() == expected);
      CHECK(s.train.size() + s.test.size() == n);
    }
  }
}

TEST_CASE("degenerate splits are split errors") {
  try {
    split_indices(1, {0.8, 0});
    FAIL("expected a split error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Split);
  }
  CHECK_THROWS_AS(split_indices(10, {0.0, 0}), Error);
  CHECK_THROWS_AS(split_indices(10, {1.0, 0}), Error);
}

TEST_CASE("split preserves total label counts") {
  std::vector<ContrastPair> pairs;
  for (int i = 0; i < 100; ++i) {
    pairs.push_back({"p" + std::to_string(i), "n" + std::to_string(i), i < 50, FieldKind::Item, std::to_string(i)});
  }
  const auto [train, test] = split_pairs(pairs, {0.8, 7});
  CHECK(train.size() == 80);
  auto count = [](const std::vector<ContrastPair>& v) {
    return std::count_if(v.begin(), v.end(), [](const ContrastPair& p) { return *p.label; });
  };
  CHECK(count(train) + count(test) == 50);
}

TEST_CASE("statement sets are balanced, deterministic and label fakes false") {
  Dataset ds;
  ds.movies = parse_movies(
      "1::Toy Story (1995)::Animation\n2::Jumanji (1995)::Adventure\n3::Heat (1995)::Action\n"
      "4::Casino (1995)::Drama\n5::Sabrina (1995)::Comedy\n6::Nixon (1995)::Drama");
  StatementOptions opts;
  opts.seed = 11;
  const auto a = build_statement_set(ds, FieldKind::Item, opts);
  const auto b = build_statement_set(ds, FieldKind::Item, opts);
  CHECK(a == b);
  REQUIRE(a.size() == 12);
  std::set<std::string> real;
  for (const auto& m : ds.movies) real.insert(strip_year(m.title));
  for (const auto& p : a) {
    CHECK(p.positive_text != p.negative_text);
    const bool genuine = p.source_id.rfind("movie:", 0) == 0;
    CHECK(p.label == genuine);
  }
}

TEST_CASE("statements round-trip through JSONL") {
  const std::vector<ContrastPair> pairs = {
      {"The movie A is in MovieLens-1M", "The movie A is not in MovieLens-1M", true, FieldKind::Item, "movie:1"},
      {"x", "y", std::nullopt, FieldKind::Rating, "r"}};
  CHECK(from_jsonl(to_jsonl(pairs)) == pairs);
  CHECK_THROWS_AS(from_jsonl("{not json}\n"), Error);
}
