#include <set>
#include <string>
#include <vector>

#include "dataset/fakes.hpp"
#include "dataset/records.hpp"
#include "doctest.h"
#include "util/error.hpp"

using namespace memaudit;

TEST_CASE("blending Toy Story with Jumanji can give Storymanji") {
  CHECK(blend_titles("Toy Story", "Jumanji", 1, 2, 0) == "Storymanji");
}

TEST_CASE("generate_fake_title is deterministic and never real") {
  const std::vector<std::string> titles = {"Toy Story (1995)", "Jumanji (1995)", "Heat (1995)", "Casino (1995)",
                                           "Sabrina (1995)"};
  std::set<std::string> real;
  for (const auto& t : titles) real.insert(strip_year(t));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::string a = generate_fake_title(titles, seed);
    CHECK(a == generate_fake_title(titles, seed));
    CHECK_FALSE(real.contains(strip_year(a)));
    CHECK(strip_year(a) != a);  // the year suffix is appended by default
  }
  FakeTitleOptions no_year;
  no_year.append_year = false;
  const std::string b = generate_fake_title(titles, 3, no_year);
  CHECK(strip_year(b) == b);
}

TEST_CASE("one distinct title cannot be blended") {
  const std::vector<std::string> one = {"Toy Story (1995)"};
  CHECK_THROWS_AS(generate_fake_title(one, 0), Error);
  const std::vector<std::string> same = {"Toy Story (1995)", "Toy Story (1995)"};
  try {
    generate_fake_title(same, 0);
    FAIL("expected a generation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Generation);
  }
}

TEST_CASE("fake ratings never reuse a real (user, movie) pair") {
  const auto users = parse_users("1::F::1::10::48067\n2::M::56::16::70072\n3::M::25::15::55117");
  const auto ratings = parse_ratings(
      "1::1::5::978300760\n1::2::3::978302109\n2::1::4::978301968\n3::3::4::978300275\n2::3::1::978824291");
  FakeRecordGenerator gen(users, ratings);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const RatingRecord r = gen.fake_rating(seed);
    CHECK(r.rating >= 1);
    CHECK(r.rating <= 5);
    CHECK_FALSE(gen.is_real_rating_pair(r.user_id, r.movie_id));
    CHECK(r == gen.fake_rating(seed));
  }
}

TEST_CASE("fake users stay within observed ranges and are not real") {
  const auto users = parse_users("1::F::1::10::48067\n2::M::56::16::70072\n3::M::25::15::55117");
  FakeRecordGenerator gen(users, {});
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const UserRecord u = gen.fake_user(seed);
    CHECK(u.user_id >= 1);
    CHECK(u.user_id <= 3);
    CHECK(u.age >= 1);
    CHECK(u.age <= 56);
    CHECK(u.occupation >= 10);
    CHECK(u.occupation <= 16);
    CHECK(u.zip.size() == 5);
    CHECK_FALSE(gen.is_real_user(u));
  }
}

TEST_CASE("no real records means no ranges") {
  Dataset empty;
  CHECK_THROWS_AS(generate_fake_record(FieldKind::Rating, empty, 1), Error);
  CHECK_THROWS_AS(generate_fake_record(FieldKind::User, empty, 1), Error);
}

TEST_CASE("generate_fake_record output parses as its kind") {
  Dataset ds;
  ds.users = parse_users("1::F::1::10::48067\n2::M::56::16::70072");
  ds.ratings = parse_ratings("1::1::5::978300760\n2::2::3::978302109");
  const std::string u = generate_fake_record(FieldKind::User, ds, 9);
  const std::string r = generate_fake_record(FieldKind::Rating, ds, 9);
  CHECK(is_well_formed(u, FieldKind::User));
  CHECK(is_well_formed(r, FieldKind::Rating));
  CHECK(r == generate_fake_record(FieldKind::Rating, ds, 9));
}
