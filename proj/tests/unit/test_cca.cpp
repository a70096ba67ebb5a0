#include "doctest.h"
#include "jailbreak/cca.hpp"
#include "util/error.hpp"

using namespace memaudit;

TEST_CASE("cca transcript structure") {
  const auto ex = default_cca_exemplars();
  REQUIRE(ex.size() == 2);
  const auto t = build_cca_transcript("2::", ex);
  REQUIRE(t.turns.size() == 3 + 2 * ex.size() + 1);
  CHECK(t.turns[0].role == Role::System);
  CHECK(t.turns[1].role == Role::User);
  CHECK(t.turns[1].content == kCcaRequest);
  CHECK(t.turns[2].role == Role::Assistant);
  CHECK(t.turns[2].content == kCcaAcknowledgment);
  CHECK(t.turns[3].content == "Input: 1::");
  CHECK(t.turns[4].content == "1::Toy Story (1995)::");
  CHECK(t.turns[5].content == "Input: 1::Toy Story (1995)::Animation");
  CHECK(t.turns[6].content == "1::Toy Story (1995)::Animation|Children's|Comedy");
  CHECK(t.turns.back().role == Role::User);
  CHECK(t.turns.back().content == "Input: 2::");
  for (std::size_t i = 3; i + 1 < t.turns.size(); i += 2) {
    CHECK(t.turns[i].role == Role::User);
    CHECK(t.turns[i + 1].role == Role::Assistant);
  }
  CHECK(std::string(kCcaRequest).find("MovieLens–1M") != std::string::npos);
}

TEST_CASE("cca transcript without exemplars and with a bad key") {
  const auto t = build_cca_transcript("5::", {});
  CHECK(t.turns.size() == 4);
  CHECK(t == build_cca_transcript("5::", {}));
  CHECK_THROWS_AS(build_cca_transcript("", default_cca_exemplars()), Error);
  const auto msgs = to_messages(t);
  CHECK(msgs.size() == 4);
  CHECK(msgs[0]["role"] == "system");
  CHECK(msgs[3]["content"] == "Input: 5::");
}

TEST_CASE("reply classification covers every verdict") {
  const std::string gold = "2::Jumanji (1995)::Adventure|Children's|Fantasy";
  std::set<std::string> seen;
  auto v = classify_reply(gold, gold, FieldKind::Item, seen);
  CHECK(v.verdict == Verdict::Valid);
  CHECK(*v.matched_record == gold);
  CHECK(classify_reply("Jumanji (1995)::Adventure|Children's|Fantasy", gold, FieldKind::Item, seen).verdict ==
        Verdict::Valid);
  seen.insert(normalize_reply("2::Jumanjo (1996)::Drama"));
  CHECK(classify_reply("2::Jumanjo (1996)::Drama", gold, FieldKind::Item, seen).verdict == Verdict::Duplicate);
  CHECK(classify_reply("Unknown", gold, FieldKind::Item, {}).verdict == Verdict::UnknownToken);
  CHECK(classify_reply("  Unknown ", gold, FieldKind::Item, {}).verdict == Verdict::UnknownToken);
  CHECK(classify_reply("2::Jumanjo (1996)::Drama", gold, FieldKind::Item, {}).verdict == Verdict::Hallucination);
  CHECK(classify_reply("I cannot help with that.", gold, FieldKind::Item, {}).verdict == Verdict::Malformed);
  CHECK(classify_reply("", gold, FieldKind::Item, {}).verdict == Verdict::Malformed);
  CHECK(to_string(Verdict::UnknownToken) == "unknown-token");
}
