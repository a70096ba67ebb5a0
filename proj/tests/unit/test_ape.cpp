#include <set>

#include "ape/ape.hpp"
#include "backend/mock_backend.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "util/error.hpp"

using namespace memaudit;
using memaudit::testing::PromptSensitiveBackend;
using memaudit::testing::planted_spec;
using memaudit::testing::small_dataset;

TEST_CASE("exact match normalizes whitespace only") {
  CHECK(exact_match("Toy Story (1995)", "Toy Story (1995)"));
  CHECK(exact_match("  Toy   Story (1995) ", "Toy Story (1995)"));
  CHECK_FALSE(exact_match("toy story (1995)", "Toy Story (1995)"));
  CHECK_FALSE(exact_match("Toy Story", "Toy Story (1995)"));
  CHECK(exact_match("", ""));
  for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{{"a b", "a  b"}, {"x", "y"}, {"1::2", "1:: 2"}})
    CHECK(exact_match(a, b) == exact_match(b, a));
}

TEST_CASE("prediction extraction trims overflow") {
  CHECK(extract_prediction("Toy Story (1995)::Animation|Comedy\n2::Jumanji", FieldKind::Item, false) ==
        "Toy Story (1995)");
  CHECK(extract_prediction("Toy Story (1995)::Animation|Comedy", FieldKind::Item, true) ==
        "Toy Story (1995)::Animation|Comedy");
  CHECK(extract_prediction("F::1::10::48067::junk", FieldKind::User, false) == "F::1::10::48067");
  CHECK(extract_prediction("5::978300760\n", FieldKind::Rating, false) == "5::978300760");
  CHECK(gold_target("1::Toy Story (1995)::Animation", FieldKind::Item, false) == "Toy Story (1995)");
}

TEST_CASE("evaluation query layout") {
  const std::vector<DemoPair> demos = {demo_from_line("1::Toy Story (1995)::Animation", FieldKind::Item)};
  CHECK(demos[0].input == "1::");
  CHECK(demos[0].output == "Toy Story (1995)::Animation");
  CHECK(build_evaluation_query("Do it.", demos, "7::") == "Do it.\n\n1::Toy Story (1995)::Animation\n7::");
}

TEST_CASE("proposals are unique, sized and deterministic") {
  const auto d = small_dataset(30);
  MockBackend mock(planted_spec(d, FieldKind::Item, 10));
  const auto lines = raw_lines(d, FieldKind::Item);
  std::vector<DemoPair> demos;
  for (int i = 0; i < 5; ++i) demos.push_back(demo_from_line(lines[static_cast<std::size_t>(i)], FieldKind::Item));
  const auto a = propose_prompts(mock, demos, 25, 0.7, 3);
  CHECK(a.size() == 25);
  std::set<std::string> texts;
  for (const auto& c : a) {
    texts.insert(c.instruction);
    CHECK(c.generation == 0);
    CHECK(c.temperature == 0.7);
    CHECK_FALSE(c.score.has_value());
  }
  CHECK(texts.size() == 25);
  const auto b = propose_prompts(mock, demos, 25, 0.7, 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].instruction == b[i].instruction);
  CHECK(propose_prompts(mock, demos, 0, 0.7, 3).empty());
}

TEST_CASE("coverage equals the planted fraction") {
  const auto d = small_dataset(100);
  const auto lines = raw_lines(d, FieldKind::Item);
  const std::vector<DemoPair> demos = {demo_from_line(lines[0], FieldKind::Item)};
  PromptCandidate c;
  c.instruction = "Complete the record.";
  for (const auto& [planted, expected] : std::vector<std::pair<std::size_t, double>>{{25, 0.25}, {0, 0.0}, {100, 1.0}}) {
    MockBackend mock(planted_spec(d, FieldKind::Item, planted));
    const auto ev = evaluate_prompt(mock, c, demos, lines, FieldKind::Item);
    CHECK(ev.total == 100);
    CHECK(ev.matched == planted);
    CHECK(ev.score == expected);
    CHECK(ev.failures == 0);
  }
  MockBackend mock(planted_spec(d, FieldKind::Item, 0));
  CHECK_THROWS_AS(evaluate_prompt(mock, c, demos, std::span<const std::string>{}, FieldKind::Item), Error);
}

TEST_CASE("refinement produces descendants of the parents") {
  const auto d = small_dataset(10);
  MockBackend mock(planted_spec(d, FieldKind::Item, 2));
  std::vector<PromptCandidate> top(2);
  top[0].instruction = "Alpha instruction.";
  top[0].generation = 1;
  top[1].instruction = "Beta instruction.";
  top[1].generation = 3;
  const auto kids = refine(mock, top, 6, 0.9, 1);
  CHECK(kids.size() == 6);
  std::set<std::string> texts;
  for (const auto& k : kids) {
    CHECK(k.generation == 4);
    CHECK((k.instruction.find("Alpha") != std::string::npos || k.instruction.find("Beta") != std::string::npos));
    texts.insert(k.instruction);
  }
  CHECK(texts.size() == 6);
  try {
    refine(mock, std::span<const PromptCandidate>{}, 3, 0.9, 1);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}

TEST_CASE("top-k selection orders by score then generation") {
  std::vector<PromptCandidate> pool(4);
  pool[0] = {"a", 0.5, 2};
  pool[1] = {"b", 0.9, 1};
  pool[2] = {"c", 0.5, 0};
  pool[3] = {"d", std::nullopt, 0};
  const auto top = select_top_k(pool, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].instruction == "b");
  CHECK(top[1].instruction == "c");
  CHECK(top[2].instruction == "a");
}

TEST_CASE("ape sweep keeps a non-decreasing best score and disjoint sets") {
  const auto d = small_dataset(200);
  PromptSensitiveBackend backend(raw_lines(d, FieldKind::Item), FieldKind::Item);
  ApeConfig cfg;
  cfg.n_candidates = 12;
  cfg.top_k = 3;
  cfg.n_iterations = 4;
  cfg.validation_size = 40;
  cfg.probe_size = 100;
  cfg.seed = 5;
  const auto report = run_ape(backend, d, cfg);
  REQUIRE(report.rows.size() == 6);
  bool improved = false;
  for (const auto& row : report.rows) {
    CHECK(row.completed);
    CHECK(row.best_history.size() == 4);
    for (std::size_t i = 1; i < row.best_history.size(); ++i) {
      CHECK(row.best_history[i] >= row.best_history[i - 1]);
      improved = improved || row.best_history[i] > row.best_history[i - 1];
    }
    CHECK(row.n_probed == 100);
    CHECK(row.coverage == static_cast<double>(row.matched) / 100.0);
  }
  CHECK(improved);
  CHECK(report.validation_size == 40);
  CHECK(report.probe_size == 100);

  const auto again = run_ape(backend, d, cfg);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].best_prompt == again.rows[i].best_prompt);
    CHECK(report.rows[i].coverage == again.rows[i].coverage);
  }
}

TEST_CASE("ape config validation") {
  ApeConfig cfg;
  cfg.top_k = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.temperatures = {};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.temperatures = {-0.1};
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK_NOTHROW(ApeConfig{}.validate());
}

TEST_CASE("baseline comparison") {
  CoverageReport r;
  r.field_kind = FieldKind::Item;
  TemperatureCoverage row;
  row.temperature = 0.7;
  row.coverage = 0.181;
  row.completed = true;
  r.rows.push_back(row);
  const std::vector<CoverageReport> reports = {r};
  const auto cmp = baseline_compare(reports, baseline_llama_1b());
  REQUIRE(cmp.size() == 1);
  CHECK(*cmp[0].baseline == 0.0193);
  CHECK(std::abs(*cmp[0].delta - 0.1617) < 1e-12);

  BaselineValues none{"none", std::nullopt, std::nullopt, std::nullopt};
  const auto missing = baseline_compare(reports, none);
  CHECK(missing[0].missing_baseline);
  CHECK_FALSE(missing[0].delta.has_value());

  BaselineValues same{"same", 0.181, std::nullopt, std::nullopt};
  CHECK(*baseline_compare(reports, same)[0].delta == 0.0);

  CHECK(*baseline_llama_1b().get(FieldKind::User) == 0.1098);
  CHECK(*baseline_llama_1b().get(FieldKind::Rating) == 0.0649);
  CHECK(*baseline_llama_3b().get(FieldKind::Item) == 0.0268);
  CHECK(*baseline_llama_3b().get(FieldKind::User) == 0.1326);
  CHECK(*baseline_llama_3b().get(FieldKind::Rating) == 0.0622);

  const auto base = baseline_llama_1b();
  const auto table = render_coverage_table(reports, &base);
  CHECK(table.find("18.10%") != std::string::npos);
  CHECK(table.find("1.93%") != std::string::npos);
}
