#include <filesystem>

#include "doctest.h"
#include "pipeline/config.hpp"
#include "pipeline/pipeline.hpp"
#include "util/error.hpp"
#include "util/text.hpp"

using namespace memaudit;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("memaudit_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

AuditConfig synth_config(const fs::path& root) {
  cmd_synth_dataset(root / "data", SynthSpec{120, 40, 400, 3});
  AuditConfig cfg;
  cfg.paths = {root / "data" / "movies.dat", root / "data" / "users.dat", root / "data" / "ratings.dat"};
  cfg.out_dir = root / "runs";
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST_CASE("config text parsing, overrides and errors") {
  const auto cfg = parse_config(
      "# comment\n"
      "seed = 17\n"
      "backend = mock\n"
      "probe.variant = cluster-norm\n"
      "probe.k = 2\n"
      "ape.temperatures = 0.1, 0.9\n");
  CHECK(cfg.seed == 17);
  CHECK(cfg.probe_variant == ProbeVariant::ClusterNorm);
  CHECK(cfg.probe_k == 2);
  CHECK(cfg.ape.temperatures == std::vector<double>{0.1, 0.9});
  CHECK_THROWS_AS(parse_config("nonsense.key = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("seed = abc\n"), Error);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), Error);
  try {
    parse_config("seed = 1\n\nprobe.k = x\n");
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("config hash tracks result-affecting keys only") {
  AuditConfig a;
  AuditConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.out_dir = "elsewhere";
  b.http.auth_token = "tok";
  CHECK(config_hash(a) == config_hash(b));
  b.seed = a.seed + 1;
  CHECK(config_hash(a) != config_hash(b));
  AuditConfig c = a;
  c.epochs = 10;
  CHECK(config_hash(a) != config_hash(c));
  c = a;
  set_config_value(c, "http.auth_token", "secret-value");
  CHECK(config_text(c).find("secret-value") == std::string::npos);
}

TEST_CASE("report on a missing or empty directory is a no-artifacts error") {
  const auto dir = fresh_dir("empty");
  for (const auto& p : {dir, dir / "absent"}) {
    try {
      cmd_report(p);
      FAIL("expected no-artifacts");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoArtifacts);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("synthetic dataset parses with the requested sizes") {
  const auto root = fresh_dir("synth");
  auto cfg = synth_config(root);
  const auto out = cmd_parse(cfg);
  CHECK(out.json["n_movies"] == 120);
  CHECK(out.json["n_users"] == 40);
  CHECK(out.json["n_ratings"] == 400);
  CHECK(read_file(cfg.paths.movies).rfind("1::Toy Story (1995)::", 0) == 0);
  fs::remove_all(root);
}

TEST_CASE("probe pipeline on the mock separates members from fakes, and reruns reuse activations") {
  const auto root = fresh_dir("probe");
  auto cfg = synth_config(root);
  const auto first = cmd_extract(cfg);
  CHECK(first.json["backend_requests"] == 2 * first.json["n_pairs"].get<std::size_t>());
  const auto probe = cmd_probe(cfg);
  CHECK(probe.json["balanced_accuracy"].get<double>() >= 0.95);
  const auto second = cmd_extract(cfg);
  CHECK(second.json["backend_requests"] == 0);
  CHECK(fs::exists(run_directory(cfg) / "config.txt"));
  CHECK(fs::exists(run_directory(cfg) / "probe_item_ccs.json"));
  fs::remove_all(root);
}

TEST_CASE("identical configs give byte-identical reports") {
  const auto root = fresh_dir("determinism");
  auto cfg = synth_config(root);
  cfg.epochs = 200;
  cfg.n_restarts = 2;
  cfg.ape.n_candidates = 6;
  cfg.ape.top_k = 2;
  cfg.ape.n_iterations = 2;
  cfg.ape.temperatures = {0.5};
  cfg.ape.validation_size = 20;
  cfg.ape.probe_size = 30;
  cmd_probe(cfg);
  cmd_pca(cfg);
  cmd_ape(cfg);
  cmd_jailbreak(cfg);
  cmd_report(run_directory(cfg));
  const std::string first = read_file(run_directory(cfg) / "report.json");

  auto other = cfg;
  other.out_dir = root / "runs2";
  CHECK(config_hash(other) == config_hash(cfg));
  cmd_probe(other);
  cmd_pca(other);
  cmd_ape(other);
  cmd_jailbreak(other);
  cmd_report(run_directory(other));
  CHECK(read_file(run_directory(other) / "report.json") == first);
  CHECK(first.find("generated_at") == std::string::npos);
  fs::remove_all(root);
}

TEST_CASE("jailbreak command classifies a supplied reply") {
  const auto root = fresh_dir("jailbreak");
  auto cfg = synth_config(root);
  cfg.jailbreak_key = "1::";
  const std::string movies = read_file(cfg.paths.movies);
  cfg.jailbreak_reply = movies.substr(0, movies.find('\n'));
  const auto out = cmd_jailbreak(cfg);
  CHECK(out.json["verdict"] == "valid");
  cfg.jailbreak_reply = "Unknown";
  CHECK(cmd_jailbreak(cfg).json["verdict"] == "unknown-token");
  fs::remove_all(root);
}
