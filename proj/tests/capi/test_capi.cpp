#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "memaudit/memaudit.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* p) {
  std::string s = p ? p : "";
  memaudit_string_free(p);
  return s;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::strlen(memaudit_version()) > 0);
  CHECK(std::string(memaudit_status_name(MEMAUDIT_OK)) == "ok");
  CHECK(std::string(memaudit_status_name(MEMAUDIT_ERR_NO_ARTIFACTS)).size() > 0);
}

TEST_CASE("config handle round trip and error reporting") {
  memaudit_config* cfg = nullptr;
  REQUIRE(memaudit_config_new(&cfg) == MEMAUDIT_OK);
  CHECK(memaudit_config_set(cfg, "seed", "12") == MEMAUDIT_OK);
  char* v = nullptr;
  REQUIRE(memaudit_config_get(cfg, "seed", &v) == MEMAUDIT_OK);
  CHECK(take(v) == "12");
  CHECK(memaudit_config_set(cfg, "bogus.key", "1") == MEMAUDIT_ERR_CONFIG);
  CHECK(std::string(memaudit_last_error()).find("bogus.key") != std::string::npos);
  char* h = nullptr;
  REQUIRE(memaudit_config_hash(cfg, &h) == MEMAUDIT_OK);
  CHECK(take(h).size() == 16);
  CHECK(memaudit_config_set(nullptr, "seed", "1") == MEMAUDIT_ERR_INVALID_ARGUMENT);
  memaudit_config_free(cfg);
  memaudit_config_free(nullptr);
}

TEST_CASE("ccs loss and exact match through the C boundary") {
  CHECK(memaudit_ccs_loss(1.0, 0.0) == 0.0);
  CHECK(memaudit_ccs_loss(0.5, 0.5) == 0.25);
  CHECK(memaudit_ccs_loss(1.0, 1.0) == 2.0);
  CHECK(memaudit_exact_match("Toy  Story", "Toy Story") == 1);
  CHECK(memaudit_exact_match("Toy Story", "Jumanji") == 0);
}

TEST_CASE("pairset, training and evaluation") {
  const std::size_t n = 100, dim = 3;
  std::vector<double> pos(n * dim), neg(n * dim);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i % 2 ? 1.0 : -1.0;
    labels[i] = i % 2 ? 1 : 0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double jitter = 0.1 * std::sin(static_cast<double>(7 * i + 3 * j));
      pos[i * dim + j] = (j == 0 ? t : 0.0) + jitter;
      neg[i * dim + j] = (j == 0 ? -t : 0.0) - jitter;
    }
  }
  memaudit_pairset* set = nullptr;
  REQUIRE(memaudit_pairset_new(pos.data(), neg.data(), n, dim, labels.data(), &set) == MEMAUDIT_OK);
  memaudit_probe* probe = nullptr;
  REQUIRE(memaudit_probe_train(set, 2, 300, 0.05, 1, &probe) == MEMAUDIT_OK);
  double ba = 0, tpr = 0, tnr = 0;
  REQUIRE(memaudit_probe_evaluate(probe, set, &ba, &tpr, &tnr) == MEMAUDIT_OK);
  CHECK(ba >= 0.95);
  double s1 = 0, s2 = 0;
  REQUIRE(memaudit_probe_score(probe, pos.data(), neg.data(), dim, &s1) == MEMAUDIT_OK);
  REQUIRE(memaudit_probe_score(probe, neg.data(), pos.data(), dim, &s2) == MEMAUDIT_OK);
  CHECK(std::abs(s1 + s2 - 1.0) <= 1e-12);
  double run_ba = 0;
  CHECK(memaudit_probe_run(set, "ccs", 0, 0.8, 3, &run_ba) == MEMAUDIT_OK);
  CHECK(run_ba >= 0.95);
  CHECK(memaudit_probe_run(set, "magic", 0, 0.8, 3, &run_ba) == MEMAUDIT_ERR_CONFIG);
  std::vector<int> bad(n, 0);
  bad[0] = 7;
  CHECK(memaudit_pairset_new(pos.data(), neg.data(), n, dim, bad.data(), &set) != MEMAUDIT_OK);
  memaudit_probe_free(probe);
  memaudit_pairset_free(set);
}

TEST_CASE("kmeans and pca through the C boundary") {
  std::vector<double> pts;
  for (int i = 0; i < 20; ++i) {
    pts.push_back(i < 10 ? -5.0 + 0.01 * i : 5.0 + 0.01 * i);
    pts.push_back(0.02 * i);
  }
  std::vector<int> assign(20);
  double inertia = 0;
  REQUIRE(memaudit_kmeans(pts.data(), 20, 2, 2, 1, assign.data(), &inertia) == MEMAUDIT_OK);
  for (int i = 1; i < 10; ++i) CHECK(assign[i] == assign[0]);
  for (int i = 11; i < 20; ++i) CHECK(assign[i] == assign[10]);
  CHECK(assign[0] != assign[10]);
  std::vector<double> comps(4), ratios(2);
  REQUIRE(memaudit_pca(pts.data(), 20, 2, 2, comps.data(), nullptr, ratios.data()) == MEMAUDIT_OK);
  CHECK(std::abs(comps[0] * comps[0] + comps[1] * comps[1] - 1.0) < 1e-9);
  CHECK(std::abs(comps[0] * comps[2] + comps[1] * comps[3]) < 1e-9);
  CHECK(ratios[0] > 0.99);
  CHECK(memaudit_kmeans(pts.data(), 20, 2, 0, 1, assign.data(), &inertia) != MEMAUDIT_OK);
}

TEST_CASE("cca transcript and reply classification") {
  char* msgs = nullptr;
  REQUIRE(memaudit_cca_transcript("1::", &msgs) == MEMAUDIT_OK);
  const std::string m = take(msgs);
  CHECK(m.find("\"Input: 1::\"") != std::string::npos);
  memaudit_verdict v;
  const char* seen[] = {"2::Foo (1990)::Drama"};
  REQUIRE(memaudit_classify_reply("2::Foo (1990)::Drama", "2::Jumanji (1995)::Adventure", MEMAUDIT_FIELD_ITEM, seen,
                                  1, &v) == MEMAUDIT_OK);
  CHECK(v == MEMAUDIT_VERDICT_DUPLICATE);
  REQUIRE(memaudit_classify_reply("Unknown", "2::Jumanji (1995)::Adventure", MEMAUDIT_FIELD_ITEM, nullptr, 0, &v) ==
          MEMAUDIT_OK);
  CHECK(v == MEMAUDIT_VERDICT_UNKNOWN_TOKEN);
  CHECK(memaudit_cca_transcript("", &msgs) == MEMAUDIT_ERR_INVALID_ARGUMENT);
}

TEST_CASE("end to end through commands, dataset and mock backend handles") {
  const fs::path root = fs::temp_directory_path() / "memaudit_capi_e2e";
  fs::remove_all(root);
  char* text = nullptr;
  char* json = nullptr;
  REQUIRE(memaudit_cmd_synth_dataset((root / "data").c_str(), 60, 20, 200, 1, &text, &json) == MEMAUDIT_OK);
  take(text);
  take(json);

  memaudit_dataset* ds = nullptr;
  REQUIRE(memaudit_dataset_load((root / "data/movies.dat").c_str(), (root / "data/users.dat").c_str(),
                                (root / "data/ratings.dat").c_str(), &ds) == MEMAUDIT_OK);
  size_t nu = 0, nm = 0, nr = 0;
  REQUIRE(memaudit_dataset_stats(ds, &nu, &nm, &nr) == MEMAUDIT_OK);
  CHECK(nu == 20);
  CHECK(nm == 60);
  CHECK(nr == 200);
  memaudit_backend* be = nullptr;
  REQUIRE(memaudit_mock_backend_new(ds, MEMAUDIT_FIELD_ITEM, 16, 0.1, 1.0, 2, &be) == MEMAUDIT_OK);
  char* gen = nullptr;
  REQUIRE(memaudit_backend_generate(be, "1::", 0.0, 64, &gen) == MEMAUDIT_OK);
  CHECK(take(gen).rfind("Toy Story (1995)::", 0) == 0);
  std::vector<double> act(4);
  size_t dim = 0;
  REQUIRE(memaudit_backend_extract(be, "The movie Toy Story is in MovieLens-1M", -2, act.data(), act.size(), &dim) ==
          MEMAUDIT_OK);
  CHECK(dim == 16);
  CHECK(memaudit_backend_extract(be, "x", 100, act.data(), act.size(), &dim) == MEMAUDIT_ERR_CONFIG);
  memaudit_backend_free(be);
  memaudit_dataset_free(ds);

  memaudit_config* cfg = nullptr;
  REQUIRE(memaudit_config_new(&cfg) == MEMAUDIT_OK);
  memaudit_config_set(cfg, "dataset.movies", (root / "data/movies.dat").c_str());
  memaudit_config_set(cfg, "dataset.users", (root / "data/users.dat").c_str());
  memaudit_config_set(cfg, "dataset.ratings", (root / "data/ratings.dat").c_str());
  memaudit_config_set(cfg, "out", (root / "runs").c_str());
  memaudit_config_set(cfg, "probe.epochs", "200");
  REQUIRE(memaudit_cmd_probe(cfg, &text, &json) == MEMAUDIT_OK);
  CHECK(take(text).find("CCS") != std::string::npos);
  CHECK(take(json).find("balanced_accuracy") != std::string::npos);
  char* dir = nullptr;
  REQUIRE(memaudit_config_run_dir(cfg, &dir) == MEMAUDIT_OK);
  const std::string run_dir = take(dir);
  REQUIRE(memaudit_cmd_report(run_dir.c_str(), nullptr, &json) == MEMAUDIT_OK);
  CHECK(take(json).find("probes") != std::string::npos);
  CHECK(memaudit_cmd_report((root / "nothing").c_str(), &text, &json) == MEMAUDIT_ERR_NO_ARTIFACTS);
  memaudit_config_free(cfg);
  fs::remove_all(root);
}
