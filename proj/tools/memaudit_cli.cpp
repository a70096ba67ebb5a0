// Command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "memaudit/memaudit.h"

namespace {

struct Owned {
  char* p = nullptr;
  ~Owned() { memaudit_string_free(p); }
};

int report_failure(memaudit_status s) {
  std::fprintf(stderr, "error [%s]: %s\n", memaudit_status_name(s), memaudit_last_error());
  return static_cast<int>(s);
}

int emit(memaudit_status s, Owned& text, Owned& json, bool as_json) {
  if (s != MEMAUDIT_OK) return report_failure(s);
  std::fputs(as_json ? json.p : text.p, stdout);
  if (as_json) std::fputc('\n', stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memorization audit for MovieLens-1M style datasets"};
  app.require_subcommand(1);

  std::string config_path, backend, out, field;
  std::vector<std::string> overrides;
  std::string movies, users, ratings;
  long long seed = -1;
  bool as_json = false;
  app.add_option("--config", config_path, "Config file (key = value lines)");
  app.add_option("--backend", backend, "mock or http")->check(CLI::IsMember({"mock", "http"}));
  app.add_option("--seed", seed, "Global seed")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out, "Output directory for run directories");
  app.add_option("--field", field, "item, user or rating");
  app.add_option("--movies", movies, "Path to movies.dat");
  app.add_option("--users", users, "Path to users.dat");
  app.add_option("--ratings", ratings, "Path to ratings.dat");
  app.add_option("--set", overrides, "Extra config override key=value (repeatable)");
  app.add_flag("--json", as_json, "Print the JSON document instead of the text summary");

  auto* parse = app.add_subcommand("parse", "Parse the dataset files and print record counts");
  auto* gen = app.add_subcommand("gen-statements", "Build labeled contrast statements");
  auto* extract = app.add_subcommand("extract", "Extract activations for the statements");
  auto* probe = app.add_subcommand("probe", "Train and evaluate a CCS probe");
  std::string variant;
  probe->add_option("--variant", variant, "ccs or cluster-norm")->check(CLI::IsMember({"ccs", "cluster-norm"}));
  int k = 0;
  probe->add_option("--k", k, "Cluster count for cluster-norm")->check(CLI::PositiveNumber);
  auto* pca = app.add_subcommand("pca", "Export a 2-D PCA projection of the activations");
  auto* ape = app.add_subcommand("ape", "Run the prompt-engineering sweep");
  auto* jail = app.add_subcommand("jailbreak", "Build the CCA transcript for a key and classify the reply");
  std::string key, reply;
  jail->add_option("--key", key, "Dataset key, e.g. 1::");
  jail->add_option("--reply", reply, "Classify this reply instead of querying the backend");
  auto* report = app.add_subcommand("report", "Merge the artifacts of a run directory");
  std::string run_dir;
  report->add_option("--run-dir", run_dir, "Run directory (default: the one of the current config)");
  auto* synth = app.add_subcommand("synth-dataset", "Write a small synthetic dataset in MovieLens-1M layout");
  std::string synth_dir;
  std::size_t n_movies = 200, n_users = 100, n_ratings = 2000;
  synth->add_option("--dir", synth_dir, "Target directory")->required();
  synth->add_option("--n-movies", n_movies, "Number of movies");
  synth->add_option("--n-users", n_users, "Number of users");
  synth->add_option("--n-ratings", n_ratings, "Number of ratings");

  CLI11_PARSE(app, argc, argv);

  Owned text, json;
  if (synth->parsed()) {
    return emit(memaudit_cmd_synth_dataset(synth_dir.c_str(), n_movies, n_users, n_ratings,
                                           seed < 0 ? 0 : static_cast<uint64_t>(seed), &text.p, &json.p),
                text, json, as_json);
  }

  memaudit_config* cfg = nullptr;
  memaudit_status s = config_path.empty() ? memaudit_config_new(&cfg) : memaudit_config_load(config_path.c_str(), &cfg);
  if (s != MEMAUDIT_OK) return report_failure(s);
  std::unique_ptr<memaudit_config, decltype(&memaudit_config_free)> guard(cfg, memaudit_config_free);

  std::vector<std::pair<std::string, std::string>> sets;
  if (!backend.empty()) sets.emplace_back("backend", backend);
  if (seed >= 0) sets.emplace_back("seed", std::to_string(seed));
  if (!out.empty()) sets.emplace_back("out", out);
  if (!field.empty()) sets.emplace_back("field_kind", field);
  if (!movies.empty()) sets.emplace_back("dataset.movies", movies);
  if (!users.empty()) sets.emplace_back("dataset.users", users);
  if (!ratings.empty()) sets.emplace_back("dataset.ratings", ratings);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", o.c_str());
      return static_cast<int>(MEMAUDIT_ERR_CONFIG);
    }
    sets.emplace_back(o.substr(0, eq), o.substr(eq + 1));
  }
  if (!variant.empty()) sets.emplace_back("probe.variant", variant);
  if (k > 0) sets.emplace_back("probe.k", std::to_string(k));
  if (!key.empty()) sets.emplace_back("jailbreak.key", key);
  if (!reply.empty()) sets.emplace_back("jailbreak.reply", reply);
  for (const auto& [name, value] : sets) {
    s = memaudit_config_set(cfg, name.c_str(), value.c_str());
    if (s != MEMAUDIT_OK) return report_failure(s);
  }

  if (parse->parsed()) return emit(memaudit_cmd_parse(cfg, &text.p, &json.p), text, json, as_json);
  if (gen->parsed()) return emit(memaudit_cmd_gen_statements(cfg, &text.p, &json.p), text, json, as_json);
  if (extract->parsed()) return emit(memaudit_cmd_extract(cfg, &text.p, &json.p), text, json, as_json);
  if (probe->parsed()) return emit(memaudit_cmd_probe(cfg, &text.p, &json.p), text, json, as_json);
  if (pca->parsed()) return emit(memaudit_cmd_pca(cfg, &text.p, &json.p), text, json, as_json);
  if (ape->parsed()) return emit(memaudit_cmd_ape(cfg, &text.p, &json.p), text, json, as_json);
  if (jail->parsed()) return emit(memaudit_cmd_jailbreak(cfg, &text.p, &json.p), text, json, as_json);
  if (report->parsed()) {
    Owned dir;
    if (run_dir.empty()) {
      s = memaudit_config_run_dir(cfg, &dir.p);
      if (s != MEMAUDIT_OK) return report_failure(s);
      run_dir = dir.p;
    }
    return emit(memaudit_cmd_report(run_dir.c_str(), &text.p, &json.p), text, json, as_json);
  }
  return 0;
}
