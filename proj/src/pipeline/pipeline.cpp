#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

#include "ape/ape.hpp"
#include "backend/batch.hpp"
#include "backend/cache.hpp"
#include "backend/http_backend.hpp"
#include "backend/mock_backend.hpp"
#include "dataset/statements.hpp"
#include "jailbreak/cca.hpp"
#include "probes/activation_store.hpp"
#include "probes/normalize.hpp"
#include "probes/pca.hpp"
#include "probes/probe_run.hpp"
#include "util/error.hpp"
#include "util/hash.hpp"
#include "util/rng.hpp"
#include "util/text.hpp"

namespace memaudit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string kind_name(FieldKind kind) { return std::string(to_string(kind)); }

std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json read_json(const fs::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::Schema, "not valid JSON: " + path.string());
  return j;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

fs::path ensure_run_dir(const AuditConfig& config) {
  const fs::path dir = run_directory(config);
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.txt";
  if (!fs::exists(cfg)) write_file(cfg, config_text(config));
  const fs::path run = dir / "run.json";
  if (!fs::exists(run)) {
    write_json(run, {{"config_hash", config_hash(config)}, {"seed", config.seed}, {"backend", config.backend}});
  }
  return dir;
}

Dataset load_for(const AuditConfig& config) {
  validate_config(config);
  return load_dataset(config.paths);
}

std::string dataset_hash(const Dataset& ds, FieldKind kind) {
  std::string all;
  for (const auto& l : raw_lines(ds, kind)) all += l + "\n";
  return sha256_hex(all);
}

fs::path statements_path(const fs::path& dir, FieldKind kind) {
  return dir / ("statements_" + kind_name(kind) + ".jsonl");
}
fs::path activations_base(const fs::path& dir, FieldKind kind) { return dir / ("activations_" + kind_name(kind)); }

std::vector<ContrastPair> ensure_statements(const AuditConfig& config, const Dataset& ds, const fs::path& dir) {
  const fs::path path = statements_path(dir, config.field_kind);
  if (fs::exists(path)) return from_jsonl(read_file(path));
  StatementOptions opts;
  opts.max_records = config.max_records;
  opts.fake_ratio = config.fake_ratio;
  opts.seed = derive_seed(config.seed, "statements");
  opts.template_text = config.template_text;
  opts.fake_title_year = config.fake_title_year;
  auto pairs = build_statement_set(ds, config.field_kind, opts);
  write_file(path, to_jsonl(pairs));
  return pairs;
}

// requests_sent receives the number of backend requests issued (0 on reuse).
std::pair<ActivationPairSet, ActivationStoreMeta> ensure_activations(const AuditConfig& config, const Dataset& ds,
                                                                      const fs::path& dir,
                                                                      std::size_t* requests_sent = nullptr) {
  if (requests_sent) *requests_sent = 0;
  const fs::path base = activations_base(dir, config.field_kind);
  if (fs::exists(fs::path(base.string() + ".bin")) && fs::exists(fs::path(base.string() + ".json"))) {
    return load_activation_set(base);
  }
  const auto pairs = ensure_statements(config, ds, dir);
  if (pairs.empty()) throw Error(ErrorCode::Config, "no statements to extract activations for");
  auto backend = make_backend(config, ds);

  std::vector<ActivationRequest> requests;
  requests.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    requests.push_back({p.positive_text, config.layer, TokenPosition::Last});
    requests.push_back({p.negative_text, config.layer, TokenPosition::Last});
  }
  if (requests_sent) *requests_sent = requests.size();
  const auto results = batch_extract(*backend, requests, std::max<std::size_t>(1, backend->max_in_flight()));
  std::size_t failed = 0;
  const ActivationResult* first = nullptr;
  for (const auto& r : results) {
    if (!r.ok()) {
      ++failed;
      if (!first) first = &r;
    }
  }
  if (first) {
    throw Error(first->error_code.value_or(ErrorCode::Internal),
                std::to_string(failed) + " of " + std::to_string(results.size()) +
                    " activation requests failed; first: " + first->error);
  }
  const std::size_t dim = results[0].value->dim();
  ActivationPairSet set;
  set.pos.resize(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(dim));
  set.neg.resize(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(dim));
  std::vector<bool> labels;
  bool all_labeled = true;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (int side = 0; side < 2; ++side) {
      const auto& v = results[2 * i + static_cast<std::size_t>(side)].value->values;
      if (v.size() != dim) throw Error(ErrorCode::Schema, "activation dimension changed within one extraction");
      Matrix& m = side == 0 ? set.pos : set.neg;
      for (std::size_t c = 0; c < dim; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[c];
    }
    all_labeled = all_labeled && pairs[i].label.has_value();
    labels.push_back(pairs[i].label.value_or(false));
  }
  if (all_labeled) set.labels = std::move(labels);

  ActivationStoreMeta meta;
  meta.layer = config.layer;
  meta.seed = config.seed;
  meta.dataset_hash = dataset_hash(ds, config.field_kind);
  meta.field_kind = kind_name(config.field_kind);
  meta.backend = backend->identity();
  for (const auto& p : pairs) meta.source_ids.push_back(p.source_id);
  save_activation_set(base, set, meta);
  return {std::move(set), std::move(meta)};
}

const char* table_field_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::Item: return "Movies";
    case FieldKind::User: return "Users";
    case FieldKind::Rating: return "Ratings";
  }
  return "";
}

std::string probe_row(const std::string& field, const std::string& variant, const json& m) {
  return pad(field, 10) + pad(variant, 14) + pad(fixed(m.at("balanced_accuracy").get<double>()), 16, true) +
         pad(fixed(m.at("tpr").get<double>()), 10, true) + pad(fixed(m.at("tnr").get<double>()), 10, true) +
         pad(std::to_string(m.at("n_eval").get<std::size_t>()), 8, true) + "\n";
}

std::string probe_header() {
  return pad("Field", 10) + pad("Variant", 14) + pad("Balanced acc.", 16, true) + pad("TPR", 10, true) +
         pad("TNR", 10, true) + pad("n_eval", 8, true) + "\n";
}

BaselineValues baseline_of(const std::string& name) {
  if (name == "1b") return baseline_llama_1b();
  if (name == "3b") return baseline_llama_3b();
  return {"none", std::nullopt, std::nullopt, std::nullopt};
}

std::string safe_name(std::string_view key) {
  std::string out;
  for (char c : key) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

}  // namespace

fs::path run_directory(const AuditConfig& config) { return config.out_dir / config_hash(config); }

std::shared_ptr<Backend> make_backend(const AuditConfig& config, const Dataset& dataset) {
  std::shared_ptr<Backend> inner;
  if (config.backend == "http") {
    inner = std::make_shared<HttpBackend>(HttpConfig::with_env(config.http));
  } else {
    MockSpec spec;
    spec.dim = config.mock_dim;
    spec.truth_direction_seed = derive_seed(config.seed, "mock/truth");
    spec.noise_seed = derive_seed(config.seed, "mock/noise");
    spec.noise_scale = config.mock_noise_scale;
    spec.truth_magnitude = config.mock_truth_magnitude;
    if (config.mock_confound) {
      spec.confound = ConfoundSpec{derive_seed(config.seed, "mock/confound"), config.mock_confound_magnitude,
                                   config.mock_confound_clusters};
    }
    spec.field_kind = config.field_kind;
    spec.records = raw_lines(dataset, config.field_kind);
    std::vector<std::string> ids;
    for (const auto& line : spec.records) ids.push_back(record_id(line, config.field_kind));
    Rng rng(derive_seed(config.seed, "mock/planted"));
    rng.shuffle(ids);
    const auto n_planted = static_cast<std::size_t>(
        std::llround(std::clamp(config.mock_planted_fraction, 0.0, 1.0) * static_cast<double>(ids.size())));
    spec.planted_memorized_ids.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_planted));
    switch (config.field_kind) {
      case FieldKind::Item:
        for (const auto& r : dataset.movies) spec.genuine_entities.insert(entity_of(r).text);
        break;
      case FieldKind::User:
        for (const auto& r : dataset.users) spec.genuine_entities.insert(entity_of(r).text);
        break;
      case FieldKind::Rating:
        for (const auto& r : dataset.ratings) spec.genuine_entities.insert(entity_of(r).text);
        break;
    }
    if (!config.template_text.empty()) spec.statement_templates.push_back(config.template_text);
    inner = std::make_shared<MockBackend>(std::move(spec));
  }
  if (!config.cache) return inner;
  return std::make_shared<CachingBackend>(inner, run_directory(config) / "cache");
}

CommandOutput cmd_parse(const AuditConfig& config) {
  const Dataset ds = load_for(config);
  const DatasetStats s = dataset_stats(ds.movies, ds.users, ds.ratings);
  const fs::path dir = ensure_run_dir(config);
  CommandOutput out;
  out.json = {{"n_users", s.n_users}, {"n_movies", s.n_movies}, {"n_ratings", s.n_ratings}};
  write_json(dir / "stats.json", out.json);
  out.text = pad("File", 14) + pad("Records", 10, true) + "   Format\n";
  out.text += pad("users.dat", 14) + pad(std::to_string(s.n_users), 10, true) +
              "   userID::gender::age::occupation::zip\n";
  out.text += pad("movies.dat", 14) + pad(std::to_string(s.n_movies), 10, true) + "   movieID::title::genres\n";
  out.text += pad("ratings.dat", 14) + pad(std::to_string(s.n_ratings), 10, true) +
              "   userID::movieID::rating::timestamp\n";
  return out;
}

CommandOutput cmd_gen_statements(const AuditConfig& config) {
  const Dataset ds = load_for(config);
  const fs::path dir = ensure_run_dir(config);
  const auto pairs = ensure_statements(config, ds, dir);
  std::size_t n_true = 0, n_false = 0;
  for (const auto& p : pairs) (p.label.value_or(false) ? n_true : n_false)++;
  CommandOutput out;
  const fs::path path = statements_path(dir, config.field_kind);
  out.json = {{"field_kind", kind_name(config.field_kind)},
              {"n_pairs", pairs.size()},
              {"n_true", n_true},
              {"n_false", n_false},
              {"path", path.string()}};
  out.text = std::to_string(pairs.size()) + " contrast pairs (" + std::to_string(n_true) + " genuine, " +
             std::to_string(n_false) + " fake) -> " + path.string() + "\n";
  return out;
}

CommandOutput cmd_extract(const AuditConfig& config) {
  const Dataset ds = load_for(config);
  const fs::path dir = ensure_run_dir(config);
  std::size_t sent = 0;
  const auto [set, meta] = ensure_activations(config, ds, dir, &sent);
  const fs::path base = activations_base(dir, config.field_kind);
  CommandOutput out;
  out.json = {{"field_kind", meta.field_kind}, {"n_pairs", set.size()},   {"dim", set.dim()},
              {"layer", meta.layer},           {"backend", meta.backend}, {"path", base.string() + ".bin"},
              {"backend_requests", sent}};
  out.text = std::to_string(set.size()) + " activation pairs, dim " + std::to_string(set.dim()) + ", layer " +
             std::to_string(meta.layer) + " -> " + base.string() + ".bin\n";
  return out;
}

CommandOutput cmd_probe(const AuditConfig& config) {
  const Dataset ds = load_for(config);
  const fs::path dir = ensure_run_dir(config);
  const auto [set, meta] = ensure_activations(config, ds, dir);

  ProbeRunOptions opts;
  opts.variant = config.probe_variant;
  opts.k = config.probe_k;
  opts.split = {config.train_fraction, derive_seed(config.seed, "split")};
  opts.ccs = {config.n_restarts, config.epochs, config.learning_rate, derive_seed(config.seed, "ccs")};
  const ProbeRunResult r = run_probe(set, opts);

  const std::string variant(to_string(config.probe_variant));
  json weights = json::array();
  for (Eigen::Index i = 0; i < r.probe.weights.size(); ++i) weights.push_back(r.probe.weights[i]);
  CommandOutput out;
  out.json = {{"field_kind", meta.field_kind},
              {"variant", variant},
              {"balanced_accuracy", r.metrics.balanced_accuracy},
              {"tpr", r.metrics.tpr},
              {"tnr", r.metrics.tnr},
              {"n_eval", r.metrics.n_eval},
              {"n_train", r.n_train},
              {"k", config.probe_variant == ProbeVariant::ClusterNorm ? json(config.probe_k) : json(nullptr)},
              {"training_loss", r.probe.training_loss},
              {"orientation", r.probe.orientation},
              {"bias", r.probe.bias},
              {"weights", weights},
              {"warnings", r.warnings},
              {"backend", meta.backend},
              {"activations", activations_base(dir, config.field_kind).filename().string()}};
  write_json(dir / ("probe_" + meta.field_kind + "_" + variant + ".json"), out.json);
  out.text = probe_header() + probe_row(table_field_name(config.field_kind), variant == "ccs" ? "CCS" : "Cluster-Norm",
                                        out.json);
  return out;
}

CommandOutput cmd_pca(const AuditConfig& config) {
  const Dataset ds = load_for(config);
  const fs::path dir = ensure_run_dir(config);
  auto [set, meta] = ensure_activations(config, ds, dir);
  set.cluster_ids.reset();
  const auto normalized = normalize(set).first;
  const PcaProjection proj = pca_project(normalized.concatenated(), 2);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < set.size(); ++i) {
    labels.push_back(set.labels ? ((*set.labels)[i] ? "true" : "false") : "");
  }
  const fs::path csv = dir / ("pca_" + meta.field_kind + ".csv");
  write_file(csv, pca_csv(proj, labels, meta.field_kind));
  CommandOutput out;
  out.json = {{"field_kind", meta.field_kind},
              {"explained_variance_ratio", proj.explained_variance_ratio},
              {"n_points", set.size()},
              {"warnings", proj.warnings},
              {"csv", csv.filename().string()}};
  write_json(dir / ("pca_" + meta.field_kind + ".json"), out.json);
  out.text = "PCA of " + std::to_string(set.size()) + " pairs: explained variance " +
             fixed(proj.explained_variance_ratio[0]) + ", " + fixed(proj.explained_variance_ratio[1]) + " -> " +
             csv.string() + "\n";
  return out;
}

CommandOutput cmd_ape(const AuditConfig& config) {
  const Dataset ds = load_for(config);
  const fs::path dir = ensure_run_dir(config);
  auto backend = make_backend(config, ds);
  ApeConfig ape = config.ape;
  ape.field_kind = config.field_kind;
  ape.seed = derive_seed(config.seed, "ape");
  const CoverageReport report = run_ape(*backend, ds, ape);

  const std::string kind = kind_name(config.field_kind);
  write_file(dir / ("ape_" + kind + "_state.jsonl"), state_to_jsonl(report.state));
  const BaselineValues baseline = baseline_of(config.ape_baseline);
  const std::span<const CoverageReport> reports(&report, 1);
  json comparison = json::array();
  for (const auto& c : baseline_compare(reports, baseline)) {
    comparison.push_back({{"temperature", c.temperature},
                          {"field_kind", kind_name(c.field_kind)},
                          {"coverage", c.coverage},
                          {"baseline", c.baseline ? json(*c.baseline) : json(nullptr)},
                          {"delta", c.delta ? json(*c.delta) : json(nullptr)},
                          {"missing_baseline", c.missing_baseline}});
  }
  CommandOutput out;
  out.json = to_json(report);
  out.json["baseline"] = baseline.name;
  out.json["comparison"] = comparison;
  out.json["backend"] = backend->identity();
  out.json["state"] = "ape_" + kind + "_state.jsonl";
  write_json(dir / ("ape_" + kind + ".json"), out.json);
  out.text = render_coverage_table(reports, config.ape_baseline == "none" ? nullptr : &baseline);
  write_file(dir / ("ape_" + kind + ".txt"), out.text);
  return out;
}

CommandOutput cmd_jailbreak(const AuditConfig& config) {
  const Dataset ds = load_for(config);
  const fs::path dir = ensure_run_dir(config);
  const FieldKind kind = config.field_kind;
  const auto exemplars = default_cca_exemplars();
  const CcaTranscript transcript = build_cca_transcript(config.jailbreak_key, exemplars);

  std::string reply = config.jailbreak_reply;
  std::string backend_identity;
  if (reply.empty()) {
    auto backend = make_backend(config, ds);
    GenerationRequest req;
    req.transcript = transcript.turns;
    req.temperature = 0.0;
    req.stop_sequences = {"\n"};
    reply = backend->generate(req).text;
    backend_identity = backend->identity();
  }

  std::optional<std::string> gold;
  for (const auto& line : raw_lines(ds, kind)) {
    if (line.starts_with(config.jailbreak_key)) {
      gold = line;
      break;
    }
  }

  const fs::path seen_path = dir / ("jailbreak_seen_" + kind_name(kind) + ".txt");
  std::set<std::string> seen;
  if (fs::exists(seen_path)) {
    for (auto l : split(read_file(seen_path), "\n")) {
      if (!l.empty()) seen.insert(std::string(l));
    }
  }
  ReplyVerdict verdict;
  if (gold) {
    verdict = classify_reply(reply, *gold, kind, seen);
  } else {
    const std::string r = normalize_reply(reply);
    if (seen.contains(r)) {
      verdict.verdict = Verdict::Duplicate;
    } else if (r == kUnknownToken) {
      verdict.verdict = Verdict::UnknownToken;
    } else if (is_well_formed(r, kind) || is_well_formed(config.jailbreak_key + r, kind)) {
      verdict.verdict = Verdict::Hallucination;
    } else {
      verdict.verdict = Verdict::Malformed;
    }
  }
  if (!seen.contains(normalize_reply(reply))) {
    std::string all = fs::exists(seen_path) ? read_file(seen_path) : std::string();
    write_file(seen_path, all + normalize_reply(reply) + "\n");
  }

  CommandOutput out;
  out.json = {{"field_kind", kind_name(kind)},
              {"key", config.jailbreak_key},
              {"messages", to_messages(transcript)},
              {"reply", reply},
              {"verdict", to_string(verdict.verdict)},
              {"matched_record", verdict.matched_record ? json(*verdict.matched_record) : json(nullptr)},
              {"backend", backend_identity.empty() ? json(nullptr) : json(backend_identity)}};
  write_json(dir / ("jailbreak_" + kind_name(kind) + "_" + safe_name(config.jailbreak_key) + ".json"), out.json);
  for (const auto& t : transcript.turns) out.text += "[" + std::string(to_string(t.role)) + "] " + t.content + "\n";
  out.text += "reply: " + reply + "\nverdict: " + std::string(to_string(verdict.verdict)) + "\n";
  return out;
}

CommandOutput cmd_report(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw Error(ErrorCode::NoArtifacts, "no artifacts: " + run_dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(run_dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  auto starts = [](const fs::path& p, std::string_view prefix) { return p.filename().string().starts_with(prefix); };
  auto is_json = [](const fs::path& p) { return p.extension() == ".json"; };

  json doc;
  json artifacts = json::array();
  json probes = json::object(), ape = json::object(), pca = json::object(), jail = json::array();
  std::set<std::string> backends;
  bool any = false;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    if (name == "stats.json") {
      doc["dataset_stats"] = read_json(f);
    } else if (starts(f, "probe_") && is_json(f)) {
      json p = read_json(f);
      p.erase("weights");
      p["artifact"] = name;
      backends.insert(p.value("backend", ""));
      probes[p.at("field_kind").get<std::string>()][p.at("variant").get<std::string>()] = p;
    } else if (starts(f, "ape_") && is_json(f)) {
      json a = read_json(f);
      a["artifact"] = name;
      backends.insert(a.value("backend", ""));
      ape[a.at("field_kind").get<std::string>()] = a;
    } else if (starts(f, "pca_") && is_json(f)) {
      json p = read_json(f);
      p["artifact"] = name;
      pca[p.at("field_kind").get<std::string>()] = p;
    } else if (starts(f, "jailbreak_") && is_json(f)) {
      json j = read_json(f);
      jail.push_back({{"key", j.at("key")}, {"field_kind", j.at("field_kind")}, {"verdict", j.at("verdict")},
                      {"artifact", name}});
    } else {
      continue;
    }
    artifacts.push_back(name);
    any = true;
  }
  if (!any) throw Error(ErrorCode::NoArtifacts, "no artifacts in " + run_dir.string());

  json run = fs::exists(run_dir / "run.json") ? read_json(run_dir / "run.json") : json::object();
  backends.erase("");
  run["backend_identities"] = backends;
  const bool mock = run.value("backend", "mock") == "mock";
  if (!mock) run["generated_at"] = now_utc();
  doc["run"] = run;
  doc["artifacts"] = artifacts;
  doc["probes"] = probes;
  doc["ape"] = ape;
  doc["pca"] = pca;
  doc["jailbreak"] = jail;

  std::string text = "Audit report";
  if (run.contains("config_hash")) text += " (config " + run["config_hash"].get<std::string>() + ")";
  text += "\n\n";
  if (doc.contains("dataset_stats")) {
    const auto& s = doc["dataset_stats"];
    text += "Dataset\n";
    text += pad("  users", 12) + pad(std::to_string(s.at("n_users").get<std::size_t>()), 10, true) + "\n";
    text += pad("  movies", 12) + pad(std::to_string(s.at("n_movies").get<std::size_t>()), 10, true) + "\n";
    text += pad("  ratings", 12) + pad(std::to_string(s.at("n_ratings").get<std::size_t>()), 10, true) + "\n\n";
  }
  if (!probes.empty()) {
    text += "Probes (balanced accuracy)\n" + probe_header();
    for (FieldKind k : {FieldKind::Item, FieldKind::User, FieldKind::Rating}) {
      const std::string kn = kind_name(k);
      if (!probes.contains(kn)) continue;
      for (const char* v : {"ccs", "cluster-norm"}) {
        if (probes[kn].contains(v)) {
          text += probe_row(table_field_name(k), std::string(v) == "ccs" ? "CCS" : "Cluster-Norm", probes[kn][v]);
        }
      }
    }
    text += "\n";
  }
  if (!ape.empty()) {
    std::vector<CoverageReport> reports;
    for (const auto& [kn, a] : ape.items()) {
      CoverageReport r;
      r.field_kind = parse_field_kind(kn);
      for (const auto& row : a.at("rows")) {
        TemperatureCoverage t;
        t.temperature = row.at("temperature").get<double>();
        t.field_kind = r.field_kind;
        t.coverage = row.at("coverage").get<double>();
        t.completed = row.at("completed").get<bool>();
        r.rows.push_back(t);
      }
      reports.push_back(std::move(r));
    }
    text += "APE exact-match coverage\n" + render_coverage_table(reports) + "\n";
  }
  if (!pca.empty()) {
    text += "PCA exports\n";
    for (const auto& [kn, p] : pca.items()) {
      const auto& ev = p.at("explained_variance_ratio");
      text += "  " + pad(kn, 8) + " " + p.at("csv").get<std::string>() + "  explained " +
              fixed(ev.at(0).get<double>()) + ", " + fixed(ev.at(1).get<double>()) + "\n";
    }
    text += "\n";
  }
  if (!jail.empty()) {
    text += "Jailbreak replies\n";
    for (const auto& j : jail) {
      text += "  " + pad(j.at("field_kind").get<std::string>(), 8) + " " + pad(j.at("key").get<std::string>(), 24) +
              " " + j.at("verdict").get<std::string>() + "\n";
    }
    text += "\n";
  }

  write_json(run_dir / "report.json", doc);
  write_file(run_dir / "report.txt", text);
  return {text, doc};
}

CommandOutput cmd_synth_dataset(const fs::path& dir, const SynthSpec& spec) {
  if (spec.n_movies < 2 || spec.n_users < 1) {
    throw Error(ErrorCode::InvalidArgument, "synthetic dataset needs at least 2 movies and 1 user");
  }
  if (spec.n_ratings > spec.n_movies * spec.n_users) {
    throw Error(ErrorCode::InvalidArgument, "more ratings requested than (user, movie) pairs exist");
  }
  static const char* kFirst[] = {"Silent", "Crimson", "Broken", "Golden", "Midnight", "Lost",   "Wild",
                                 "Hidden", "Frozen",  "Last",   "Little", "Distant",  "Electric", "Quiet"};
  static const char* kSecond[] = {"Harbor", "Garden",  "Express", "Empire", "Horizon", "Mirror", "River",
                                  "Kingdom", "Letters", "Station", "Summer", "Voyage",  "Canyon", "Shadows"};
  static const char* kGenres[] = {"Action",  "Adventure", "Animation", "Children's", "Comedy",  "Crime",
                                  "Documentary", "Drama", "Fantasy",   "Film-Noir",  "Horror",  "Musical",
                                  "Mystery", "Romance",   "Sci-Fi",    "Thriller",   "War",     "Western"};
  static const int kAges[] = {1, 18, 25, 35, 45, 50, 56};

  Rng rng(derive_seed(spec.seed, "synth"));
  std::vector<MovieRecord> movies = {{1, "Toy Story (1995)", {"Animation", "Children's", "Comedy"}},
                                     {2, "Jumanji (1995)", {"Adventure", "Children's", "Fantasy"}}};
  std::set<std::string> titles = {"Toy Story", "Jumanji"};
  while (movies.size() < spec.n_movies) {
    std::string title = std::string(rng.below(3) == 0 ? "The " : "") + kFirst[rng.below(std::size(kFirst))] + " " +
                        kSecond[rng.below(std::size(kSecond))];
    if (titles.contains(title)) title += " " + std::to_string(2 + rng.below(8));
    if (!titles.insert(title).second) continue;
    MovieRecord m;
    m.movie_id = static_cast<std::int64_t>(movies.size() + 1);
    m.title = title + " (" + std::to_string(rng.between(1919, 2000)) + ")";
    std::set<std::size_t> g;
    const auto n_genres = 1 + rng.below(3);
    while (g.size() < n_genres) g.insert(rng.below(std::size(kGenres)));
    for (auto i : g) m.genres.push_back(kGenres[i]);
    movies.push_back(std::move(m));
  }
  std::vector<UserRecord> users;
  for (std::size_t i = 0; i < spec.n_users; ++i) {
    UserRecord u;
    u.user_id = static_cast<std::int64_t>(i + 1);
    u.gender = rng.below(2) ? 'M' : 'F';
    u.age = kAges[rng.below(std::size(kAges))];
    u.occupation = static_cast<int>(rng.below(21));
    u.zip = std::to_string(rng.between(10000, 99999));
    users.push_back(std::move(u));
  }
  std::vector<RatingRecord> ratings;
  std::set<std::pair<std::int64_t, std::int64_t>> pairs;
  while (ratings.size() < spec.n_ratings) {
    const auto u = static_cast<std::int64_t>(1 + rng.below(spec.n_users));
    const auto m = static_cast<std::int64_t>(1 + rng.below(spec.n_movies));
    if (!pairs.insert({u, m}).second) continue;
    ratings.push_back({u, m, static_cast<int>(rng.between(1, 5)), rng.between(956703932, 1046454590)});
  }
  std::sort(ratings.begin(), ratings.end(), [](const RatingRecord& a, const RatingRecord& b) {
    return std::tie(a.user_id, a.timestamp, a.movie_id) < std::tie(b.user_id, b.timestamp, b.movie_id);
  });

  std::string m_text, u_text, r_text;
  for (const auto& m : movies) m_text += serialize(m) + "\n";
  for (const auto& u : users) u_text += serialize(u) + "\n";
  for (const auto& r : ratings) r_text += serialize(r) + "\n";
  write_file(dir / "movies.dat", m_text);
  write_file(dir / "users.dat", u_text);
  write_file(dir / "ratings.dat", r_text);

  CommandOutput out;
  out.json = {{"dir", dir.string()},
              {"n_movies", movies.size()},
              {"n_users", users.size()},
              {"n_ratings", ratings.size()}};
  out.text = "wrote " + std::to_string(movies.size()) + " movies, " + std::to_string(users.size()) + " users, " +
             std::to_string(ratings.size()) + " ratings to " + dir.string() + "\n";
  return out;
}

}  // namespace memaudit
