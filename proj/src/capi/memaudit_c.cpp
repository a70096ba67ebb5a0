#include "memaudit/memaudit.h"

#include <cstring>
#include <memory>
#include <set>
#include <string>

#include "ape/ape.hpp"
#include "backend/http_backend.hpp"
#include "backend/mock_backend.hpp"
#include "jailbreak/cca.hpp"
#include "pipeline/config.hpp"
#include "pipeline/pipeline.hpp"
#include "probes/ccs.hpp"
#include "probes/kmeans.hpp"
#include "probes/pca.hpp"
#include "probes/probe_run.hpp"
#include "util/error.hpp"
#include "util/rng.hpp"

struct memaudit_config {
  memaudit::AuditConfig value;
};
struct memaudit_dataset {
  memaudit::Dataset value;
};
struct memaudit_backend {
  std::shared_ptr<memaudit::Backend> value;
};
struct memaudit_pairset {
  memaudit::ActivationPairSet value;
};
struct memaudit_probe {
  memaudit::ProbeParams value;
};

namespace {

using namespace memaudit;

thread_local std::string g_last_error;

memaudit_status fail(memaudit_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
memaudit_status guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return MEMAUDIT_OK;
  } catch (const Error& e) {
    return fail(static_cast<memaudit_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MEMAUDIT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MEMAUDIT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MEMAUDIT_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

FieldKind kind_of(memaudit_field_kind k) {
  switch (k) {
    case MEMAUDIT_FIELD_ITEM: return FieldKind::Item;
    case MEMAUDIT_FIELD_USER: return FieldKind::User;
    case MEMAUDIT_FIELD_RATING: return FieldKind::Rating;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown field kind");
}

Matrix rows_to_matrix(const double* data, std::size_t n, std::size_t dim) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i * dim + j];
  }
  return m;
}

void emit(const CommandOutput& out, char** text, char** json) {
  char* t = text ? dup(out.text) : nullptr;
  char* j = nullptr;
  try {
    if (json) j = dup(out.json.dump(2));
  } catch (...) {
    std::free(t);
    throw;
  }
  if (text) *text = t;
  if (json) *json = j;
}

template <typename Cmd>
memaudit_status run_command(const memaudit_config* config, char** text, char** json, Cmd cmd) {
  return guard([&] {
    require(config != nullptr, "config is NULL");
    emit(cmd(config->value), text, json);
  });
}

}  // namespace

extern "C" {

const char* memaudit_version(void) { return "0.1.0"; }

const char* memaudit_last_error(void) { return g_last_error.c_str(); }

const char* memaudit_status_name(memaudit_status status) {
  if (status == MEMAUDIT_OK) return "ok";
  return error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
}

void memaudit_string_free(char* s) { std::free(s); }

memaudit_status memaudit_config_new(memaudit_config** out) {
  return guard([&] {
    require(out != nullptr, "out is NULL");
    *out = new memaudit_config{};
  });
}

memaudit_status memaudit_config_load(const char* path, memaudit_config** out) {
  return guard([&] {
    require(path && out, "path and out must be non-NULL");
    auto cfg = std::make_unique<memaudit_config>();
    cfg->value = load_config(path);
    *out = cfg.release();
  });
}

memaudit_status memaudit_config_set(memaudit_config* config, const char* key, const char* value) {
  return guard([&] {
    require(config && key && value, "config, key and value must be non-NULL");
    set_config_value(config->value, key, value);
  });
}

memaudit_status memaudit_config_get(const memaudit_config* config, const char* key, char** value) {
  return guard([&] {
    require(config && key && value, "config, key and value must be non-NULL");
    const auto entries = config_entries(config->value);
    auto it = entries.find(key);
    if (it == entries.end()) throw Error(ErrorCode::Config, std::string("unknown config key '") + key + "'");
    *value = dup(it->second);
  });
}

memaudit_status memaudit_config_hash(const memaudit_config* config, char** hash) {
  return guard([&] {
    require(config && hash, "config and hash must be non-NULL");
    *hash = dup(config_hash(config->value));
  });
}

memaudit_status memaudit_config_run_dir(const memaudit_config* config, char** path) {
  return guard([&] {
    require(config && path, "config and path must be non-NULL");
    *path = dup(run_directory(config->value).string());
  });
}

void memaudit_config_free(memaudit_config* config) { delete config; }

memaudit_status memaudit_cmd_parse(const memaudit_config* c, char** t, char** j) { return run_command(c, t, j, cmd_parse); }
memaudit_status memaudit_cmd_gen_statements(const memaudit_config* c, char** t, char** j) {
  return run_command(c, t, j, cmd_gen_statements);
}
memaudit_status memaudit_cmd_extract(const memaudit_config* c, char** t, char** j) {
  return run_command(c, t, j, cmd_extract);
}
memaudit_status memaudit_cmd_probe(const memaudit_config* c, char** t, char** j) { return run_command(c, t, j, cmd_probe); }
memaudit_status memaudit_cmd_pca(const memaudit_config* c, char** t, char** j) { return run_command(c, t, j, cmd_pca); }
memaudit_status memaudit_cmd_ape(const memaudit_config* c, char** t, char** j) { return run_command(c, t, j, cmd_ape); }
memaudit_status memaudit_cmd_jailbreak(const memaudit_config* c, char** t, char** j) {
  return run_command(c, t, j, cmd_jailbreak);
}

memaudit_status memaudit_cmd_report(const char* run_dir, char** text, char** json) {
  return guard([&] {
    require(run_dir != nullptr, "run_dir is NULL");
    emit(cmd_report(run_dir), text, json);
  });
}

memaudit_status memaudit_cmd_synth_dataset(const char* dir, size_t n_movies, size_t n_users, size_t n_ratings,
                                           uint64_t seed, char** text, char** json) {
  return guard([&] {
    require(dir != nullptr, "dir is NULL");
    emit(cmd_synth_dataset(dir, {n_movies, n_users, n_ratings, seed}), text, json);
  });
}

memaudit_status memaudit_dataset_load(const char* movies, const char* users, const char* ratings,
                                      memaudit_dataset** out) {
  return guard([&] {
    require(out != nullptr, "out is NULL");
    DatasetPaths paths;
    if (movies) paths.movies = movies;
    if (users) paths.users = users;
    if (ratings) paths.ratings = ratings;
    auto ds = std::make_unique<memaudit_dataset>();
    ds->value = load_dataset(paths);
    *out = ds.release();
  });
}

memaudit_status memaudit_dataset_stats(const memaudit_dataset* dataset, size_t* n_users, size_t* n_movies,
                                       size_t* n_ratings) {
  return guard([&] {
    require(dataset != nullptr, "dataset is NULL");
    const auto s = dataset_stats(dataset->value.movies, dataset->value.users, dataset->value.ratings);
    if (n_users) *n_users = s.n_users;
    if (n_movies) *n_movies = s.n_movies;
    if (n_ratings) *n_ratings = s.n_ratings;
  });
}

void memaudit_dataset_free(memaudit_dataset* dataset) { delete dataset; }

memaudit_status memaudit_mock_backend_new(const memaudit_dataset* dataset, memaudit_field_kind kind, size_t dim,
                                          double noise_scale, double planted_fraction, uint64_t seed,
                                          memaudit_backend** out) {
  return guard([&] {
    require(dataset && out, "dataset and out must be non-NULL");
    AuditConfig cfg;
    cfg.field_kind = kind_of(kind);
    cfg.mock_dim = dim;
    cfg.mock_noise_scale = noise_scale;
    cfg.mock_planted_fraction = planted_fraction;
    cfg.seed = seed;
    cfg.cache = false;
    *out = new memaudit_backend{make_backend(cfg, dataset->value)};
  });
}

memaudit_status memaudit_http_backend_new(const char* base_url, const char* auth_token, double timeout_s,
                                          memaudit_backend** out) {
  return guard([&] {
    require(out != nullptr, "out is NULL");
    HttpConfig cfg;
    if (base_url) cfg.base_url = base_url;
    if (auth_token) cfg.auth_token = auth_token;
    if (timeout_s > 0) cfg.timeout_s = timeout_s;
    *out = new memaudit_backend{std::make_shared<HttpBackend>(HttpConfig::with_env(cfg))};
  });
}

memaudit_status memaudit_backend_generate(memaudit_backend* backend, const char* prompt, double temperature,
                                          int max_tokens, char** text) {
  return guard([&] {
    require(backend && prompt && text, "backend, prompt and text must be non-NULL");
    GenerationRequest req;
    req.transcript = {{Role::User, prompt}};
    req.temperature = temperature;
    req.max_tokens = max_tokens;
    *text = dup(backend->value->generate(req).text);
  });
}

memaudit_status memaudit_backend_extract(memaudit_backend* backend, const char* text, int layer, double* values,
                                         size_t capacity, size_t* dim) {
  return guard([&] {
    require(backend && text && dim, "backend, text and dim must be non-NULL");
    const ActivationVector v = backend->value->extract_activation({text, layer, TokenPosition::Last});
    *dim = v.dim();
    if (values) std::memcpy(values, v.values.data(), std::min(capacity, v.dim()) * sizeof(double));
  });
}

void memaudit_backend_free(memaudit_backend* backend) { delete backend; }

memaudit_status memaudit_pairset_new(const double* pos, const double* neg, size_t n, size_t dim, const int* labels,
                                     memaudit_pairset** out) {
  return guard([&] {
    require(pos && neg && out, "pos, neg and out must be non-NULL");
    auto set = std::make_unique<memaudit_pairset>();
    set->value.pos = rows_to_matrix(pos, n, dim);
    set->value.neg = rows_to_matrix(neg, n, dim);
    if (labels) {
      std::vector<bool> l(n);
      for (size_t i = 0; i < n; ++i) {
        require(labels[i] == 0 || labels[i] == 1, "labels must be 0 or 1");
        l[i] = labels[i] == 1;
      }
      set->value.labels = std::move(l);
    }
    set->value.validate();
    *out = set.release();
  });
}

memaudit_status memaudit_pairset_set_clusters(memaudit_pairset* set, const int* cluster_ids) {
  return guard([&] {
    require(set && cluster_ids, "set and cluster_ids must be non-NULL");
    set->value.cluster_ids = std::vector<int>(cluster_ids, cluster_ids + set->value.size());
    set->value.validate();
  });
}

void memaudit_pairset_free(memaudit_pairset* set) { delete set; }

double memaudit_ccs_loss(double p_pos, double p_neg) { return ccs_loss(p_pos, p_neg); }

memaudit_status memaudit_probe_train(const memaudit_pairset* train, int n_restarts, int epochs, double learning_rate,
                                     uint64_t seed, memaudit_probe** out) {
  return guard([&] {
    require(train && out, "train and out must be non-NULL");
    *out = new memaudit_probe{train_ccs(train->value, {n_restarts, epochs, learning_rate, seed})};
  });
}

memaudit_status memaudit_probe_score(const memaudit_probe* probe, const double* pos, const double* neg, size_t dim,
                                     double* score) {
  return guard([&] {
    require(probe && pos && neg && score, "probe, pos, neg and score must be non-NULL");
    const Eigen::Map<const Vector> p(pos, static_cast<Eigen::Index>(dim));
    const Eigen::Map<const Vector> q(neg, static_cast<Eigen::Index>(dim));
    *score = probe_score(probe->value, p, q);
  });
}

memaudit_status memaudit_probe_evaluate(memaudit_probe* probe, const memaudit_pairset* test, double* balanced_accuracy,
                                        double* tpr, double* tnr) {
  return guard([&] {
    require(probe && test, "probe and test must be non-NULL");
    const EvalMetrics m = evaluate(probe->value, test->value);
    if (balanced_accuracy) *balanced_accuracy = m.balanced_accuracy;
    if (tpr) *tpr = m.tpr;
    if (tnr) *tnr = m.tnr;
  });
}

void memaudit_probe_free(memaudit_probe* probe) { delete probe; }

memaudit_status memaudit_probe_run(const memaudit_pairset* set, const char* variant, int k, double train_fraction,
                                   uint64_t seed, double* balanced_accuracy) {
  return guard([&] {
    require(set && variant && balanced_accuracy, "set, variant and balanced_accuracy must be non-NULL");
    ProbeRunOptions opts;
    opts.variant = parse_probe_variant(variant);
    opts.k = k;
    opts.split = {train_fraction, derive_seed(seed, "split")};
    opts.ccs.seed = derive_seed(seed, "ccs");
    *balanced_accuracy = run_probe(set->value, opts).metrics.balanced_accuracy;
  });
}

memaudit_status memaudit_kmeans(const double* points, size_t n, size_t dim, int k, uint64_t seed, int* assignment,
                                double* inertia) {
  return guard([&] {
    require(points != nullptr, "points is NULL");
    const ClusterAssignment a = kmeans(rows_to_matrix(points, n, dim), k, seed);
    if (assignment) std::copy(a.assignment.begin(), a.assignment.end(), assignment);
    if (inertia) *inertia = a.inertia;
  });
}

memaudit_status memaudit_pca(const double* points, size_t n, size_t dim, int n_components, double* components,
                             double* projected, double* ratios) {
  return guard([&] {
    require(points != nullptr, "points is NULL");
    const PcaProjection p = pca_project(rows_to_matrix(points, n, dim), n_components);
    for (Eigen::Index r = 0; r < p.components.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.components.cols(); ++c) {
        if (components) components[r * p.components.cols() + c] = p.components(r, c);
      }
    }
    for (Eigen::Index r = 0; r < p.projected.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.projected.cols(); ++c) {
        if (projected) projected[r * p.projected.cols() + c] = p.projected(r, c);
      }
    }
    if (ratios) std::copy(p.explained_variance_ratio.begin(), p.explained_variance_ratio.end(), ratios);
  });
}

int memaudit_exact_match(const char* prediction, const char* gold) {
  if (!prediction || !gold) return 0;
  return exact_match(prediction, gold) ? 1 : 0;
}

memaudit_status memaudit_cca_transcript(const char* key, char** messages_json) {
  return guard([&] {
    require(key && messages_json, "key and messages_json must be non-NULL");
    const auto exemplars = default_cca_exemplars();
    *messages_json = dup(to_messages(build_cca_transcript(key, exemplars)).dump());
  });
}

memaudit_status memaudit_classify_reply(const char* reply, const char* gold_line, memaudit_field_kind kind,
                                        const char* const* seen, size_t n_seen, memaudit_verdict* verdict) {
  return guard([&] {
    require(reply && gold_line && verdict, "reply, gold_line and verdict must be non-NULL");
    require(seen || n_seen == 0, "seen is NULL");
    std::set<std::string> seen_set;
    for (size_t i = 0; i < n_seen; ++i) seen_set.insert(normalize_reply(seen[i]));
    *verdict = static_cast<memaudit_verdict>(classify_reply(reply, gold_line, kind_of(kind), seen_set).verdict);
  });
}

}  // extern "C"
