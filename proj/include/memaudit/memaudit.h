/* C interface of the memorization-audit toolkit.
 *
 * Every function returns a memaudit_status; on failure the message is
 * available from memaudit_last_error() on the same thread until the next
 * call. Strings returned through char** are owned by the caller and released
 * with memaudit_string_free(). Handles are opaque and released with their
 * *_free function; freeing NULL is a no-op.
 */
#ifndef MEMAUDIT_H
#define MEMAUDIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MEMAUDIT_API __declspec(dllexport)
#else
#define MEMAUDIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum memaudit_status {
  MEMAUDIT_OK = 0,
  MEMAUDIT_ERR_PARSE = 1,
  MEMAUDIT_ERR_VALIDATION = 2,
  MEMAUDIT_ERR_GENERATION = 3,
  MEMAUDIT_ERR_TEMPLATE = 4,
  MEMAUDIT_ERR_SPLIT = 5,
  MEMAUDIT_ERR_CONFIG = 6,
  MEMAUDIT_ERR_TRANSPORT = 7,
  MEMAUDIT_ERR_SCHEMA = 8,
  MEMAUDIT_ERR_TRAINING = 9,
  MEMAUDIT_ERR_METRICS = 10,
  MEMAUDIT_ERR_IO = 11,
  MEMAUDIT_ERR_NO_ARTIFACTS = 12,
  MEMAUDIT_ERR_INVALID_ARGUMENT = 13,
  MEMAUDIT_ERR_INTERNAL = 14
} memaudit_status;

typedef enum memaudit_field_kind {
  MEMAUDIT_FIELD_ITEM = 0,
  MEMAUDIT_FIELD_USER = 1,
  MEMAUDIT_FIELD_RATING = 2
} memaudit_field_kind;

typedef enum memaudit_verdict {
  MEMAUDIT_VERDICT_VALID = 0,
  MEMAUDIT_VERDICT_DUPLICATE = 1,
  MEMAUDIT_VERDICT_UNKNOWN_TOKEN = 2,
  MEMAUDIT_VERDICT_HALLUCINATION = 3,
  MEMAUDIT_VERDICT_MALFORMED = 4
} memaudit_verdict;

typedef struct memaudit_config memaudit_config;
typedef struct memaudit_dataset memaudit_dataset;
typedef struct memaudit_backend memaudit_backend;
typedef struct memaudit_pairset memaudit_pairset;
typedef struct memaudit_probe memaudit_probe;

MEMAUDIT_API const char* memaudit_version(void);
MEMAUDIT_API const char* memaudit_last_error(void);
MEMAUDIT_API const char* memaudit_status_name(memaudit_status status);
MEMAUDIT_API void memaudit_string_free(char* s);

/* Configuration ("key = value" text format). */
MEMAUDIT_API memaudit_status memaudit_config_new(memaudit_config** out);
MEMAUDIT_API memaudit_status memaudit_config_load(const char* path, memaudit_config** out);
MEMAUDIT_API memaudit_status memaudit_config_set(memaudit_config* config, const char* key, const char* value);
MEMAUDIT_API memaudit_status memaudit_config_get(const memaudit_config* config, const char* key, char** value);
MEMAUDIT_API memaudit_status memaudit_config_hash(const memaudit_config* config, char** hash);
MEMAUDIT_API memaudit_status memaudit_config_run_dir(const memaudit_config* config, char** path);
MEMAUDIT_API void memaudit_config_free(memaudit_config* config);

/* Commands. Each writes its artifacts under the run directory and returns a
 * human-readable text and a JSON document (either out pointer may be NULL). */
MEMAUDIT_API memaudit_status memaudit_cmd_parse(const memaudit_config* config, char** text, char** json);
MEMAUDIT_API memaudit_status memaudit_cmd_gen_statements(const memaudit_config* config, char** text, char** json);
MEMAUDIT_API memaudit_status memaudit_cmd_extract(const memaudit_config* config, char** text, char** json);
MEMAUDIT_API memaudit_status memaudit_cmd_probe(const memaudit_config* config, char** text, char** json);
MEMAUDIT_API memaudit_status memaudit_cmd_pca(const memaudit_config* config, char** text, char** json);
MEMAUDIT_API memaudit_status memaudit_cmd_ape(const memaudit_config* config, char** text, char** json);
MEMAUDIT_API memaudit_status memaudit_cmd_jailbreak(const memaudit_config* config, char** text, char** json);
MEMAUDIT_API memaudit_status memaudit_cmd_report(const char* run_dir, char** text, char** json);
MEMAUDIT_API memaudit_status memaudit_cmd_synth_dataset(const char* dir, size_t n_movies, size_t n_users,
                                                        size_t n_ratings, uint64_t seed, char** text, char** json);

/* Dataset. Paths may be NULL or empty to skip a file. */
MEMAUDIT_API memaudit_status memaudit_dataset_load(const char* movies, const char* users, const char* ratings,
                                                   memaudit_dataset** out);
MEMAUDIT_API memaudit_status memaudit_dataset_stats(const memaudit_dataset* dataset, size_t* n_users,
                                                    size_t* n_movies, size_t* n_ratings);
MEMAUDIT_API void memaudit_dataset_free(memaudit_dataset* dataset);

/* Backends. The mock is built from a dataset: planted_fraction of the
 * records of the given kind are reproduced verbatim. */
MEMAUDIT_API memaudit_status memaudit_mock_backend_new(const memaudit_dataset* dataset, memaudit_field_kind kind,
                                                       size_t dim, double noise_scale, double planted_fraction,
                                                       uint64_t seed, memaudit_backend** out);
MEMAUDIT_API memaudit_status memaudit_http_backend_new(const char* base_url, const char* auth_token,
                                                       double timeout_s, memaudit_backend** out);
MEMAUDIT_API memaudit_status memaudit_backend_generate(memaudit_backend* backend, const char* prompt,
                                                       double temperature, int max_tokens, char** text);
/* Writes up to capacity values; *dim receives the full dimension. */
MEMAUDIT_API memaudit_status memaudit_backend_extract(memaudit_backend* backend, const char* text, int layer,
                                                      double* values, size_t capacity, size_t* dim);
MEMAUDIT_API void memaudit_backend_free(memaudit_backend* backend);

/* Activation pairs: pos and neg are n x dim row-major. labels may be NULL;
 * otherwise each entry is 0 or 1. */
MEMAUDIT_API memaudit_status memaudit_pairset_new(const double* pos, const double* neg, size_t n, size_t dim,
                                                  const int* labels, memaudit_pairset** out);
MEMAUDIT_API memaudit_status memaudit_pairset_set_clusters(memaudit_pairset* set, const int* cluster_ids);
MEMAUDIT_API void memaudit_pairset_free(memaudit_pairset* set);

/* CCS probe. */
MEMAUDIT_API double memaudit_ccs_loss(double p_pos, double p_neg);
MEMAUDIT_API memaudit_status memaudit_probe_train(const memaudit_pairset* train, int n_restarts, int epochs,
                                                  double learning_rate, uint64_t seed, memaudit_probe** out);
MEMAUDIT_API memaudit_status memaudit_probe_score(const memaudit_probe* probe, const double* pos, const double* neg,
                                                  size_t dim, double* score);
MEMAUDIT_API memaudit_status memaudit_probe_evaluate(memaudit_probe* probe, const memaudit_pairset* test,
                                                     double* balanced_accuracy, double* tpr, double* tnr);
MEMAUDIT_API void memaudit_probe_free(memaudit_probe* probe);

/* Split / normalize / train / evaluate in one call. variant is "ccs" or
 * "cluster-norm"; k is used by cluster-norm. */
MEMAUDIT_API memaudit_status memaudit_probe_run(const memaudit_pairset* set, const char* variant, int k,
                                                double train_fraction, uint64_t seed, double* balanced_accuracy);

/* points is n x dim row-major; assignment receives n ids. */
MEMAUDIT_API memaudit_status memaudit_kmeans(const double* points, size_t n, size_t dim, int k, uint64_t seed,
                                             int* assignment, double* inertia);
/* components: n_components x dim; projected: n x n_components; ratios:
 * n_components. Any output may be NULL. */
MEMAUDIT_API memaudit_status memaudit_pca(const double* points, size_t n, size_t dim, int n_components,
                                          double* components, double* projected, double* ratios);

/* Returns 1 on a match, 0 otherwise. */
MEMAUDIT_API int memaudit_exact_match(const char* prediction, const char* gold);

/* CCA transcript for key with the default exemplars, as a messages JSON array. */
MEMAUDIT_API memaudit_status memaudit_cca_transcript(const char* key, char** messages_json);
MEMAUDIT_API memaudit_status memaudit_classify_reply(const char* reply, const char* gold_line, memaudit_field_kind kind,
                                                     const char* const* seen, size_t n_seen,
                                                     memaudit_verdict* verdict);

#ifdef __cplusplus
}
#endif

#endif
