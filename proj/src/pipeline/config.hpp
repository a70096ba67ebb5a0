#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "ape/ape.hpp"
#include "backend/http_backend.hpp"
#include "dataset/records.hpp"
#include "probes/probe_run.hpp"

namespace memaudit {

// Everything a run needs. Loaded from a "key = value" text file (one pair per
// line, '#' starts a comment) and per-command overrides; keys are listed in
// config_keys().
struct AuditConfig {
  DatasetPaths paths;
  std::string backend = "mock";  // mock | http
  HttpConfig http;
  std::filesystem::path out_dir = "runs";
  bool cache = true;
  std::uint64_t seed = 0;
  FieldKind field_kind = FieldKind::Item;

  std::size_t max_records = 500;
  double fake_ratio = 1.0;
  std::string template_text;
  bool fake_title_year = true;

  int layer = -2;

  ProbeVariant probe_variant = ProbeVariant::Ccs;
  int probe_k = 5;
  double train_fraction = 0.8;
  int n_restarts = 10;
  int epochs = 1000;
  double learning_rate = 0.01;

  std::size_t mock_dim = 32;
  double mock_noise_scale = 0.1;
  double mock_truth_magnitude = 1.0;
  double mock_planted_fraction = 0.25;
  bool mock_confound = false;
  double mock_confound_magnitude = 5.0;
  int mock_confound_clusters = 2;

  ApeConfig ape;
  std::string ape_baseline = "1b";  // 1b | 3b | none

  std::string jailbreak_key = "1::";
  std::string jailbreak_reply;
};

// Documented key names with their current values in canonical text form.
std::map<std::string, std::string> config_entries(const AuditConfig& config);

// Sets one key. Error(Config) on an unknown key or a bad value.
void set_config_value(AuditConfig& config, std::string_view key, std::string_view value);

// Parses the text format on top of the defaults. Error(Config) carries the
// line number.
AuditConfig parse_config(std::string_view text);
AuditConfig load_config(const std::filesystem::path& path);

// Hash of the entries that determine results. Output location, caching,
// command selectors (variant, field, jailbreak key) and transport tuning are
// excluded, so every command of one experiment shares a run directory.
std::string config_hash(const AuditConfig& config);

// Canonical "key = value" text of all entries, secrets elided.
std::string config_text(const AuditConfig& config);

// Error(Config) when a referenced dataset path does not exist or the backend
// selection is unusable.
void validate_config(const AuditConfig& config);

}  // namespace memaudit
