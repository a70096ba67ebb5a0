#include "pipeline/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <vector>

#include "util/error.hpp"
#include "util/hash.hpp"
#include "util/text.hpp"

namespace memaudit {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw Error(ErrorCode::Config, "config key '" + std::string(key) + "': '" + std::string(value) + "' is not " +
                                     std::string(expected));
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

struct Entry {
  const char* key;
  bool hashed;
  std::function<std::string(const AuditConfig&)> get;
  std::function<void(AuditConfig&, std::string_view)> set;
};

#define STR_ENTRY(name, hashed, field) \
  Entry { name, hashed, [](const AuditConfig& c) { return std::string(c.field); }, \
          [](AuditConfig& c, std::string_view v) { c.field = std::string(v); } }
#define INT_ENTRY(name, hashed, field, type) \
  Entry { name, hashed, [](const AuditConfig& c) { return std::to_string(c.field); }, \
          [](AuditConfig& c, std::string_view v) { c.field = to_int<type>(name, v); } }
#define DBL_ENTRY(name, hashed, field) \
  Entry { name, hashed, [](const AuditConfig& c) { return fmt_double(c.field); }, \
          [](AuditConfig& c, std::string_view v) { c.field = to_double(name, v); } }
#define BOOL_ENTRY(name, hashed, field) \
  Entry { name, hashed, [](const AuditConfig& c) { return fmt_bool(c.field); }, \
          [](AuditConfig& c, std::string_view v) { c.field = to_bool(name, v); } }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{"dataset.movies", true, [](const AuditConfig& c) { return c.paths.movies.string(); },
            [](AuditConfig& c, std::string_view v) { c.paths.movies = std::string(v); }},
      Entry{"dataset.users", true, [](const AuditConfig& c) { return c.paths.users.string(); },
            [](AuditConfig& c, std::string_view v) { c.paths.users = std::string(v); }},
      Entry{"dataset.ratings", true, [](const AuditConfig& c) { return c.paths.ratings.string(); },
            [](AuditConfig& c, std::string_view v) { c.paths.ratings = std::string(v); }},
      Entry{"backend", true, [](const AuditConfig& c) { return c.backend; },
            [](AuditConfig& c, std::string_view v) {
              if (v != "mock" && v != "http") bad_value("backend", v, "mock or http");
              c.backend = std::string(v);
            }},
      STR_ENTRY("http.base_url", true, http.base_url),
      STR_ENTRY("http.auth_token", false, http.auth_token),
      DBL_ENTRY("http.timeout_s", false, http.timeout_s),
      INT_ENTRY("http.max_retries", false, http.max_retries, int),
      INT_ENTRY("http.max_in_flight", false, http.max_in_flight, std::size_t),
      Entry{"out", false, [](const AuditConfig& c) { return c.out_dir.string(); },
            [](AuditConfig& c, std::string_view v) { c.out_dir = std::string(v); }},
      BOOL_ENTRY("cache", false, cache),
      INT_ENTRY("seed", true, seed, std::uint64_t),
      Entry{"field_kind", false, [](const AuditConfig& c) { return std::string(to_string(c.field_kind)); },
            [](AuditConfig& c, std::string_view v) { c.field_kind = parse_field_kind(v); }},
      INT_ENTRY("statements.max_records", true, max_records, std::size_t),
      DBL_ENTRY("statements.fake_ratio", true, fake_ratio),
      STR_ENTRY("statements.template", true, template_text),
      BOOL_ENTRY("statements.fake_title_year", true, fake_title_year),
      INT_ENTRY("activations.layer", true, layer, int),
      Entry{"probe.variant", false, [](const AuditConfig& c) { return std::string(to_string(c.probe_variant)); },
            [](AuditConfig& c, std::string_view v) { c.probe_variant = parse_probe_variant(v); }},
      INT_ENTRY("probe.k", true, probe_k, int),
      DBL_ENTRY("probe.train_fraction", true, train_fraction),
      INT_ENTRY("probe.restarts", true, n_restarts, int),
      INT_ENTRY("probe.epochs", true, epochs, int),
      DBL_ENTRY("probe.learning_rate", true, learning_rate),
      INT_ENTRY("mock.dim", true, mock_dim, std::size_t),
      DBL_ENTRY("mock.noise_scale", true, mock_noise_scale),
      DBL_ENTRY("mock.truth_magnitude", true, mock_truth_magnitude),
      DBL_ENTRY("mock.planted_fraction", true, mock_planted_fraction),
      BOOL_ENTRY("mock.confound", true, mock_confound),
      DBL_ENTRY("mock.confound_magnitude", true, mock_confound_magnitude),
      INT_ENTRY("mock.confound_clusters", true, mock_confound_clusters, int),
      INT_ENTRY("ape.n_candidates", true, ape.n_candidates, std::size_t),
      INT_ENTRY("ape.n_demos", true, ape.n_demos, std::size_t),
      INT_ENTRY("ape.top_k", true, ape.top_k, std::size_t),
      INT_ENTRY("ape.n_iterations", true, ape.n_iterations, int),
      Entry{"ape.temperatures", true,
            [](const AuditConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.ape.temperatures.size(); ++i) {
                if (i) out += ",";
                out += fmt_double(c.ape.temperatures[i]);
              }
              return out;
            },
            [](AuditConfig& c, std::string_view v) {
              std::vector<double> temps;
              for (auto part : split(v, ",")) temps.push_back(to_double("ape.temperatures", trim(part)));
              c.ape.temperatures = std::move(temps);
            }},
      INT_ENTRY("ape.validation_size", true, ape.validation_size, std::size_t),
      INT_ENTRY("ape.probe_size", true, ape.probe_size, std::size_t),
      BOOL_ENTRY("ape.full_record_match", true, ape.full_record_match),
      STR_ENTRY("ape.proposal_meta_prompt", true, ape.proposal_meta_prompt),
      STR_ENTRY("ape.variation_meta_prompt", true, ape.variation_meta_prompt),
      Entry{"ape.baseline", false, [](const AuditConfig& c) { return c.ape_baseline; },
            [](AuditConfig& c, std::string_view v) {
              if (v != "1b" && v != "3b" && v != "none") bad_value("ape.baseline", v, "1b, 3b or none");
              c.ape_baseline = std::string(v);
            }},
      STR_ENTRY("jailbreak.key", false, jailbreak_key),
      STR_ENTRY("jailbreak.reply", false, jailbreak_reply),
  };
  return table;
}

}  // namespace

std::map<std::string, std::string> config_entries(const AuditConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& e : entries()) out[e.key] = e.get(config);
  return out;
}

void set_config_value(AuditConfig& config, std::string_view key, std::string_view value) {
  for (const auto& e : entries()) {
    if (key == e.key) {
      try {
        e.set(config, trim(value));
      } catch (const Error& err) {
        if (err.code() == ErrorCode::Config) throw;
        throw Error(ErrorCode::Config, "config key '" + std::string(key) + "': " + err.what());
      }
      return;
    }
  }
  throw Error(ErrorCode::Config, "unknown config key '" + std::string(key) + "'");
}

AuditConfig parse_config(std::string_view text) {
  AuditConfig config;
  std::size_t line_no = 0;
  for (auto line : split(text, "\n")) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::Config, "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

AuditConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Config, "config file not found: " + path.string());
  return parse_config(read_file(path));
}

std::string config_hash(const AuditConfig& config) {
  std::string canon;
  for (const auto& e : entries()) {
    if (e.hashed) canon += std::string(e.key) + "=" + e.get(config) + "\n";
  }
  return sha256_hex(canon).substr(0, 16);
}

std::string config_text(const AuditConfig& config) {
  std::string out;
  for (const auto& e : entries()) {
    std::string value = e.get(config);
    if (std::string_view(e.key) == "http.auth_token" && !value.empty()) value = "<redacted>";
    out += std::string(e.key) + " = " + value + "\n";
  }
  return out;
}

void validate_config(const AuditConfig& config) {
  for (const auto* p : {&config.paths.movies, &config.paths.users, &config.paths.ratings}) {
    if (!p->empty() && !std::filesystem::exists(*p)) {
      throw Error(ErrorCode::Config, "dataset file not found: " + p->string());
    }
  }
  if (config.backend == "http" && HttpConfig::with_env(config.http).base_url.empty()) {
    throw Error(ErrorCode::Config, "backend 'http' needs http.base_url or MEMAUDIT_BASE_URL");
  }
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw Error(ErrorCode::Config, "probe.train_fraction must be in (0, 1)");
  }
  config.ape.validate();
}

}  // namespace memaudit
