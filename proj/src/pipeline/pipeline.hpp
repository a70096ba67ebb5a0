#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "backend/backend.hpp"
#include "dataset/records.hpp"
#include "json.hpp"
#include "pipeline/config.hpp"

namespace memaudit {

// Human text plus the machine-readable document of one command.
struct CommandOutput {
  std::string text;
  nlohmann::json json;
};

// <out>/<config hash>; created on first use together with config.txt and run.json.
std::filesystem::path run_directory(const AuditConfig& config);

// Mock built from the dataset (records of the configured kind, a seeded
// planted fraction, genuine entities for activations) or the HTTP client,
// wrapped in the on-disk cache unless caching is off.
std::shared_ptr<Backend> make_backend(const AuditConfig& config, const Dataset& dataset);

CommandOutput cmd_parse(const AuditConfig& config);
CommandOutput cmd_gen_statements(const AuditConfig& config);
// Missing upstream artifacts (statements, activations) are produced first.
CommandOutput cmd_extract(const AuditConfig& config);
CommandOutput cmd_probe(const AuditConfig& config);
CommandOutput cmd_pca(const AuditConfig& config);
CommandOutput cmd_ape(const AuditConfig& config);
// Without a reply the transcript is sent to the backend and its answer classified.
CommandOutput cmd_jailbreak(const AuditConfig& config);
// Error(NoArtifacts) when the directory holds nothing to report.
CommandOutput cmd_report(const std::filesystem::path& run_dir);

struct SynthSpec {
  std::size_t n_movies = 200;
  std::size_t n_users = 100;
  std::size_t n_ratings = 2000;
  std::uint64_t seed = 0;
};

// Writes movies.dat, users.dat and ratings.dat with MovieLens-1M layouts.
CommandOutput cmd_synth_dataset(const std::filesystem::path& dir, const SynthSpec& spec);

}  // namespace memaudit
