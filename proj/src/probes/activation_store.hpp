#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "probes/activation_set.hpp"

namespace memaudit {

struct ActivationStoreMeta {
  int layer = -2;
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::string field_kind;
  std::string backend;
  std::vector<std::string> source_ids;
};

// Writes <base>.bin and the <base>.json sidecar.
//
// .bin layout (little-endian): 8-byte magic "MAACTV01", u64 n_pairs, u64 dim,
// then n_pairs*dim f64 of the positive side and n_pairs*dim f64 of the
// negative side, both row-major.
//
// Sidecar: {"shape":[n,dim], "layer", "seed", "dataset_hash", "field_kind",
// "backend", "labels":[true|false|null...], "source_ids":[...]}.
void save_activation_set(const std::filesystem::path& base, const ActivationPairSet& set,
                         const ActivationStoreMeta& meta);

// Error(Io) for missing files, Error(Schema) for a corrupt container or a
// sidecar disagreeing with it.
std::pair<ActivationPairSet, ActivationStoreMeta> load_activation_set(const std::filesystem::path& base);

}  // namespace memaudit
