#include "probes/activation_store.hpp"

#include <bit>
#include <cstring>

#include "json.hpp"
#include "util/error.hpp"
#include "util/text.hpp"

namespace memaudit {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "activation store assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'M', 'A', 'A', 'C', 'T', 'V', '0', '1'};

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix) {
  auto p = base;
  p += suffix;
  return p;
}

void append_raw(std::string& out, const void* data, std::size_t bytes) {
  out.append(static_cast<const char*>(data), bytes);
}

void append_matrix(std::string& out, const Matrix& m) {
  // Eigen is column-major; write row by row.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      append_raw(out, &v, sizeof v);
    }
  }
}

}  // namespace

void save_activation_set(const std::filesystem::path& base, const ActivationPairSet& set,
                         const ActivationStoreMeta& meta) {
  set.validate();
  std::string bin;
  bin.reserve(24 + 2 * set.size() * set.dim() * sizeof(double));
  append_raw(bin, kMagic, sizeof kMagic);
  const std::uint64_t n = set.size(), dim = set.dim();
  append_raw(bin, &n, sizeof n);
  append_raw(bin, &dim, sizeof dim);
  append_matrix(bin, set.pos);
  append_matrix(bin, set.neg);
  write_file(with_suffix(base, ".bin"), bin);

  json labels = json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    labels.push_back(set.labels ? json(static_cast<bool>((*set.labels)[i])) : json(nullptr));
  }
  json sidecar{{"shape", {n, dim}},           {"layer", meta.layer},
               {"seed", meta.seed},           {"dataset_hash", meta.dataset_hash},
               {"field_kind", meta.field_kind}, {"backend", meta.backend},
               {"labels", labels},            {"source_ids", meta.source_ids}};
  write_file(with_suffix(base, ".json"), sidecar.dump(2) + "\n");
}

std::pair<ActivationPairSet, ActivationStoreMeta> load_activation_set(const std::filesystem::path& base) {
  const std::string bin = read_file(with_suffix(base, ".bin"));
  const json sidecar = json::parse(read_file(with_suffix(base, ".json")), nullptr, false);
  if (sidecar.is_discarded() || !sidecar.is_object()) throw Error(ErrorCode::Schema, "activation sidecar is not JSON");

  if (bin.size() < 24 || std::memcmp(bin.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::Schema, "not an activation container: " + with_suffix(base, ".bin").string());
  }
  std::uint64_t n = 0, dim = 0;
  std::memcpy(&n, bin.data() + 8, sizeof n);
  std::memcpy(&dim, bin.data() + 16, sizeof dim);
  if (dim != 0 && n > (bin.size() - 24) / (2 * dim * sizeof(double)) + 1) {
    throw Error(ErrorCode::Schema, "activation container header is corrupt");
  }
  if (bin.size() != 24 + 2 * n * dim * sizeof(double)) {
    throw Error(ErrorCode::Schema, "activation container size does not match its header");
  }

  ActivationPairSet set;
  set.pos.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  set.neg.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  const char* p = bin.data() + 24;
  for (Matrix* m : {&set.pos, &set.neg}) {
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) {
        double v = 0.0;
        std::memcpy(&v, p, sizeof v);
        p += sizeof v;
        (*m)(r, c) = v;
      }
    }
  }

  ActivationStoreMeta meta;
  try {
    const auto& shape = sidecar.at("shape");
    if (shape.at(0).get<std::uint64_t>() != n || shape.at(1).get<std::uint64_t>() != dim) {
      throw Error(ErrorCode::Schema, "sidecar shape disagrees with the container");
    }
    meta.layer = sidecar.at("layer").get<int>();
    meta.seed = sidecar.at("seed").get<std::uint64_t>();
    meta.dataset_hash = sidecar.at("dataset_hash").get<std::string>();
    meta.field_kind = sidecar.at("field_kind").get<std::string>();
    meta.backend = sidecar.value("backend", "");
    meta.source_ids = sidecar.at("source_ids").get<std::vector<std::string>>();
    const auto& labels = sidecar.at("labels");
    if (labels.size() != n) throw Error(ErrorCode::Schema, "sidecar label count disagrees with the container");
    bool any = false;
    std::vector<bool> values;
    for (const auto& l : labels) {
      if (l.is_null()) {
        values.push_back(false);
      } else {
        any = true;
        values.push_back(l.get<bool>());
      }
    }
    if (any) set.labels = std::move(values);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("activation sidecar: ") + e.what());
  }
  set.validate();
  return {std::move(set), std::move(meta)};
}

}  // namespace memaudit
