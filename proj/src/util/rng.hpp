#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace memaudit {

// Seeded generator with platform-independent draws. The std distributions are
// implementation-defined, so bounded integers and normals are derived here
// directly from the mt19937_64 stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  // Uniform in [0, 1).
  double uniform();

  // Standard normal (Box-Muller, both outputs used).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Named-stream derivation: (global seed, component name) -> component seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace memaudit
