#pragma once

#include <cstdint>
#include <random>

namespace nfdp {

// splitmix64 step; used both as a mixer and to derive per-worker seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministically derives an independent stream seed from a master seed.
// Streams for distinct indices are decorrelated; the mapping is fixed so that
// results do not depend on thread count or scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Seeded generator with a platform-independent uniform double.
// std::mt19937_64 output is fully specified by the standard; the [0,1) mapping
// below keeps 53 bits, so sequences are reproducible across machines.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derived(std::uint64_t master, std::uint64_t stream) {
    return Rng(derive_seed(master, stream));
  }

  // Uniform on [0, 1).
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on {0, ..., n-1}.
  int next_index(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace nfdp
