#include "nfdp/rng.hpp"

#include "nfdp/errors.hpp"

namespace nfdp {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ (stream * 0xD1B54A32D192ED03ull + 0x2545F4914F6CDD1Dull);
  std::uint64_t b = splitmix64(s);
  return b;
}

int Rng::next_index(int n) {
  if (n <= 0) throw DomainError("Rng::next_index: n must be positive");
  // Rejection sampling over a power-of-two range keeps the draw exact.
  std::uint64_t range = static_cast<std::uint64_t>(n);
  std::uint64_t mask = ~0ull;
  std::uint64_t limit = mask - mask % range;
  for (;;) {
    std::uint64_t v = engine_();
    if (v < limit) return static_cast<int>(v % range);
  }
}

}  // namespace nfdp
