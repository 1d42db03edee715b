#ifndef ANOVA_RNG_HPP
#define ANOVA_RNG_HPP

#include <cstdint>
#include <random>

namespace anova {

// Stream roles, so every random object in a replicate has its own
// independently keyed generator regardless of evaluation order.
enum class Role : std::uint64_t {
  data = 1,    // X
  weights = 2, // W
  signal = 3,  // theta
  noise = 4,   // eps
  test = 5,    // x
  shuffle = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-style stream key: hash-chains (seed, cell, replicate, role) so a
// stream is reproducible in isolation and independent of thread scheduling.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t cell,
                                   std::uint64_t replicate, Role role) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (cell * 0xd1342543de82ef95ULL));
  k = splitmix64(k ^ (replicate * 0xaf251af3b0f025b5ULL));
  k = splitmix64(k ^ static_cast<std::uint64_t>(role));
  return std::mt19937_64(k);
}

}  // namespace anova

#endif  // ANOVA_RNG_HPP
