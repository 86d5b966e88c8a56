#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace harmclf {

// std::mt19937_64 has a fully specified output sequence, but the standard
// distributions do not. The helpers below derive integers and reals from the
// raw engine output so shuffles and initializations are identical across
// standard library implementations.

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Combines a base seed with a stream index (epoch, member, trial...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL));
}

/// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r = eng();
  while (r >= limit) r = eng();
  return r % bound;
}

/// Uniform real in [0, 1) with 53 bits of randomness.
inline double uniform_unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(eng, i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace harmclf
