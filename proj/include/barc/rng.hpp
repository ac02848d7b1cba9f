#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace barc {

// All randomness in a run derives from one master seed. Component streams
// are keyed by (master, tag, index) so that adding a consumer never shifts
// the draws of an existing one. Tags are short path-like strings, e.g.
// "ppo/collect", "brs/sample", "env/episode".

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(master ^ fnv1a64(tag));
  return splitmix64(h ^ splitmix64(index));
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, tag, index));
}

}  // namespace barc
