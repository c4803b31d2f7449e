#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace d2dnc {

// splitmix64; used purely to derive well-separated child seeds so that every
// (sweep point, scheme, realization, slot) gets an independent stream and the
// assignment of work to threads cannot change any draw.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> lane) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t v : lane) s = splitmix64(s ^ v);
  return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace d2dnc
