#pragma once

// Pinned deterministic random stream for keyword dropout.
//
// Dropout decisions must be reproducible across runs, platforms and corpus
// subsets, so the generator is fixed here rather than delegated to the
// standard library (whose distributions are implementation-defined):
//
//   per-example seed  = one SplitMix64 step of (global_seed XOR fnv1a64(id))
//   per-keyword draw  = next SplitMix64 output mapped to [0,1) via
//                       (x >> 11) * 2^-53
//   a keyword is dropped iff its draw < rate
//
// Draws are consumed in flattened keyword order (groups in order, keywords
// within a group in order).

#include <cstdint>
#include <string_view>

namespace ctrlkit {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// SplitMix64 (Steele, Lea & Flood).
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform draw in [0, 1) with 53 bits of precision.
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

inline std::uint64_t per_example_seed(std::uint64_t global_seed, std::string_view id) {
  SplitMix64 s{global_seed ^ fnv1a64(id)};
  return s.next();
}

}  // namespace ctrlkit
