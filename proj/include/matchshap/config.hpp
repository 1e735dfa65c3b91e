#pragma once

#include <cstdlib>

namespace matchshap::config {

// Widest coalition representable (bitset semantics over vertex ids).
inline constexpr int kCoalitionMaxVertices = 64;

// Default ceiling for 2^n-style exact computations. Overridable through the
// MATCHSHAP_MAX_BRUTE_N environment variable.
inline constexpr int kDefaultMaxBruteForceN = 20;

// Hard cap on the override; dense subset tables get large past this.
inline constexpr int kMaxBruteForceCap = 26;

// n! enumeration ceiling for the permutation test oracle.
inline constexpr int kPermutationOracleMaxN = 8;

// Largest modular decomposition (number of modules) the player-type dynamic
// program accepts inside the automatic dispatcher.
inline constexpr int kDefaultModularKBound = 6;

// Dense subset-table thresholds inside the matching value oracle. Larger
// instances fall back to memoized recursion (or augmenting-path search for
// unweighted graphs).
inline constexpr int kDenseCardinalityMaxN = 22;
inline constexpr int kDenseValueMaxN = 20;

inline int max_brute_force_n() {
  if (const char* env = std::getenv("MATCHSHAP_MAX_BRUTE_N")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= kMaxBruteForceCap)
      return static_cast<int>(v);
  }
  return kDefaultMaxBruteForceN;
}

}  // namespace matchshap::config
