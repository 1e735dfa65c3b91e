#pragma once

// Exact Shapley values of matching games: the subset-sum formula, the
// permutation test oracle, pivotal-count aggregation, zero detection, and
// component decomposition.

#include <cstdint>
#include <functional>
#include <span>
#include <thread>
#include <vector>

#include "matchshap/matching.hpp"

namespace matchshap {

// Normalized Shapley values, one per vertex. Sums to v(N); all entries are
// nonnegative for matching games.
struct ShapleyVector {
  std::vector<Rational> values;

  int size() const { return static_cast<int>(values.size()); }
  const Rational& operator[](int i) const { return values.at(static_cast<std::size_t>(i)); }
  Rational sum() const {
    Rational s = 0;
    for (const auto& v : values) s += v;
    return s;
  }
  friend bool operator==(const ShapleyVector& a, const ShapleyVector& b) { return a.values == b.values; }
};

// Raw Shapley values: n! times the normalized ones. For unweighted games
// each entry is the integer count of pivotal permutations.
struct RawShapleyVector {
  std::vector<Rational> values;

  int size() const { return static_cast<int>(values.size()); }
  const Rational& operator[](int i) const { return values.at(static_cast<std::size_t>(i)); }
  friend bool operator==(const RawShapleyVector& a, const RawShapleyVector& b) { return a.values == b.values; }
};

inline RawShapleyVector to_raw(const ShapleyVector& phi) {
  const BigInt scale = factorial(static_cast<unsigned long>(phi.size()));
  RawShapleyVector raw;
  raw.values.reserve(phi.values.size());
  for (const auto& v : phi.values) raw.values.push_back(v * Rational(scale));
  return raw;
}

inline ShapleyVector to_normalized(const RawShapleyVector& kappa) {
  const BigInt scale = factorial(static_cast<unsigned long>(kappa.size()));
  ShapleyVector phi;
  phi.values.reserve(kappa.values.size());
  for (const auto& v : kappa.values) phi.values.push_back(v / Rational(scale));
  return phi;
}

// True iff vertex i has Shapley value zero, i.e. iff it is isolated.
// Linear time in |E| (the degree is precomputed here).
inline bool is_zero_shapley(const WeightedGraph& g, int vertex) { return g.degree(vertex) == 0; }

// Pivotality of player i for coalition s in an unweighted game:
// v(s + i) = v(s) + 1.
inline bool is_pivotal(const WeightedGraph& g, int player, const Coalition& s) {
  if (!g.is_unweighted()) throw std::invalid_argument("pivotality is defined for unweighted games");
  if (s.universe_size() != g.vertex_count())
    throw std::invalid_argument("coalition universe does not match the graph");
  if (s.contains(player)) throw std::invalid_argument("player must not be in the coalition");
  const auto& oracle = value_oracle(g);
  return oracle.cardinality(s.with(player).mask()) == oracle.cardinality(s.mask()) + 1;
}

// phi_i from per-size pivotal coalition counts (unweighted games):
// (1/n!) * sum_s s! (n-s-1)! eta[s]. eta is indexed by coalition size s,
// entries beyond n-1 must be absent.
inline Rational shapley_from_pivotal_counts(std::span<const BigInt> eta_by_size, int n) {
  if (static_cast<int>(eta_by_size.size()) > n)
    throw std::invalid_argument("pivotal-count table longer than the player count allows");
  FactorialTable fact(n);
  BigInt kappa = 0;
  for (int s = 0; s < static_cast<int>(eta_by_size.size()); ++s)
    kappa += fact[s] * fact[n - s - 1] * eta_by_size[static_cast<std::size_t>(s)];
  return make_rational(kappa, fact[n]);
}

namespace detail {

inline void check_brute_bound(const WeightedGraph& g, int max_n) {
  if (g.vertex_count() > max_n)
    throw CapabilityError("graph has " + std::to_string(g.vertex_count()) +
                          " vertices, exceeding the exact brute-force bound of " + std::to_string(max_n) +
                          "; the approx command (FPRAS) handles larger instances");
}

// Raw value of one player by direct summation over subsets of N \ {i}.
// Contributions are bucketed by coalition size so the big-integer factorial
// products are applied once per size.
inline Rational raw_single(const MatchingOracle& oracle, const FactorialTable& fact, int player) {
  const int n = oracle.vertex_count();
  const std::uint64_t pbit = std::uint64_t{1} << player;
  const std::uint64_t others = oracle.full_mask() & ~pbit;
  if (oracle.unweighted()) {
    std::vector<std::uint64_t> eta(static_cast<std::size_t>(n), 0);
    std::uint64_t sub = others;
    for (;;) {  // all submasks of `others`, descending
      if (oracle.cardinality(sub | pbit) > oracle.cardinality(sub))
        ++eta[static_cast<std::size_t>(std::popcount(sub))];
      if (sub == 0) break;
      sub = (sub - 1) & others;
    }
    BigInt kappa = 0;
    for (int s = 0; s < n; ++s)
      if (eta[static_cast<std::size_t>(s)] != 0)
        kappa += fact[s] * fact[n - s - 1] * BigInt(static_cast<unsigned long>(eta[static_cast<std::size_t>(s)]));
    return Rational(kappa);
  }
  std::vector<Rational> size_sums(static_cast<std::size_t>(n), Rational(0));
  std::uint64_t sub = others;
  for (;;) {
    size_sums[static_cast<std::size_t>(std::popcount(sub))] +=
        oracle.value(sub | pbit) - oracle.value(sub);
    if (sub == 0) break;
    sub = (sub - 1) & others;
  }
  Rational kappa = 0;
  for (int s = 0; s < n; ++s)
    kappa += Rational(fact[s] * fact[n - s - 1]) * size_sums[static_cast<std::size_t>(s)];
  return kappa;
}

}  // namespace detail

// kappa_i for a single player, by brute force over all coalitions.
inline Rational raw_shapley_single_brute_force(const WeightedGraph& g, int player,
                                               int max_n = config::max_brute_force_n()) {
  detail::check_brute_bound(g, max_n);
  if (player < 0 || player >= g.vertex_count()) throw std::invalid_argument("player out of range");
  FactorialTable fact(g.vertex_count());
  return detail::raw_single(value_oracle(g), fact, player);
}

// Exact Shapley vector by summing marginal contributions over all 2^(n-1)
// coalitions per player. Players are independent and may be processed in
// parallel; results are identical for any thread count.
inline ShapleyVector shapley_brute_force(const WeightedGraph& g, int max_n = config::max_brute_force_n(),
                                         int threads = 1) {
  detail::check_brute_bound(g, max_n);
  const int n = g.vertex_count();
  const auto& oracle = value_oracle(g);
  FactorialTable fact(n);
  std::vector<Rational> kappa(static_cast<std::size_t>(n), Rational(0));
  if (n > 0 && threads > 1) {
    oracle.value(oracle.full_mask());  // force table construction once
    const int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += workers)
          kappa[static_cast<std::size_t>(i)] = detail::raw_single(oracle, fact, i);
      });
    }
    for (auto& t : pool) t.join();
  } else {
    for (int i = 0; i < n; ++i) kappa[static_cast<std::size_t>(i)] = detail::raw_single(oracle, fact, i);
  }
  ShapleyVector phi;
  phi.values.reserve(static_cast<std::size_t>(n));
  for (const auto& k : kappa) phi.values.push_back(k / Rational(fact[n]));
  return phi;
}

// Test oracle: enumerate all n! player orderings and average marginal
// contributions. Output contract identical to shapley_brute_force.
inline ShapleyVector shapley_permutation_oracle(const WeightedGraph& g) {
  const int n = g.vertex_count();
  if (n > config::kPermutationOracleMaxN)
    throw CapabilityError("permutation oracle is limited to " +
                          std::to_string(config::kPermutationOracleMaxN) + " vertices (n! blowup)");
  const auto& oracle = value_oracle(g);
  FactorialTable fact(n);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  if (g.is_unweighted()) {
    std::vector<std::uint64_t> pivotal(static_cast<std::size_t>(n), 0);
    do {
      std::uint64_t prefix = 0;
      int prev = 0;
      for (int pos = 0; pos < n; ++pos) {
        int p = order[static_cast<std::size_t>(pos)];
        prefix |= std::uint64_t{1} << p;
        int cur = oracle.cardinality(prefix);
        if (cur > prev) ++pivotal[static_cast<std::size_t>(p)];
        prev = cur;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    ShapleyVector phi;
    phi.values.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      phi.values.push_back(make_rational(BigInt(static_cast<unsigned long>(pivotal[static_cast<std::size_t>(i)])),
                                         fact[n]));
    return phi;
  }

  std::vector<Rational> sums(static_cast<std::size_t>(n), Rational(0));
  do {
    std::uint64_t prefix = 0;
    Rational prev = 0;
    for (int pos = 0; pos < n; ++pos) {
      int p = order[static_cast<std::size_t>(pos)];
      prefix |= std::uint64_t{1} << p;
      Rational cur = oracle.value(prefix);
      sums[static_cast<std::size_t>(p)] += cur - prev;
      prev = cur;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  ShapleyVector phi;
  phi.values.reserve(static_cast<std::size_t>(n));
  for (const auto& s : sums) phi.values.push_back(s / Rational(fact[n]));
  return phi;
}

// Shapley values of a disconnected game equal the per-component values on
// the induced subgraphs. `solver` must produce exact vectors on connected
// graphs.
inline ShapleyVector shapley_by_components(
    const WeightedGraph& g, const std::function<ShapleyVector(const WeightedGraph&)>& solver) {
  ShapleyVector phi;
  phi.values.assign(static_cast<std::size_t>(g.vertex_count()), Rational(0));
  for (const auto& block : connected_components(g)) {
    auto sub = induced_subgraph(g, Coalition::of(block, g.vertex_count()));
    ShapleyVector local = solver(sub);
    if (local.size() != static_cast<int>(block.size()))
      throw Error("component solver returned a vector of the wrong length");
    for (std::size_t j = 0; j < block.size(); ++j)
      phi.values[static_cast<std::size_t>(block[j])] = local.values[j];
  }
  return phi;
}

}  // namespace matchshap
