#pragma once

// Monte-Carlo Shapley estimation for matching games: uniform permutation
// sampling with the 4 n^2 (n-1)^2 / eps^2 sample bound, the zero-value fast
// path for isolated players, and median-based confidence amplification.
//
// Randomness is counter-based: each sample index derives its own generator
// from the master seed, so results are reproducible and independent of how
// samples are distributed across worker threads. Estimates are accumulated
// exactly and converted to decimal only at output time.

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "matchshap/matching.hpp"

namespace matchshap {

// --- deterministic randomness --------------------------------------------

class SampleRng {
 public:
  explicit SampleRng(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {  // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Unbiased draw from [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
    for (;;) {
      std::uint64_t r = next();
      if (r < limit) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}
}  // namespace detail

// Independent stream for one (master seed, sample index) pair.
inline SampleRng make_sample_stream(std::uint64_t master_seed, std::uint64_t index) {
  return SampleRng(detail::mix64(master_seed ^ detail::mix64(index + 0x632BE59BD9B4E019ull)));
}

// Uniform permutation of {0, ..., n-1} via an unbiased Fisher-Yates shuffle.
inline std::vector<int> sample_permutation(int n, SampleRng& rng) {
  if (n < 0) throw std::invalid_argument("negative permutation length");
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int j = n - 1; j >= 1; --j)
    std::swap(order[static_cast<std::size_t>(j)],
              order[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(j) + 1))]);
  return order;
}

// --- sample bound and marginals --------------------------------------------

// ceil(4 n^2 (n-1)^2 / eps^2), computed exactly before the ceiling.
inline BigInt sample_count(int n, const Rational& epsilon) {
  if (n < 2) throw std::invalid_argument("sampling needs at least two players");
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  Rational exact = Rational(4 * BigInt(n) * n * BigInt(n - 1) * (n - 1)) / (epsilon * epsilon);
  BigInt q;
  mpz_cdiv_q(q.get_mpz_t(), exact.get_num_mpz_t(), exact.get_den_mpz_t());
  return q;
}

// v(p(i, sigma) + i) - v(p(i, sigma)): the marginal contribution of a
// player to the prefix of a permutation.
inline Rational marginal_contribution(const WeightedGraph& g, int player, const std::vector<int>& sigma) {
  if (static_cast<int>(sigma.size()) != g.vertex_count())
    throw std::invalid_argument("permutation length does not match the graph");
  std::uint64_t prefix = 0;
  bool found = false;
  for (int p : sigma) {
    if (p == player) {
      found = true;
      break;
    }
    prefix |= std::uint64_t{1} << p;
  }
  if (!found) throw std::invalid_argument("player does not appear in the permutation");
  const auto& oracle = value_oracle(g);
  return oracle.value(prefix | (std::uint64_t{1} << player)) - oracle.value(prefix);
}

// --- estimates ---------------------------------------------------------------

enum class EstimateMode { raw, normalized };

struct SampleEstimate {
  int player = 0;
  Rational estimate;               // exact; render with to_decimal_string
  std::uint64_t samples_used = 0;  // per (unamplified) run
  std::uint64_t runs = 1;          // median amplification width
  Rational epsilon;
  std::uint64_t seed = 0;
  EstimateMode mode = EstimateMode::raw;
};

namespace detail {

inline std::uint64_t checked_sample_count(int n, const Rational& eps) {
  BigInt m = sample_count(n, eps);
  if (!m.fits_ulong_p() || m > BigInt(std::uint64_t{1} << 40))
    throw CapabilityError("epsilon " + to_fraction_string(eps) + " asks for " + m.get_str() +
                          " samples per run; choose a larger epsilon");
  return m.get_ui();
}

// Sum of player marginals over sample indices [lo, hi). For unweighted
// graphs the marginal is 0/1, so a pivotal counter suffices.
struct MarginalSums {
  std::vector<std::uint64_t> counts;
  std::vector<Rational> sums;
};

// Per-permutation prefix walk accumulating every player's marginal.
// When `only_player` >= 0, the walk stops after that player's position.
// `oracle` may be null when the incremental route applies.
inline void accumulate_marginals(const WeightedGraph& g, const MatchingOracle* oracle,
                                 std::uint64_t seed, std::uint64_t lo, std::uint64_t hi,
                                 int only_player, MarginalSums& out) {
  const int n = g.vertex_count();
  const bool unweighted = g.is_unweighted();
  const bool incremental = unweighted && n > config::kDenseCardinalityMaxN;
  std::vector<std::vector<int>> adj;
  if (incremental) adj = adjacency_lists(g);
  std::vector<int> mate;
  std::vector<char> alive;

  for (std::uint64_t idx = lo; idx < hi; ++idx) {
    SampleRng rng = make_sample_stream(seed, idx);
    std::vector<int> sigma = sample_permutation(n, rng);
    if (incremental) {
      // Grow a maximum matching along the prefix; the marginal of each
      // added vertex is 1 exactly when an augmenting path from it exists.
      mate.assign(static_cast<std::size_t>(n), -1);
      alive.assign(static_cast<std::size_t>(n), 0);
      for (int p : sigma) {
        alive[static_cast<std::size_t>(p)] = 1;
        auto path = blossom_augmenting_path(adj, mate, p, &alive);
        if (!path.empty()) {
          flip_along(mate, path);
          if (only_player < 0 || p == only_player) ++out.counts[static_cast<std::size_t>(p)];
        }
        if (p == only_player) break;
      }
      continue;
    }
    std::uint64_t prefix = 0;
    if (unweighted) {
      int prev = 0;
      for (int p : sigma) {
        prefix |= std::uint64_t{1} << p;
        int cur = oracle->cardinality(prefix);
        if (cur > prev && (only_player < 0 || p == only_player))
          ++out.counts[static_cast<std::size_t>(p)];
        prev = cur;
        if (p == only_player) break;
      }
    } else {
      Rational prev = 0;
      for (int p : sigma) {
        prefix |= std::uint64_t{1} << p;
        Rational cur = oracle->value(prefix);
        if (only_player < 0 || p == only_player) out.sums[static_cast<std::size_t>(p)] += cur - prev;
        prev = std::move(cur);
        if (p == only_player) break;
      }
    }
  }
}

// One unamplified sampling run: raw estimates (times n!) for all players,
// or just `only_player` when >= 0.
inline std::vector<Rational> raw_run(const WeightedGraph& g, std::uint64_t seed, int only_player,
                                     std::uint64_t samples, int threads) {
  const int n = g.vertex_count();
  const bool unweighted = g.is_unweighted();
  // Large unweighted instances never touch the subset oracle (the sampler
  // grows matchings by augmenting search); weighted ones need it.
  const bool needs_oracle = !(unweighted && n > config::kDenseCardinalityMaxN);
  if (!unweighted && n > config::kCoalitionMaxVertices)
    throw CapabilityError("sampling weighted games is limited to " +
                          std::to_string(config::kCoalitionMaxVertices) + " vertices");
  const MatchingOracle* oracle = needs_oracle ? &value_oracle(g) : nullptr;

  std::vector<MarginalSums> partials;
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::uint64_t>(
                                                              samples, std::uint64_t{256}))));
  partials.resize(static_cast<std::size_t>(workers));
  for (auto& p : partials) {
    p.counts.assign(static_cast<std::size_t>(n), 0);
    p.sums.assign(static_cast<std::size_t>(n), Rational(0));
  }
  const bool dense_tables =
      oracle && n <= (unweighted ? config::kDenseCardinalityMaxN : config::kDenseValueMaxN);
  if (workers > 1) {
    if (dense_tables) oracle->value(oracle->full_mask());  // build tables once, outside the pool
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      std::uint64_t lo = samples * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
      std::uint64_t hi = samples * (static_cast<std::uint64_t>(w) + 1) / static_cast<std::uint64_t>(workers);
      pool.emplace_back([&, w, lo, hi] {
        accumulate_marginals(g, oracle, seed, lo, hi, only_player, partials[static_cast<std::size_t>(w)]);
      });
    }
    for (auto& t : pool) t.join();
  } else {
    accumulate_marginals(g, oracle, seed, 0, samples, only_player, partials[0]);
  }

  const BigInt n_fact = factorial(static_cast<unsigned long>(n));
  std::vector<Rational> estimates(static_cast<std::size_t>(n), Rational(0));
  for (int p = 0; p < n; ++p) {
    Rational sum = 0;
    for (const auto& part : partials)
      sum += unweighted ? Rational(BigInt(static_cast<unsigned long>(part.counts[static_cast<std::size_t>(p)])))
                        : part.sums[static_cast<std::size_t>(p)];
    estimates[static_cast<std::size_t>(p)] =
        sum * Rational(n_fact) / Rational(BigInt(static_cast<unsigned long>(samples)));
  }
  return estimates;
}

}  // namespace detail

// Smallest odd number of runs for a failure probability of at most delta:
// 1 when delta >= 1/4 (the base guarantee), else the smallest odd integer
// >= ceil(8 ln(1/delta)) for the standard median amplification.
inline int amplification_runs(const Rational& delta) {
  if (delta <= 0 || delta >= 1) throw std::invalid_argument("delta must lie in (0, 1)");
  if (delta >= Rational(1, 4)) return 1;
  int m = static_cast<int>(std::ceil(8.0 * std::log(1.0 / delta.get_d())));
  if (m % 2 == 0) ++m;
  return m;
}

// FPRAS for the raw Shapley value kappa_i: isolated players report exactly
// zero with zero samples; otherwise the average marginal contribution over
// ceil(4 n^2 (n-1)^2 / eps^2) uniform permutations, scaled by n!. The
// estimate lies within multiplicative (1 + eps) of kappa_i with probability
// at least 3/4.
inline SampleEstimate approx_raw_shapley(const WeightedGraph& g, int player, const Rational& eps,
                                         std::uint64_t seed, int threads = 1) {
  if (player < 0 || player >= g.vertex_count()) throw std::invalid_argument("player out of range");
  if (eps <= 0) throw std::invalid_argument("epsilon must be positive");
  SampleEstimate est;
  est.player = player;
  est.epsilon = eps;
  est.seed = seed;
  est.mode = EstimateMode::raw;
  if (is_zero_shapley(g, player)) {
    est.estimate = 0;
    est.samples_used = 0;
    est.runs = 0;
    return est;
  }
  est.samples_used = detail::checked_sample_count(g.vertex_count(), eps);
  est.estimate = detail::raw_run(g, seed, player, est.samples_used, threads)[static_cast<std::size_t>(player)];
  return est;
}

// Median-amplified FPRAS for the normalized Shapley value phi_i: the median
// of `amplification_runs(delta)` independent raw estimates, scaled by 1/n!.
// Failure probability at most delta.
inline SampleEstimate approx_shapley(const WeightedGraph& g, int player, const Rational& eps,
                                     const Rational& delta, std::uint64_t seed, int threads = 1) {
  if (player < 0 || player >= g.vertex_count()) throw std::invalid_argument("player out of range");
  if (eps <= 0) throw std::invalid_argument("epsilon must be positive");
  const int runs = amplification_runs(delta);
  SampleEstimate est;
  est.player = player;
  est.epsilon = eps;
  est.seed = seed;
  est.mode = EstimateMode::normalized;
  if (is_zero_shapley(g, player)) {
    est.estimate = 0;
    est.samples_used = 0;
    est.runs = 0;
    return est;
  }
  est.samples_used = detail::checked_sample_count(g.vertex_count(), eps);
  est.runs = static_cast<std::uint64_t>(runs);
  std::vector<Rational> medians;
  medians.reserve(static_cast<std::size_t>(runs));
  for (int r = 0; r < runs; ++r) {
    std::uint64_t run_seed = runs == 1 ? seed : detail::mix64(seed ^ detail::mix64(0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(r)));
    medians.push_back(
        detail::raw_run(g, run_seed, player, est.samples_used, threads)[static_cast<std::size_t>(player)]);
  }
  std::sort(medians.begin(), medians.end());
  est.estimate = medians[medians.size() / 2] / Rational(factorial(static_cast<unsigned long>(g.vertex_count())));
  return est;
}

// All players at once, reusing each sampled permutation for every player's
// marginal (one prefix pass per permutation). Per-player guarantees are
// unchanged: each player still sees i.i.d. uniform permutations.
inline std::vector<SampleEstimate> approx_shapley_all(const WeightedGraph& g, const Rational& eps,
                                                      const Rational& delta, std::uint64_t seed,
                                                      EstimateMode mode = EstimateMode::normalized,
                                                      int threads = 1) {
  if (eps <= 0) throw std::invalid_argument("epsilon must be positive");
  const int n = g.vertex_count();
  const int runs = amplification_runs(delta);
  const BigInt n_fact = factorial(static_cast<unsigned long>(n));

  std::vector<SampleEstimate> out(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    out[static_cast<std::size_t>(p)].player = p;
    out[static_cast<std::size_t>(p)].epsilon = eps;
    out[static_cast<std::size_t>(p)].seed = seed;
    out[static_cast<std::size_t>(p)].mode = mode;
    out[static_cast<std::size_t>(p)].estimate = 0;
    out[static_cast<std::size_t>(p)].samples_used = 0;
    out[static_cast<std::size_t>(p)].runs = 0;
  }
  bool any_active = false;
  for (int p = 0; p < n; ++p) any_active = any_active || !is_zero_shapley(g, p);
  if (!any_active || n < 2) return out;

  const std::uint64_t samples = detail::checked_sample_count(n, eps);
  std::vector<std::vector<Rational>> run_estimates;
  run_estimates.reserve(static_cast<std::size_t>(runs));
  for (int r = 0; r < runs; ++r) {
    std::uint64_t run_seed = runs == 1 ? seed : detail::mix64(seed ^ detail::mix64(0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(r)));
    run_estimates.push_back(detail::raw_run(g, run_seed, -1, samples, threads));
  }
  for (int p = 0; p < n; ++p) {
    auto& est = out[static_cast<std::size_t>(p)];
    if (is_zero_shapley(g, p)) continue;  // exact zero, zero samples
    est.samples_used = samples;
    est.runs = static_cast<std::uint64_t>(runs);
    std::vector<Rational> values;
    values.reserve(static_cast<std::size_t>(runs));
    for (const auto& run : run_estimates) values.push_back(run[static_cast<std::size_t>(p)]);
    std::sort(values.begin(), values.end());
    est.estimate = values[values.size() / 2];
    if (mode == EstimateMode::normalized) est.estimate /= Rational(n_fact);
  }
  return out;
}

}  // namespace matchshap
