#pragma once

// Polynomial-time exact Shapley algorithms: linear graphs and cycles
// (maximum degree two), and graphs with a small modular decomposition into
// cliques or cocliques via a player-type dynamic program. Also the
// automatic method dispatcher for exact computation.

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "matchshap/shapley_exact.hpp"

namespace matchshap {

// --- linear graphs and cycles -------------------------------------------

// Number of size-s coalitions for which position i (1-based) of the
// unweighted path 1-2-...-n is pivotal.
//
// Case split on which neighbors of i the coalition contains. Adding i to
// the left end of a segment raises the matching iff the segment has an even
// number of edges; joining two segments fails iff both have an odd number
// of edges; a coalition containing neither neighbor leaves i isolated.
inline BigInt eta_path(int n, int i, int s) {
  if (n < 1) throw std::invalid_argument("path needs at least one vertex");
  if (i < 1 || i > n) throw std::invalid_argument("path position out of range");
  if (s < 1 || s > n - 1) throw std::invalid_argument("coalition size out of range");

  // Count of {lo..hi} clipped to [1, n].
  auto blocked = [&](int lo, int hi) {
    lo = std::max(lo, 1);
    hi = std::min(hi, n);
    return hi >= lo ? hi - lo + 1 : 0;
  };

  BigInt total = 0;
  // Segment {i+1, ..., i+k+1} to the right of i; i-1 and i+k+2 excluded.
  for (int k = 0; k <= s - 1 && i + k + 1 <= n; k += 2)
    total += binomial(static_cast<unsigned long>(n - blocked(i - 1, i + k + 2)),
                      static_cast<unsigned long>(s - (k + 1)));
  // Segment {i-k-1, ..., i-1} to the left of i; i+1 and i-k-2 excluded.
  for (int k = 0; k <= s - 1 && i - k - 1 >= 1; k += 2)
    total += binomial(static_cast<unsigned long>(n - blocked(i - k - 2, i + 1)),
                      static_cast<unsigned long>(s - (k + 1)));
  // Segments {i-k1..i-1} and {i+1..i+k2} joined through i (k1, k2 are
  // vertex counts; both even means both have odd edge counts: not pivotal).
  for (int k1 = 1; k1 <= i - 1 && k1 < s; ++k1) {
    for (int k2 = 1; k2 <= n - i && k1 + k2 <= s; ++k2) {
      if (k1 % 2 == 0 && k2 % 2 == 0) continue;
      total += binomial(static_cast<unsigned long>(n - blocked(i - k1 - 1, i + k2 + 1)),
                        static_cast<unsigned long>(s - k1 - k2));
    }
  }
  return total;
}

// Shapley value of position i (1-based) on the unweighted path with n
// vertices. O(n^3) per size, O(n^4) total for one vertex.
inline Rational shapley_path(int n, int i) {
  if (n < 1) throw std::invalid_argument("path needs at least one vertex");
  if (i < 1 || i > n) throw std::invalid_argument("path position out of range");
  std::vector<BigInt> by_size(static_cast<std::size_t>(n), BigInt(0));
  for (int s = 1; s <= n - 1; ++s) by_size[static_cast<std::size_t>(s)] = eta_path(n, i, s);
  return shapley_from_pivotal_counts(by_size, n);
}

// Uniform Shapley value floor(n/2) / n of every vertex of the unweighted
// n-cycle (efficiency plus anonymity).
inline Rational shapley_cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle needs at least three vertices");
  return make_rational(BigInt(n / 2), BigInt(n));
}

// Exact Shapley vector for unweighted graphs of maximum degree two
// (disjoint unions of paths and cycles).
inline ShapleyVector shapley_degree_two(const WeightedGraph& g) {
  if (!g.is_unweighted())
    throw CapabilityError("degree-two method applies to unweighted graphs only");
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.degree(v) > 2)
      throw CapabilityError("degree-two method: vertex " + std::to_string(v) + " has degree " +
                            std::to_string(g.degree(v)));

  ShapleyVector phi;
  phi.values.assign(static_cast<std::size_t>(g.vertex_count()), Rational(0));
  for (const auto& block : connected_components(g)) {
    const int len = static_cast<int>(block.size());
    if (len == 1) continue;  // isolated vertex, dummy
    bool cycle = true;
    for (int v : block)
      if (g.degree(v) != 2) cycle = false;
    if (cycle) {
      Rational u = shapley_cycle(len);
      for (int v : block) phi.values[static_cast<std::size_t>(v)] = u;
      continue;
    }
    // Walk the path from its smallest endpoint.
    int start = -1;
    for (int v : block)
      if (g.degree(v) == 1) {
        start = v;
        break;
      }
    std::vector<int> order{start};
    int prev = -1, cur = start;
    while (static_cast<int>(order.size()) < len) {
      int next = -1;
      for (const auto& [w, wt] : g.incident(cur))
        if (w != prev) {
          next = w;
          break;
        }
      order.push_back(next);
      prev = cur;
      cur = next;
    }
    for (int pos = 1; pos <= len; ++pos)
      phi.values[static_cast<std::size_t>(order[static_cast<std::size_t>(pos - 1)])] = shapley_path(len, pos);
  }
  return phi;
}

// --- modular decomposition and the player-type DP ------------------------

enum class ModuleKind { clique, coclique };

// Partition of the vertex set into modules of one kind. Members of a module
// share the same outside neighbors through edges of the same weight; clique
// modules are pairwise adjacent, coclique modules pairwise non-adjacent.
struct TypePartition {
  ModuleKind kind = ModuleKind::coclique;
  std::vector<std::vector<int>> modules;  // ordered by smallest member, members ascending

  int module_count() const { return static_cast<int>(modules.size()); }
  int vertex_count() const {
    int n = 0;
    for (const auto& m : modules) n += static_cast<int>(m.size());
    return n;
  }
};

// Minimum-cardinality modular decomposition of the requested kind.
//
// Two vertices can share a coclique module iff their weighted neighbor maps
// are identical (equality already forces non-adjacency); grouping by that
// key yields the unique minimum decomposition. Clique modules are found
// through the complement, which is defined for unweighted graphs only.
inline TypePartition find_modular_decomposition(const WeightedGraph& g, ModuleKind kind) {
  if (kind == ModuleKind::clique && !g.is_unweighted())
    throw CapabilityError("clique modular decomposition requires an unweighted graph");
  const WeightedGraph& base = g;
  WeightedGraph comp;
  if (kind == ModuleKind::clique) comp = complement(g);
  const WeightedGraph& view = kind == ModuleKind::clique ? comp : base;

  struct ProfileLess {
    bool operator()(const std::vector<std::pair<int, Rational>>& a,
                    const std::vector<std::pair<int, Rational>>& b) const {
      if (a.size() != b.size()) return a.size() < b.size();
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].first != b[i].first) return a[i].first < b[i].first;
        int c = cmp(a[i].second, b[i].second);
        if (c != 0) return c < 0;
      }
      return false;
    }
  };
  std::map<std::vector<std::pair<int, Rational>>, std::vector<int>, ProfileLess> groups;
  for (int v = 0; v < view.vertex_count(); ++v) groups[view.incident(v)].push_back(v);

  TypePartition part;
  part.kind = kind;
  part.modules.reserve(groups.size());
  for (auto& [profile, members] : groups) part.modules.push_back(members);
  std::sort(part.modules.begin(), part.modules.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return part;
}

// Coalition-type profile: how many members of each module a coalition takes.
using TypeProfile = std::vector<int>;
using ProfileValueOracle = std::function<Rational(const TypeProfile&)>;

// v(S) for any coalition realizing the profile, evaluated on the canonical
// realization (lowest-indexed members per module) and memoized. With
// `probe_symmetry`, a second realization (highest-indexed members) is also
// evaluated and a disagreement raises an error.
inline ProfileValueOracle make_matching_profile_oracle(const WeightedGraph& g, const TypePartition& partition,
                                                       bool probe_symmetry = false) {
  if (partition.vertex_count() != g.vertex_count())
    throw std::invalid_argument("partition does not cover the vertex set");
  struct State {
    std::map<TypeProfile, Rational> memo;
    std::mutex mutex;
  };
  auto state = std::make_shared<State>();
  return [&g, partition, probe_symmetry, state](const TypeProfile& profile) {
    if (profile.size() != partition.modules.size())
      throw std::invalid_argument("profile length does not match the partition");
    {
      std::scoped_lock lock(state->mutex);
      if (auto it = state->memo.find(profile); it != state->memo.end()) return it->second;
    }
    Coalition s = Coalition::empty(g.vertex_count());
    for (std::size_t j = 0; j < profile.size(); ++j) {
      const auto& members = partition.modules[j];
      int take = profile[j];
      if (take < 0 || take > static_cast<int>(members.size()))
        throw std::invalid_argument("profile entry out of range");
      for (int t = 0; t < take; ++t) s = s.with(members[static_cast<std::size_t>(t)]);
    }
    Rational value = coalition_value(g, s);
    if (probe_symmetry) {
      Coalition alt = Coalition::empty(g.vertex_count());
      for (std::size_t j = 0; j < profile.size(); ++j) {
        const auto& members = partition.modules[j];
        for (int t = 0; t < profile[j]; ++t)
          alt = alt.with(members[members.size() - 1 - static_cast<std::size_t>(t)]);
      }
      if (coalition_value(g, alt) != value)
        throw Error("profile value oracle is inconsistent: two realizations of one profile disagree");
    }
    std::scoped_lock lock(state->mutex);
    state->memo.emplace(profile, value);
    return value;
  };
}

// Player-type dynamic program: exact Shapley values when same-module
// players are symmetric. For a player of type t,
//   phi_t = sum over profiles s with s_t <= m_t - 1 of
//           (|s|)! (n - |s| - 1)! / n! * prod_j C(m_j - [j=t], s_j)
//           * (V(s + e_t) - V(s)),
// iterated in lexicographic profile order. Polynomial in n for a fixed
// number of modules.
inline ShapleyVector shapley_by_player_types(const ProfileValueOracle& value_of, const TypePartition& partition) {
  const int n = partition.vertex_count();
  const int k = partition.module_count();
  FactorialTable fact(n);
  std::vector<int> sizes(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) sizes[static_cast<std::size_t>(j)] = static_cast<int>(partition.modules[static_cast<std::size_t>(j)].size());

  ShapleyVector phi;
  phi.values.assign(static_cast<std::size_t>(n), Rational(0));
  for (int t = 0; t < k; ++t) {
    std::vector<int> limit(sizes);
    limit[static_cast<std::size_t>(t)] -= 1;

    Rational acc = 0;
    TypeProfile profile(static_cast<std::size_t>(k), 0);
    for (;;) {
      int total = 0;
      for (int c : profile) total += c;
      BigInt ways = 1;
      for (int j = 0; j < k; ++j)
        ways *= binomial(static_cast<unsigned long>(limit[static_cast<std::size_t>(j)]),
                         static_cast<unsigned long>(profile[static_cast<std::size_t>(j)]));
      TypeProfile with_t(profile);
      ++with_t[static_cast<std::size_t>(t)];
      acc += Rational(fact[total] * fact[n - total - 1] * ways) * (value_of(with_t) - value_of(profile));

      // next profile in lexicographic order, bounded by `limit`
      int pos = k - 1;
      while (pos >= 0 && profile[static_cast<std::size_t>(pos)] == limit[static_cast<std::size_t>(pos)]) {
        profile[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++profile[static_cast<std::size_t>(pos)];
    }
    Rational value = acc / Rational(fact[n]);
    for (int member : partition.modules[static_cast<std::size_t>(t)])
      phi.values[static_cast<std::size_t>(member)] = value;
  }
  return phi;
}

// --- automatic dispatcher -------------------------------------------------

enum class ExactMethod { isolated, degree_two, modular, brute_force };

inline const char* method_name(ExactMethod m) {
  switch (m) {
    case ExactMethod::isolated: return "isolated";
    case ExactMethod::degree_two: return "degree2";
    case ExactMethod::modular: return "modular";
    case ExactMethod::brute_force: return "bruteforce";
  }
  return "?";
}

struct ComponentMethod {
  std::vector<int> vertices;
  ExactMethod method = ExactMethod::brute_force;
};

struct AutoShapleyResult {
  ShapleyVector shapley;
  std::vector<ComponentMethod> components;
};

struct AutoOptions {
  int max_brute_n = config::max_brute_force_n();
  int modular_k_bound = config::kDefaultModularKBound;
  int threads = 1;
};

// Splits into connected components, then per component picks, in order: the
// isolated-vertex fast path, the degree-two closed forms, the player-type
// DP when a small (co)clique decomposition exists, and brute force within
// the size bound. Never falls back to approximation.
inline AutoShapleyResult shapley_auto(const WeightedGraph& g, const AutoOptions& options = {}) {
  AutoShapleyResult result;
  result.shapley.values.assign(static_cast<std::size_t>(g.vertex_count()), Rational(0));

  // Degree-two graphs of any size have closed forms with no coalition
  // machinery; handle them before the 64-vertex subset routes.
  if (g.is_unweighted()) {
    bool low_degree = true;
    for (int v = 0; v < g.vertex_count() && low_degree; ++v) low_degree = g.degree(v) <= 2;
    if (low_degree) {
      result.shapley = shapley_degree_two(g);
      for (const auto& block : connected_components(g))
        result.components.push_back(
            {block, block.size() == 1 ? ExactMethod::isolated : ExactMethod::degree_two});
      return result;
    }
  }
  if (g.vertex_count() > config::kCoalitionMaxVertices)
    throw CapabilityError("instance too large for exact computation: " + std::to_string(g.vertex_count()) +
                          " vertices exceeds the " + std::to_string(config::kCoalitionMaxVertices) +
                          "-vertex coalition width; use the approx command (FPRAS)");

  for (const auto& block : connected_components(g)) {
    auto sub = induced_subgraph(g, Coalition::of(block, g.vertex_count()));
    const int len = static_cast<int>(block.size());

    ExactMethod method;
    ShapleyVector local;
    if (len == 1) {
      method = ExactMethod::isolated;
      local.values.assign(1, Rational(0));
    } else {
      int max_degree = 0;
      for (int v = 0; v < sub.vertex_count(); ++v) max_degree = std::max(max_degree, sub.degree(v));
      if (sub.is_unweighted() && max_degree <= 2) {
        method = ExactMethod::degree_two;
        local = shapley_degree_two(sub);
      } else {
        TypePartition part = find_modular_decomposition(sub, ModuleKind::coclique);
        if (sub.is_unweighted()) {
          TypePartition cliques = find_modular_decomposition(sub, ModuleKind::clique);
          if (cliques.module_count() < part.module_count()) part = cliques;
        }
        if (part.module_count() <= options.modular_k_bound) {
          method = ExactMethod::modular;
          local = shapley_by_player_types(make_matching_profile_oracle(sub, part), part);
        } else if (len <= options.max_brute_n) {
          method = ExactMethod::brute_force;
          local = shapley_brute_force(sub, options.max_brute_n, options.threads);
        } else {
          throw CapabilityError(
              "instance too large for exact computation: a component with " + std::to_string(len) +
              " vertices admits no polynomial method here (smallest modular decomposition has " +
              std::to_string(part.module_count()) + " modules) and exceeds the brute-force bound of " +
              std::to_string(options.max_brute_n) + "; use the approx command (FPRAS)");
        }
      }
    }
    for (std::size_t j = 0; j < block.size(); ++j)
      result.shapley.values[static_cast<std::size_t>(block[j])] = local.values[j];
    result.components.push_back({block, method});
  }
  return result;
}

}  // namespace matchshap
