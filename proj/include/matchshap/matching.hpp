#pragma once

// The coalition value oracle: exact maximum-weight matching, coalition
// values v(S), perfect-matchability tests, and augmenting-path machinery
// (Berge's lemma) for unweighted graphs.
//
// Exactness is the contract everywhere. Small instances are served by a
// bitmask dynamic program over vertex subsets; unweighted instances of any
// size also have a polynomial augmenting-path (blossom) route. Weighted
// instances beyond the dense-table threshold fall back to memoized
// recursion over vertex subsets.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "matchshap/graph_core.hpp"

namespace matchshap {

// Pairwise vertex-disjoint set of edges of a specific graph.
class Matching {
 public:
  Matching() = default;

  Matching(const WeightedGraph& g, std::vector<std::pair<int, int>> edges) : n_(g.vertex_count()) {
    for (auto& [u, v] : edges) {
      if (u > v) std::swap(u, v);
      if (!g.has_edge(u, v)) throw std::invalid_argument("matching edge not present in the graph");
    }
    std::sort(edges.begin(), edges.end());
    edges_ = std::move(edges);
    std::vector<char> touched(static_cast<std::size_t>(n_), 0);
    for (auto [u, v] : edges_) {
      if (touched[static_cast<std::size_t>(u)] || touched[static_cast<std::size_t>(v)])
        throw std::invalid_argument("matching edges share a vertex");
      touched[static_cast<std::size_t>(u)] = touched[static_cast<std::size_t>(v)] = 1;
    }
  }

  static Matching empty_for(const WeightedGraph& g) { return Matching(g, {}); }

  int vertex_count() const { return n_; }
  int size() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  // mate[v] = partner of v, or -1 if exposed.
  std::vector<int> mates() const {
    std::vector<int> mate(static_cast<std::size_t>(n_), -1);
    for (auto [u, v] : edges_) {
      mate[static_cast<std::size_t>(u)] = v;
      mate[static_cast<std::size_t>(v)] = u;
    }
    return mate;
  }

  bool covers(int v) const {
    for (auto [a, b] : edges_)
      if (a == v || b == v) return true;
    return false;
  }

  Rational total_weight(const WeightedGraph& g) const {
    Rational sum = 0;
    for (auto [u, v] : edges_) sum += g.edge_weight(u, v);
    return sum;
  }

  friend bool operator==(const Matching& a, const Matching& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
};

namespace detail {

inline std::vector<std::vector<int>> adjacency_lists(const WeightedGraph& g) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.vertex_count()));
  for (int v = 0; v < g.vertex_count(); ++v)
    for (const auto& [w, wt] : g.incident(v)) adj[static_cast<std::size_t>(v)].push_back(w);
  return adj;
}

// One augmenting-path search with blossom contraction, rooted at an exposed
// vertex. `mate` is read-only. Returns the path root..leaf (both endpoints
// exposed, edges alternating unmatched/matched/...), or empty if none
// exists. When `alive` is given, vertices with alive[v] == 0 are ignored.
inline std::vector<int> blossom_augmenting_path(const std::vector<std::vector<int>>& adj,
                                                const std::vector<int>& mate, int root,
                                                const std::vector<char>* alive = nullptr) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<int> base(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) base[static_cast<std::size_t>(i)] = i;
  std::vector<char> used(static_cast<std::size_t>(n), 0), in_blossom(static_cast<std::size_t>(n), 0);
  std::deque<int> queue{root};
  used[static_cast<std::size_t>(root)] = 1;

  auto lowest_common_base = [&](int a, int b) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int v = a;;) {
      v = base[static_cast<std::size_t>(v)];
      seen[static_cast<std::size_t>(v)] = 1;
      if (mate[static_cast<std::size_t>(v)] == -1) break;
      v = parent[static_cast<std::size_t>(mate[static_cast<std::size_t>(v)])];
    }
    for (int v = b;;) {
      v = base[static_cast<std::size_t>(v)];
      if (seen[static_cast<std::size_t>(v)]) return v;
      v = parent[static_cast<std::size_t>(mate[static_cast<std::size_t>(v)])];
    }
  };
  auto mark_path = [&](int v, int stop_base, int child) {
    while (base[static_cast<std::size_t>(v)] != stop_base) {
      in_blossom[static_cast<std::size_t>(base[static_cast<std::size_t>(v)])] = 1;
      in_blossom[static_cast<std::size_t>(base[static_cast<std::size_t>(mate[static_cast<std::size_t>(v)])])] = 1;
      parent[static_cast<std::size_t>(v)] = child;
      child = mate[static_cast<std::size_t>(v)];
      v = parent[static_cast<std::size_t>(child)];
    }
  };

  int finish = -1;
  while (!queue.empty() && finish == -1) {
    int v = queue.front();
    queue.pop_front();
    for (int to : adj[static_cast<std::size_t>(v)]) {
      if (alive && !(*alive)[static_cast<std::size_t>(to)]) continue;
      if (base[static_cast<std::size_t>(v)] == base[static_cast<std::size_t>(to)] ||
          mate[static_cast<std::size_t>(v)] == to)
        continue;
      if (to == root || (mate[static_cast<std::size_t>(to)] != -1 &&
                         parent[static_cast<std::size_t>(mate[static_cast<std::size_t>(to)])] != -1)) {
        // Odd cycle: contract the blossom and re-scan its vertices as outer.
        int cur = lowest_common_base(v, to);
        std::fill(in_blossom.begin(), in_blossom.end(), 0);
        mark_path(v, cur, to);
        mark_path(to, cur, v);
        for (int i = 0; i < n; ++i) {
          if (in_blossom[static_cast<std::size_t>(base[static_cast<std::size_t>(i)])]) {
            base[static_cast<std::size_t>(i)] = cur;
            if (!used[static_cast<std::size_t>(i)]) {
              used[static_cast<std::size_t>(i)] = 1;
              queue.push_back(i);
            }
          }
        }
      } else if (parent[static_cast<std::size_t>(to)] == -1) {
        parent[static_cast<std::size_t>(to)] = v;
        if (mate[static_cast<std::size_t>(to)] == -1) {
          finish = to;
          break;
        }
        used[static_cast<std::size_t>(mate[static_cast<std::size_t>(to)])] = 1;
        queue.push_back(mate[static_cast<std::size_t>(to)]);
      }
    }
  }
  if (finish == -1) return {};

  std::vector<int> path{finish};
  for (int v = finish;;) {
    int pv = parent[static_cast<std::size_t>(v)];
    path.push_back(pv);
    if (pv == root) break;
    v = mate[static_cast<std::size_t>(pv)];
    path.push_back(v);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

inline void flip_along(std::vector<int>& mate, const std::vector<int>& path) {
  for (std::size_t j = 0; j + 1 < path.size(); j += 2) {
    mate[static_cast<std::size_t>(path[j])] = path[j + 1];
    mate[static_cast<std::size_t>(path[j + 1])] = path[j];
  }
}

// Deterministic maximum-cardinality matching: greedy seed, then one
// augmenting search per remaining exposed vertex in ascending order.
inline std::vector<int> max_cardinality_mates(const std::vector<std::vector<int>>& adj,
                                              const std::vector<char>* alive = nullptr) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> mate(static_cast<std::size_t>(n), -1);
  auto is_alive = [&](int v) { return !alive || (*alive)[static_cast<std::size_t>(v)]; };
  for (int v = 0; v < n; ++v) {
    if (!is_alive(v) || mate[static_cast<std::size_t>(v)] != -1) continue;
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (is_alive(w) && mate[static_cast<std::size_t>(w)] == -1) {
        mate[static_cast<std::size_t>(v)] = w;
        mate[static_cast<std::size_t>(w)] = v;
        break;
      }
    }
  }
  for (int root = 0; root < n; ++root) {
    if (!is_alive(root) || mate[static_cast<std::size_t>(root)] != -1) continue;
    auto path = blossom_augmenting_path(adj, mate, root, alive);
    if (!path.empty()) flip_along(mate, path);
  }
  return mate;
}

}  // namespace detail

// --- subset value oracle -----------------------------------------------

// Exact values of induced-subgraph matchings, memoized per coalition. One
// oracle per graph, shared via WeightedGraph::cached; lookups are
// thread-safe.
class MatchingOracle {
 public:
  explicit MatchingOracle(const WeightedGraph& g) : n_(g.vertex_count()), unweighted_(g.is_unweighted()) {
    if (n_ > config::kCoalitionMaxVertices)
      throw CapabilityError("subset value oracle supports at most " +
                            std::to_string(config::kCoalitionMaxVertices) + " vertices");
    adj_.reserve(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) adj_.push_back(g.neighbor_mask(v));
    if (!unweighted_) {
      wadj_.assign(static_cast<std::size_t>(n_), {});
      for (int v = 0; v < n_; ++v) wadj_[static_cast<std::size_t>(v)] = g.incident(v);
    }
  }

  int vertex_count() const { return n_; }
  bool unweighted() const { return unweighted_; }

  std::uint64_t full_mask() const {
    return n_ == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n_) - 1);
  }

  // Maximum matching cardinality of the subgraph induced by `mask`.
  int cardinality(std::uint64_t mask) const {
    if (n_ <= config::kDenseCardinalityMaxN) {
      std::call_once(card_once_, [&] { build_cardinality_table(); });
      return card_table_[mask];
    }
    std::scoped_lock lock(memo_mutex_);
    if (card_memo_.size() > kMemoCap) card_memo_.clear();
    return cardinality_rec(mask);
  }

  // Maximum matching weight of the subgraph induced by `mask`.
  Rational value(std::uint64_t mask) const {
    if (unweighted_) return Rational(cardinality(mask));
    if (n_ <= config::kDenseValueMaxN) {
      std::call_once(value_once_, [&] { build_value_table(); });
      return value_table_[mask];
    }
    std::scoped_lock lock(memo_mutex_);
    if (value_memo_.size() > kMemoCap) value_memo_.clear();
    return value_rec(mask);
  }

  bool perfectly_matchable(std::uint64_t mask) const {
    int k = std::popcount(mask);
    return k % 2 == 0 && cardinality(mask) == k / 2;
  }

 private:
  static constexpr std::size_t kMemoCap = std::size_t{1} << 22;

  void build_cardinality_table() const {
    card_table_.assign(std::size_t{1} << n_, 0);
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n_); ++mask) {
      int u = std::countr_zero(mask);
      std::uint64_t rest = mask & (mask - 1);  // mask without u
      std::uint8_t best = card_table_[rest];
      for (std::uint64_t nb = adj_[static_cast<std::size_t>(u)] & rest; nb != 0; nb &= nb - 1) {
        int w = std::countr_zero(nb);
        std::uint8_t cand =
            static_cast<std::uint8_t>(1 + card_table_[rest & ~(std::uint64_t{1} << w)]);
        if (cand > best) best = cand;
      }
      card_table_[mask] = best;
    }
  }

  void build_value_table() const {
    value_table_.assign(std::size_t{1} << n_, Rational(0));
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n_); ++mask) {
      int u = std::countr_zero(mask);
      std::uint64_t rest = mask & (mask - 1);
      Rational best = value_table_[rest];
      for (const auto& [w, wt] : wadj_[static_cast<std::size_t>(u)]) {
        if (!((rest >> w) & 1u)) continue;
        Rational cand = wt + value_table_[rest & ~(std::uint64_t{1} << w)];
        if (cand > best) best = cand;
      }
      value_table_[mask] = best;
    }
  }

  int cardinality_rec(std::uint64_t mask) const {
    if (mask == 0) return 0;
    if (auto it = card_memo_.find(mask); it != card_memo_.end()) return it->second;
    int u = std::countr_zero(mask);
    std::uint64_t rest = mask & (mask - 1);
    int best = cardinality_rec(rest);
    for (std::uint64_t nb = adj_[static_cast<std::size_t>(u)] & rest; nb != 0; nb &= nb - 1) {
      int w = std::countr_zero(nb);
      best = std::max(best, 1 + cardinality_rec(rest & ~(std::uint64_t{1} << w)));
    }
    card_memo_.emplace(mask, best);
    return best;
  }

  Rational value_rec(std::uint64_t mask) const {
    if (mask == 0) return Rational(0);
    if (auto it = value_memo_.find(mask); it != value_memo_.end()) return it->second;
    int u = std::countr_zero(mask);
    std::uint64_t rest = mask & (mask - 1);
    Rational best = value_rec(rest);
    for (const auto& [w, wt] : wadj_[static_cast<std::size_t>(u)]) {
      if (!((rest >> w) & 1u)) continue;
      Rational cand = wt + value_rec(rest & ~(std::uint64_t{1} << w));
      if (cand > best) best = cand;
    }
    value_memo_.emplace(mask, best);
    return best;
  }

  int n_;
  bool unweighted_;
  std::vector<std::uint64_t> adj_;
  std::vector<std::vector<std::pair<int, Rational>>> wadj_;

  mutable std::once_flag card_once_;
  mutable std::vector<std::uint8_t> card_table_;
  mutable std::once_flag value_once_;
  mutable std::vector<Rational> value_table_;
  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<std::uint64_t, int> card_memo_;
  mutable std::unordered_map<std::uint64_t, Rational> value_memo_;
};

inline const MatchingOracle& value_oracle(const WeightedGraph& g) {
  return g.cached<MatchingOracle>([&] { return std::make_shared<MatchingOracle>(g); });
}

// --- public operations --------------------------------------------------

struct MaxWeightMatchingResult {
  Matching matching;
  Rational total_weight;
};

// v(S): maximum matching weight of the subgraph induced by s.
inline Rational coalition_value(const WeightedGraph& g, const Coalition& s) {
  if (s.universe_size() != g.vertex_count())
    throw std::invalid_argument("coalition universe does not match the graph");
  return value_oracle(g).value(s.mask());
}

// True iff some matching of the induced subgraph covers every vertex of s.
// The empty coalition counts as perfectly matchable.
inline bool is_perfectly_matchable(const WeightedGraph& g, const Coalition& s) {
  if (s.universe_size() != g.vertex_count())
    throw std::invalid_argument("coalition universe does not match the graph");
  if (s.size() % 2 != 0) return false;
  if (s.empty_set()) return true;
  // Polynomial route: augmenting-path search on the induced subgraph.
  std::vector<char> alive(static_cast<std::size_t>(g.vertex_count()), 0);
  for (int v : s.members()) alive[static_cast<std::size_t>(v)] = 1;
  auto adj = detail::adjacency_lists(g);
  auto mate = detail::max_cardinality_mates(adj, &alive);
  for (int v : s.members())
    if (mate[static_cast<std::size_t>(v)] == -1) return false;
  return true;
}

// Alternating path between two exposed vertices, if one exists. Augmenting
// along it yields a matching with one more edge. The graph is treated as
// unweighted.
inline std::optional<std::vector<int>> find_augmenting_path(const WeightedGraph& g, const Matching& m) {
  if (m.vertex_count() != g.vertex_count())
    throw std::invalid_argument("matching does not belong to the graph");
  auto adj = detail::adjacency_lists(g);
  auto mate = m.mates();
  for (int root = 0; root < g.vertex_count(); ++root) {
    if (mate[static_cast<std::size_t>(root)] != -1) continue;
    auto path = detail::blossom_augmenting_path(adj, mate, root);
    if (!path.empty()) return path;
  }
  return std::nullopt;
}

// Symmetric difference of m with the edges of an augmenting path.
inline Matching augment_along(const WeightedGraph& g, const Matching& m, const std::vector<int>& path) {
  if (path.size() < 2 || path.size() % 2 != 0)
    throw std::invalid_argument("augmenting path needs an even number of vertices");
  auto mate = m.mates();
  if (mate[static_cast<std::size_t>(path.front())] != -1 || mate[static_cast<std::size_t>(path.back())] != -1)
    throw std::invalid_argument("augmenting path endpoints must be exposed");
  std::vector<std::pair<int, int>> edges(m.edges().begin(), m.edges().end());
  auto toggle = [&](int u, int v) {
    if (u > v) std::swap(u, v);
    auto it = std::find(edges.begin(), edges.end(), std::pair(u, v));
    if (it != edges.end())
      edges.erase(it);
    else
      edges.emplace_back(u, v);
  };
  for (std::size_t j = 0; j + 1 < path.size(); ++j) toggle(path[j], path[j + 1]);
  return Matching(g, std::move(edges));
}

// Maximum matching weight of the whole graph (value only, no witness).
inline Rational max_matching_value(const WeightedGraph& g) {
  const int n = g.vertex_count();
  if (n <= config::kCoalitionMaxVertices) {
    const auto& oracle = value_oracle(g);
    return oracle.value(oracle.full_mask());
  }
  if (!g.is_unweighted())
    throw CapabilityError("exact weighted matching supports at most " +
                          std::to_string(config::kCoalitionMaxVertices) + " vertices");
  auto adj = detail::adjacency_lists(g);
  auto mate = detail::max_cardinality_mates(adj);
  int covered = 0;
  for (int v = 0; v < n; ++v)
    if (mate[static_cast<std::size_t>(v)] != -1) ++covered;
  return Rational(covered / 2);
}

// Exact maximum-weight matching. The value is unique; ties among optimal
// matchings are broken by the lexicographically smallest edge set so the
// witness is stable.
inline MaxWeightMatchingResult max_weight_matching(const WeightedGraph& g) {
  const int n = g.vertex_count();

  if (n > config::kCoalitionMaxVertices) {
    if (!g.is_unweighted())
      throw CapabilityError("exact weighted matching supports at most " +
                            std::to_string(config::kCoalitionMaxVertices) + " vertices");
    // Cardinality route for large unweighted graphs.
    auto adj = detail::adjacency_lists(g);
    std::vector<char> alive(static_cast<std::size_t>(n), 1);
    auto card_without = [&](const std::vector<char>& a) {
      auto mate = detail::max_cardinality_mates(adj, &a);
      int c = 0;
      for (int v = 0; v < n; ++v)
        if (a[static_cast<std::size_t>(v)] && mate[static_cast<std::size_t>(v)] != -1) ++c;
      return c / 2;
    };
    const int total = card_without(alive);
    std::vector<std::pair<int, int>> chosen;
    for (const auto& e : g.edges()) {
      if (!alive[static_cast<std::size_t>(e.u)] || !alive[static_cast<std::size_t>(e.v)]) continue;
      alive[static_cast<std::size_t>(e.u)] = alive[static_cast<std::size_t>(e.v)] = 0;
      if (static_cast<int>(chosen.size()) + 1 + card_without(alive) == total) {
        chosen.emplace_back(e.u, e.v);
      } else {
        alive[static_cast<std::size_t>(e.u)] = alive[static_cast<std::size_t>(e.v)] = 1;
      }
    }
    return {Matching(g, std::move(chosen)), Rational(total)};
  }

  const auto& oracle = value_oracle(g);
  const std::uint64_t full = oracle.full_mask();
  const Rational total = oracle.value(full);
  std::vector<std::pair<int, int>> chosen;
  Rational chosen_weight = 0;
  std::uint64_t used = 0;
  for (const auto& e : g.edges()) {
    std::uint64_t ends = (std::uint64_t{1} << e.u) | (std::uint64_t{1} << e.v);
    if (used & ends) continue;
    if (chosen_weight + e.weight + oracle.value(full & ~(used | ends)) == total) {
      chosen.emplace_back(e.u, e.v);
      chosen_weight += e.weight;
      used |= ends;
    }
  }
  return {Matching(g, std::move(chosen)), total};
}

}  // namespace matchshap
