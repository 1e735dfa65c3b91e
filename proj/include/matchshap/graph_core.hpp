#pragma once

// Weighted undirected graphs with exact rational edge weights, vertex-subset
// coalitions with bitset semantics, the text edge-list format, and basic
// structural queries (components, complement, induced subgraphs).
//
// Graphs are immutable after construction and safe to read concurrently.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "matchshap/config.hpp"
#include "matchshap/errors.hpp"
#include "matchshap/rational.hpp"

namespace matchshap {

struct WeightedEdge {
  int u = 0;
  int v = 0;
  Rational weight = 1;

  friend bool operator==(const WeightedEdge& a, const WeightedEdge& b) {
    return a.u == b.u && a.v == b.v && a.weight == b.weight;
  }
};

// A subset of {0, ..., universe_size - 1} stored as a 64-bit mask.
class Coalition {
 public:
  Coalition() = default;

  static Coalition empty(int universe_size) { return Coalition(0, check_universe(universe_size)); }

  static Coalition full(int universe_size) {
    check_universe(universe_size);
    return Coalition(universe_size == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << universe_size) - 1),
                     universe_size);
  }

  static Coalition from_mask(std::uint64_t mask, int universe_size) {
    check_universe(universe_size);
    if (universe_size < 64 && (mask >> universe_size) != 0)
      throw std::invalid_argument("coalition mask has members outside the universe");
    return Coalition(mask, universe_size);
  }

  static Coalition of(const std::vector<int>& vertices, int universe_size) {
    Coalition c = empty(universe_size);
    for (int v : vertices) c = c.with(v);
    return c;
  }

  int universe_size() const { return universe_; }
  std::uint64_t mask() const { return bits_; }
  int size() const { return std::popcount(bits_); }
  bool empty_set() const { return bits_ == 0; }

  bool contains(int v) const {
    check_member(v);
    return (bits_ >> v) & 1u;
  }
  Coalition with(int v) const {
    check_member(v);
    return Coalition(bits_ | (std::uint64_t{1} << v), universe_);
  }
  Coalition without(int v) const {
    check_member(v);
    return Coalition(bits_ & ~(std::uint64_t{1} << v), universe_);
  }

  // Ascending vertex ids.
  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint64_t m = bits_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }

  friend bool operator==(const Coalition& a, const Coalition& b) {
    return a.bits_ == b.bits_ && a.universe_ == b.universe_;
  }

 private:
  Coalition(std::uint64_t bits, int universe) : bits_(bits), universe_(universe) {}

  static int check_universe(int n) {
    if (n < 0 || n > config::kCoalitionMaxVertices)
      throw CapabilityError("coalition universe of " + std::to_string(n) + " vertices exceeds the " +
                            std::to_string(config::kCoalitionMaxVertices) + "-bit coalition width");
    return n;
  }
  void check_member(int v) const {
    if (v < 0 || v >= universe_) throw std::invalid_argument("vertex id outside coalition universe");
  }

  std::uint64_t bits_ = 0;
  int universe_ = 0;
};

namespace detail {
// Per-graph slot for a lazily built helper (the matching value oracle).
// Shared across copies of the graph, so cached values follow graph identity.
struct GraphAux {
  std::once_flag once;
  std::shared_ptr<void> payload;
};
}  // namespace detail

class WeightedGraph {
 public:
  WeightedGraph() : aux_(std::make_shared<detail::GraphAux>()) {}

  WeightedGraph(int vertex_count, std::vector<WeightedEdge> edges)
      : n_(vertex_count), edges_(std::move(edges)), aux_(std::make_shared<detail::GraphAux>()) {
    if (n_ < 0) throw std::invalid_argument("negative vertex count");
    for (auto& e : edges_) {
      if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
        throw std::invalid_argument("edge endpoint out of range");
      if (e.u == e.v) throw std::invalid_argument("self-loop");
      if (e.weight <= 0) throw std::invalid_argument("edge weight must be positive");
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const WeightedEdge& a, const WeightedEdge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
    for (std::size_t i = 1; i < edges_.size(); ++i)
      if (edges_[i - 1].u == edges_[i].u && edges_[i - 1].v == edges_[i].v)
        throw std::invalid_argument("duplicate edge");

    adj_.assign(static_cast<std::size_t>(n_), {});
    for (const auto& e : edges_) {
      adj_[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.weight);
      adj_[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.weight);
      if (e.weight != 1) unweighted_ = false;
    }
    for (auto& nbrs : adj_)
      std::sort(nbrs.begin(), nbrs.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
    if (n_ <= 64) {
      masks_.assign(static_cast<std::size_t>(n_), 0);
      for (const auto& e : edges_) {
        masks_[static_cast<std::size_t>(e.u)] |= std::uint64_t{1} << e.v;
        masks_[static_cast<std::size_t>(e.v)] |= std::uint64_t{1} << e.u;
      }
    }
  }

  static WeightedGraph unweighted(int vertex_count, const std::vector<std::pair<int, int>>& pairs) {
    std::vector<WeightedEdge> es;
    es.reserve(pairs.size());
    for (auto [u, v] : pairs) es.push_back({u, v, Rational(1)});
    return WeightedGraph(vertex_count, std::move(es));
  }

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  bool is_unweighted() const { return unweighted_; }

  int degree(int v) const { return static_cast<int>(incident(v).size()); }

  // Neighbors of v with edge weights, ascending by neighbor id.
  const std::vector<std::pair<int, Rational>>& incident(int v) const {
    check_vertex(v);
    return adj_[static_cast<std::size_t>(v)];
  }

  bool has_edge(int u, int v) const {
    check_vertex(u);
    check_vertex(v);
    const auto& nbrs = adj_[static_cast<std::size_t>(u)];
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v,
                               [](const auto& a, int b) { return a.first < b; });
    return it != nbrs.end() && it->first == v;
  }

  const Rational& edge_weight(int u, int v) const {
    check_vertex(u);
    check_vertex(v);
    const auto& nbrs = adj_[static_cast<std::size_t>(u)];
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v,
                               [](const auto& a, int b) { return a.first < b; });
    if (it == nbrs.end() || it->first != v) throw std::invalid_argument("no such edge");
    return it->second;
  }

  // Bitmask of neighbors; only for graphs with at most 64 vertices.
  std::uint64_t neighbor_mask(int v) const {
    check_vertex(v);
    if (n_ > 64) throw CapabilityError("neighbor masks need at most 64 vertices");
    return masks_[static_cast<std::size_t>(v)];
  }

  // Heaviest weight among edges at v; 0 for isolated vertices.
  Rational max_incident_weight(int v) const {
    Rational best = 0;
    for (const auto& [w, wt] : incident(v))
      if (wt > best) best = wt;
    return best;
  }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

  // Builds (once, thread-safely) and returns a helper object tied to this
  // graph's identity. `make` must return std::shared_ptr<T>.
  template <class T, class Make>
  const T& cached(Make&& make) const {
    std::call_once(aux_->once, [&] { aux_->payload = make(); });
    return *static_cast<const T*>(aux_->payload.get());
  }

 private:
  void check_vertex(int v) const {
    if (v < 0 || v >= n_) throw std::invalid_argument("vertex id out of range");
  }

  int n_ = 0;
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<std::pair<int, Rational>>> adj_;
  std::vector<std::uint64_t> masks_;
  bool unweighted_ = true;
  std::shared_ptr<detail::GraphAux> aux_;
};

// --- text format ------------------------------------------------------
//
//   # comment
//   p <n> <m> [weighted|unweighted]
//   e <u> <v> [<w>]
//
// Exactly m edge lines follow the header; weights are required iff the
// header says "weighted" and may be decimals ("2.5") or fractions ("5/2").

inline WeightedGraph parse_graph(std::string_view text) {
  std::vector<std::pair<int, std::string>> lines;  // (line number, content)
  {
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
      ++number;
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      std::size_t first = raw.find_first_not_of(" \t");
      if (first != std::string_view::npos && raw[first] != '#')
        lines.emplace_back(number, std::string(raw));
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
  }
  if (lines.empty()) throw ParseError(1, "missing header line 'p <n> <m> [weighted|unweighted]'");

  auto parse_int = [](int line, const std::string& tok, const char* what) {
    try {
      std::size_t used = 0;
      long v = std::stol(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError(line, std::string("invalid ") + what + " '" + tok + "'");
    }
  };
  auto tokens_of = [](const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> toks;
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
  };

  const auto& [header_line, header] = lines.front();
  auto head = tokens_of(header);
  if (head.empty() || head[0] != "p")
    throw ParseError(header_line, "expected header 'p <n> <m> [weighted|unweighted]'");
  if (head.size() < 3 || head.size() > 4)
    throw ParseError(header_line, "header needs 'p <n> <m> [weighted|unweighted]'");
  long n = parse_int(header_line, head[1], "vertex count");
  long m = parse_int(header_line, head[2], "edge count");
  if (n < 0) throw ParseError(header_line, "negative vertex count");
  if (m < 0) throw ParseError(header_line, "negative edge count");
  bool weighted = false;
  if (head.size() == 4) {
    if (head[3] == "weighted")
      weighted = true;
    else if (head[3] == "unweighted")
      weighted = false;
    else
      throw ParseError(header_line, "mode must be 'weighted' or 'unweighted', got '" + head[3] + "'");
  }

  if (static_cast<long>(lines.size()) - 1 != m) {
    int at = lines.size() > 1 ? lines.back().first : header_line;
    throw ParseError(at, "expected exactly " + std::to_string(m) + " edge lines, found " +
                             std::to_string(lines.size() - 1));
  }

  std::vector<WeightedEdge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  std::vector<std::pair<int, int>> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& [line, content] = lines[li];
    auto toks = tokens_of(content);
    if (toks.empty() || toks[0] != "e")
      throw ParseError(line, "expected edge line 'e <u> <v>" + std::string(weighted ? " <w>'" : "'"));
    if (toks.size() != (weighted ? 4u : 3u))
      throw ParseError(line, weighted ? "weighted edge line needs 'e <u> <v> <w>'"
                                      : "unweighted edge line needs 'e <u> <v>'");
    long u = parse_int(line, toks[1], "vertex id");
    long v = parse_int(line, toks[2], "vertex id");
    if (u < 0 || u >= n || v < 0 || v >= n) throw ParseError(line, "vertex id out of range");
    if (u == v) throw ParseError(line, "self-loop");
    Rational w(1);
    if (weighted) {
      try {
        w = parse_rational(toks[3]);
      } catch (const std::exception&) {
        throw ParseError(line, "invalid weight '" + toks[3] + "'");
      }
      if (w <= 0) throw ParseError(line, "edge weight must be positive");
    }
    std::pair<int, int> key{static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v))};
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ParseError(line, "duplicate edge");
    seen.push_back(key);
    edges.push_back({static_cast<int>(u), static_cast<int>(v), std::move(w)});
  }
  return WeightedGraph(static_cast<int>(n), std::move(edges));
}

inline std::string format_graph(const WeightedGraph& g) {
  std::string out = "p " + std::to_string(g.vertex_count()) + " " + std::to_string(g.edge_count()) +
                    (g.is_unweighted() ? " unweighted\n" : " weighted\n");
  for (const auto& e : g.edges()) {
    out += "e " + std::to_string(e.u) + " " + std::to_string(e.v);
    if (!g.is_unweighted()) out += " " + to_fraction_string(e.weight);
    out += "\n";
  }
  return out;
}

// --- structural queries -----------------------------------------------

// Maximal connected blocks; blocks ordered by smallest member, members
// ascending.
inline std::vector<std::vector<int>> connected_components(const WeightedGraph& g) {
  const int n = g.vertex_count();
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> blocks;
  std::vector<int> stack;
  for (int start = 0; start < n; ++start) {
    if (visited[static_cast<std::size_t>(start)]) continue;
    std::vector<int> block;
    stack.push_back(start);
    visited[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      block.push_back(v);
      for (const auto& [w, wt] : g.incident(v)) {
        if (!visited[static_cast<std::size_t>(w)]) {
          visited[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    std::sort(block.begin(), block.end());
    blocks.push_back(std::move(block));
  }
  return blocks;
}

// Complement of an unweighted graph.
inline WeightedGraph complement(const WeightedGraph& g) {
  if (!g.is_unweighted())
    throw std::invalid_argument("complement is defined for unweighted graphs only");
  std::vector<std::pair<int, int>> pairs;
  const int n = g.vertex_count();
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!g.has_edge(u, v)) pairs.emplace_back(u, v);
  return WeightedGraph::unweighted(n, pairs);
}

// Subgraph induced by s. Vertex ids are relabeled order-preservingly:
// the j-th smallest member of s becomes vertex j.
inline WeightedGraph induced_subgraph(const WeightedGraph& g, const Coalition& s) {
  if (s.universe_size() != g.vertex_count())
    throw std::invalid_argument("coalition universe does not match the graph");
  const auto members = s.members();
  std::vector<int> relabel(static_cast<std::size_t>(g.vertex_count()), -1);
  for (std::size_t j = 0; j < members.size(); ++j) relabel[static_cast<std::size_t>(members[j])] = static_cast<int>(j);
  std::vector<WeightedEdge> edges;
  for (const auto& e : g.edges()) {
    int ru = relabel[static_cast<std::size_t>(e.u)], rv = relabel[static_cast<std::size_t>(e.v)];
    if (ru >= 0 && rv >= 0) edges.push_back({ru, rv, e.weight});
  }
  return WeightedGraph(static_cast<int>(members.size()), std::move(edges));
}

}  // namespace matchshap
