#pragma once

// Matchable-subgraph counting and its recovery from raw Shapley values of
// augmented graphs: the alpha_k counts, the graphs G_i (universal vertex
// y_0 plus a pendant tail y_1..y_i), the C(i) constants, and the exact
// factorial linear system. Used as a deep cross-validation harness; all
// arithmetic here is arbitrary-precision.

#include <string>
#include <thread>
#include <vector>

#include "matchshap/shapley_exact.hpp"

namespace matchshap {

// alpha[k] = number of size-k vertex subsets whose induced subgraph has a
// perfect matching. alpha[0] = 1, odd entries are zero, alpha[k] <= C(n,k).
struct AlphaVector {
  std::vector<BigInt> alpha;  // size n+1

  int order() const { return static_cast<int>(alpha.size()) - 1; }
  friend bool operator==(const AlphaVector& a, const AlphaVector& b) { return a.alpha == b.alpha; }
};

namespace detail {

// perfectly-matchable flags for all 2^n induced subgraphs (weights ignored).
inline std::vector<std::uint8_t> matchable_table(const WeightedGraph& g) {
  const int n = g.vertex_count();
  std::vector<std::uint8_t> table(std::size_t{1} << n, 0);
  table[0] = 1;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    if (std::popcount(mask) % 2 != 0) continue;
    int u = std::countr_zero(mask);
    std::uint64_t rest = mask & (mask - 1);
    for (std::uint64_t nb = g.neighbor_mask(u) & rest; nb != 0; nb &= nb - 1) {
      int w = std::countr_zero(nb);
      if (table[rest & ~(std::uint64_t{1} << w)]) {
        table[mask] = 1;
        break;
      }
    }
  }
  return table;
}

inline void check_count_bound(const WeightedGraph& g, int max_n) {
  if (g.vertex_count() > max_n)
    throw CapabilityError("matchable-subset counting is bounded to " + std::to_string(max_n) +
                          " vertices, graph has " + std::to_string(g.vertex_count()));
}

}  // namespace detail

// Exhaustive count of size-k subsets whose induced subgraph is perfectly
// matchable; the graph is treated as unweighted. Odd k yields 0.
inline BigInt count_matchable_subsets(const WeightedGraph& g, int k,
                                      int max_n = config::max_brute_force_n()) {
  detail::check_count_bound(g, max_n);
  if (k < 0 || k > g.vertex_count()) throw std::invalid_argument("subset size out of range");
  if (k % 2 != 0) return 0;
  const auto table = detail::matchable_table(g);
  BigInt count = 0;
  for (std::uint64_t mask = 0; mask < table.size(); ++mask)
    if (std::popcount(mask) == k && table[mask]) ++count;
  return count;
}

// All alpha_k at once.
inline AlphaVector alpha_vector(const WeightedGraph& g, int max_n = config::max_brute_force_n()) {
  detail::check_count_bound(g, max_n);
  const int n = g.vertex_count();
  const auto table = detail::matchable_table(g);
  AlphaVector out;
  out.alpha.assign(static_cast<std::size_t>(n) + 1, BigInt(0));
  for (std::uint64_t mask = 0; mask < table.size(); ++mask)
    if (table[mask]) ++out.alpha[static_cast<std::size_t>(std::popcount(mask))];
  return out;
}

// Base graph plus a universal vertex y_0 (adjacent to every base vertex)
// and a pendant path y_1, ..., y_i; new edges all have weight one. Base
// vertices keep ids 0..n-1 and y_j = n + j.
struct AugmentedGraph {
  WeightedGraph graph;
  int base_vertices = 0;
  int tail_length = 0;

  int y(int j) const {
    if (j < 0 || j > tail_length) throw std::invalid_argument("tail index out of range");
    return base_vertices + j;
  }
};

inline AugmentedGraph build_augmented_graph(const WeightedGraph& g, int i) {
  if (!g.is_unweighted()) throw std::invalid_argument("augmented graphs are built over unweighted graphs");
  if (i < 0) throw std::invalid_argument("tail length must be nonnegative");
  const int n = g.vertex_count();
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(g.edges().size() + static_cast<std::size_t>(n + i));
  for (const auto& e : g.edges()) pairs.emplace_back(e.u, e.v);
  for (int v = 0; v < n; ++v) pairs.emplace_back(v, n);          // y_0 star
  for (int j = 1; j <= i; ++j) pairs.emplace_back(n + j - 1, n + j);  // tail
  return {WeightedGraph::unweighted(n + i + 1, pairs), n, i};
}

// C(i) = sum_{k=1}^{floor(i/2)} sum_{j=0}^{n+i-2k}
//          (j+2k-1)! (n+i-j-2k+1)! C(n+i-2k, j),
// the factorial-weighted count of pivotal coalitions for y_i that miss one
// of y_0..y_{i-1}. Zero when floor(i/2) = 0.
inline BigInt constant_C(int n, int i) {
  if (n < 0 || i < 0) throw std::invalid_argument("constant_C needs nonnegative arguments");
  BigInt total = 0;
  for (int k = 1; k <= i / 2; ++k) {
    for (int j = 0; j <= n + i - 2 * k; ++j) {
      total += factorial(static_cast<unsigned long>(j + 2 * k - 1)) *
               factorial(static_cast<unsigned long>(n + i - j - 2 * k + 1)) *
               binomial(static_cast<unsigned long>(n + i - 2 * k), static_cast<unsigned long>(j));
    }
  }
  return total;
}

namespace detail {

// Exact Gaussian elimination with partial pivoting on magnitude.
inline std::vector<Rational> solve_linear_system(std::vector<std::vector<Rational>> a,
                                                 std::vector<Rational> b) {
  const int n = static_cast<int>(a.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (cmp(abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]),
              abs(a[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)])) > 0)
        pivot = r;
    if (a[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)] == 0)
      throw Error("singular linear system");
    std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(pivot)]);
    std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
    for (int r = col + 1; r < n; ++r) {
      if (a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] == 0) continue;
      Rational f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                   a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      for (int c = col; c < n; ++c)
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
            f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  std::vector<Rational> x(static_cast<std::size_t>(n), Rational(0));
  for (int r = n - 1; r >= 0; --r) {
    Rational acc = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c)
      acc -= a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(r)] = acc / a[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
  }
  return x;
}

}  // namespace detail

// Recovers alpha_0..alpha_n from the raw Shapley values kappa_{y_i} of the
// tail-end players of MG(G_0), ..., MG(G_n).
//
// Row i states  sum_k (k+i)! (n-k)! beta_k = kappa_{y_i} - C(i)  where
// beta_k is alpha-bar_k for even i and alpha_k for odd i. Substituting
// alpha-bar_k = C(n,k) - alpha_k into the even rows (a sign flip plus a
// right-hand-side shift, preserving nonsingularity) yields one consistent
// system in alpha, solved exactly.
inline AlphaVector recover_alpha_from_shapley(const std::vector<Rational>& raw_tail_values, int n) {
  if (static_cast<int>(raw_tail_values.size()) != n + 1)
    throw std::invalid_argument("need kappa values for tails i = 0..n");
  FactorialTable fact(2 * n);
  std::vector<std::vector<Rational>> a(static_cast<std::size_t>(n) + 1,
                                       std::vector<Rational>(static_cast<std::size_t>(n) + 1));
  std::vector<Rational> b(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    Rational rhs = raw_tail_values[static_cast<std::size_t>(i)] - Rational(constant_C(n, i));
    Rational even_shift = 0;
    for (int k = 0; k <= n; ++k) {
      BigInt coeff = fact[k + i] * fact[n - k];
      a[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = Rational(coeff);
      if (i % 2 == 0)
        even_shift += Rational(coeff * binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(k)));
    }
    b[static_cast<std::size_t>(i)] = i % 2 == 0 ? even_shift - rhs : rhs;
  }
  auto x = detail::solve_linear_system(std::move(a), std::move(b));

  AlphaVector out;
  out.alpha.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const Rational& v = x[static_cast<std::size_t>(k)];
    if (!is_integral(v))
      throw Error("recovered alpha_" + std::to_string(k) + " = " + to_fraction_string(v) +
                  " is not an integer; inputs are inconsistent");
    BigInt value = to_integer(v);
    if (value < 0 || value > binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(k)) ||
        (k % 2 == 1 && value != 0) || (k == 0 && value != 1))
      throw Error("recovered alpha_" + std::to_string(k) + " = " + value.get_str() +
                  " is out of range; inputs are inconsistent");
    out.alpha.push_back(value);
  }
  return out;
}

// End-to-end check of the counting reduction on one graph: builds
// G_0..G_n, computes each kappa_{y_i} by brute force, recovers alpha, and
// compares against direct counting for every k. A mismatch indicates a bug.
struct ReductionReport {
  struct Row {
    int k = 0;
    BigInt counted;
    BigInt recovered;
    bool match = false;
  };
  std::vector<Row> rows;
  bool pass = false;
  AlphaVector recovered;
};

inline ReductionReport verify_reduction(const WeightedGraph& g, int max_n = 8, int threads = 1) {
  if (!g.is_unweighted()) throw std::invalid_argument("reduction verification needs an unweighted graph");
  if (g.vertex_count() > max_n)
    throw CapabilityError("reduction verification is bounded to " + std::to_string(max_n) +
                          " vertices (each G_i costs a brute-force Shapley computation)");
  const int n = g.vertex_count();
  // The n+1 kappa computations are independent; run them in parallel when
  // asked. Each slot is written once, so the result is thread-count-free.
  std::vector<Rational> kappas(static_cast<std::size_t>(n) + 1);
  auto compute = [&](int i) {
    AugmentedGraph aug = build_augmented_graph(g, i);
    kappas[static_cast<std::size_t>(i)] = raw_shapley_single_brute_force(aug.graph, aug.y(i), 2 * max_n + 1);
  };
  if (threads > 1 && n > 0) {
    const int workers = std::min(threads, n + 1);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i <= n; i += workers) compute(i);
      });
    for (auto& t : pool) t.join();
  } else {
    for (int i = 0; i <= n; ++i) compute(i);
  }
  ReductionReport report;
  report.recovered = recover_alpha_from_shapley(kappas, n);
  AlphaVector direct = alpha_vector(g);
  report.pass = true;
  for (int k = 0; k <= n; ++k) {
    ReductionReport::Row row;
    row.k = k;
    row.counted = direct.alpha[static_cast<std::size_t>(k)];
    row.recovered = report.recovered.alpha[static_cast<std::size_t>(k)];
    row.match = row.counted == row.recovered;
    if (!row.match) report.pass = false;
    report.rows.push_back(std::move(row));
  }
  return report;
}

// Determinant of the (n+1)x(n+1) matrix B with B_{ij} = (i+j)!, by exact
// fraction-free (Bareiss) elimination. Asserts the closed form
// prod_{i=0}^n (i!)^2 and returns the determinant.
inline BigInt pascal_matrix_determinant_check(int n) {
  if (n < 0 || n > 30) throw CapabilityError("pascal determinant check is bounded to n <= 30");
  const int size = n + 1;
  std::vector<std::vector<BigInt>> m(static_cast<std::size_t>(size),
                                     std::vector<BigInt>(static_cast<std::size_t>(size)));
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          factorial(static_cast<unsigned long>(i + j));

  BigInt prev = 1;
  int sign = 1;
  for (int k = 0; k + 1 < size; ++k) {
    if (m[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] == 0) {
      int swap_row = -1;
      for (int r = k + 1; r < size; ++r)
        if (m[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] != 0) {
          swap_row = r;
          break;
        }
      if (swap_row == -1) return 0;
      std::swap(m[static_cast<std::size_t>(k)], m[static_cast<std::size_t>(swap_row)]);
      sign = -sign;
    }
    for (int i = k + 1; i < size; ++i) {
      for (int j = k + 1; j < size; ++j) {
        BigInt t = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                       m[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] -
                   m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                       m[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(t);
      }
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = 0;
    }
    prev = m[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
  }
  BigInt det = sign * m[static_cast<std::size_t>(size - 1)][static_cast<std::size_t>(size - 1)];

  BigInt expected = 1;
  for (int i = 0; i <= n; ++i) {
    BigInt f = factorial(static_cast<unsigned long>(i));
    expected *= f * f;
  }
  if (det != expected)
    throw Error("pascal factorial matrix determinant mismatch at n = " + std::to_string(n));
  return det;
}

}  // namespace matchshap
