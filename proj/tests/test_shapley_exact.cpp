#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace matchshap;
using namespace testsupport;

namespace {
ShapleyVector phi_of(std::initializer_list<Rational> values) {
  ShapleyVector v;
  v.values = values;
  return v;
}
}  // namespace

TEST_CASE("brute force on the canonical small graphs", "[shapley]") {
  CHECK(shapley_brute_force(path_graph(2)) == phi_of({Rational(1, 2), Rational(1, 2)}));
  CHECK(shapley_brute_force(path_graph(3)) == phi_of({Rational(1, 6), Rational(2, 3), Rational(1, 6)}));
  CHECK(shapley_brute_force(path_graph(4)) ==
        phi_of({Rational(5, 12), Rational(7, 12), Rational(7, 12), Rational(5, 12)}));
  CHECK(shapley_brute_force(WeightedGraph(2, {{0, 1, Rational(5)}})) ==
        phi_of({Rational(5, 2), Rational(5, 2)}));
  CHECK(shapley_brute_force(WeightedGraph()).size() == 0);
}

TEST_CASE("brute force respects the size bound", "[shapley]") {
  CHECK_THROWS_AS(shapley_brute_force(path_graph(6), 5), CapabilityError);
  CHECK_THROWS_MATCHES(shapley_brute_force(path_graph(25), 20), CapabilityError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("approx")));
}

TEST_CASE("permutation oracle", "[shapley]") {
  CHECK(shapley_permutation_oracle(complete_graph(3)) ==
        phi_of({Rational(1, 3), Rational(1, 3), Rational(1, 3)}));
  CHECK(shapley_permutation_oracle(path_graph(3)) ==
        phi_of({Rational(1, 6), Rational(2, 3), Rational(1, 6)}));
  auto with_isolated = WeightedGraph::unweighted(3, {{0, 1}});
  CHECK(shapley_permutation_oracle(with_isolated)[2] == 0);
  CHECK_THROWS_AS(shapley_permutation_oracle(path_graph(9)), CapabilityError);
}

TEST_CASE("oracle agreement: brute force equals permutation enumeration", "[shapley]") {
  for (int n = 0; n <= 5; ++n)
    for_each_unweighted_graph(
        n, [&](const WeightedGraph& g) { CHECK(shapley_brute_force(g) == shapley_permutation_oracle(g)); });
  SampleRng rng = make_sample_stream(31, 0);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + static_cast<int>(rng.below(6));
    auto g = random_weighted(n, rng);
    CHECK(shapley_brute_force(g) == shapley_permutation_oracle(g));
  }
}

TEST_CASE("pivotality predicate", "[shapley]") {
  auto edge = path_graph(2);
  CHECK(is_pivotal(edge, 0, Coalition::of({1}, 2)));
  CHECK_FALSE(is_pivotal(edge, 0, Coalition::empty(2)));
  CHECK(is_pivotal(path_graph(3), 1, Coalition::of({0, 2}, 3)));
  CHECK_THROWS_AS(is_pivotal(edge, 0, Coalition::of({0, 1}, 2)), std::invalid_argument);
  CHECK_THROWS_AS(is_pivotal(WeightedGraph(2, {{0, 1, Rational(2)}}), 0, Coalition::empty(2)),
                  std::invalid_argument);
}

TEST_CASE("pivotal-count aggregation", "[shapley]") {
  std::vector<BigInt> middle_of_p3 = {BigInt(0), BigInt(2), BigInt(1)};
  CHECK(shapley_from_pivotal_counts(middle_of_p3, 3) == Rational(2, 3));
  std::vector<BigInt> zeros(5, BigInt(0));
  CHECK(shapley_from_pivotal_counts(zeros, 5) == 0);
  std::vector<BigInt> endpoint = {BigInt(0), BigInt(1)};
  CHECK(shapley_from_pivotal_counts(endpoint, 2) == Rational(1, 2));
}

TEST_CASE("per-size pivotal counts reproduce brute force", "[shapley]") {
  SampleRng rng = make_sample_stream(32, 0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + static_cast<int>(rng.below(6));
    auto g = random_unweighted(n, rng);
    auto phi = shapley_brute_force(g);
    for (int i = 0; i < n; ++i)
      CHECK(shapley_from_pivotal_counts(pivotal_counts_by_size(g, i), n) == phi[i]);
  }
}

TEST_CASE("zero Shapley value iff isolated", "[shapley]") {
  auto g = WeightedGraph::unweighted(3, {{0, 1}});
  CHECK(is_zero_shapley(g, 2));
  CHECK_FALSE(is_zero_shapley(g, 0));
  CHECK(is_zero_shapley(WeightedGraph::unweighted(3, {}), 1));
  SampleRng rng = make_sample_stream(33, 0);
  for (int trial = 0; trial < 15; ++trial) {
    int n = 1 + static_cast<int>(rng.below(7));
    auto h = random_weighted(n, rng, 40);
    auto phi = shapley_brute_force(h);
    for (int v = 0; v < n; ++v) CHECK(is_zero_shapley(h, v) == (phi[v] == 0));
  }
}

TEST_CASE("component decomposition", "[shapley]") {
  auto solver = [](const WeightedGraph& sub) { return shapley_permutation_oracle(sub); };
  auto g = disjoint_union(path_graph(2), path_graph(3));
  CHECK(shapley_by_components(g, solver) ==
        phi_of({Rational(1, 2), Rational(1, 2), Rational(1, 6), Rational(2, 3), Rational(1, 6)}));
  auto two_edges = disjoint_union(path_graph(2), path_graph(2));
  CHECK(shapley_by_components(two_edges, solver) ==
        phi_of({Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)}));
  CHECK(shapley_by_components(path_graph(4), solver) == shapley_brute_force(path_graph(4)));
}

TEST_CASE("component decomposition equals whole-graph brute force", "[shapley]") {
  SampleRng rng = make_sample_stream(34, 0);
  auto brute = [](const WeightedGraph& sub) { return shapley_brute_force(sub); };
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng.below(7));
    auto g = random_weighted(n, rng, 30);  // sparse, usually disconnected
    CHECK(shapley_by_components(g, brute) == shapley_brute_force(g));
  }
}

TEST_CASE("additivity over edge-disjoint component unions", "[shapley]") {
  SampleRng rng = make_sample_stream(35, 0);
  for (int trial = 0; trial < 12; ++trial) {
    int na = 1 + static_cast<int>(rng.below(4));
    int nb = 1 + static_cast<int>(rng.below(4));
    auto a = random_weighted(na, rng);
    auto b = random_weighted(nb, rng);
    int n = na + nb;
    // g1 holds a's edges, g2 holds b's shifted edges, all on n vertices;
    // the union game is the sum game because the pieces are disconnected.
    std::vector<WeightedEdge> e1 = a.edges(), e2, eu;
    for (const auto& e : b.edges()) e2.push_back({e.u + na, e.v + na, e.weight});
    eu = e1;
    eu.insert(eu.end(), e2.begin(), e2.end());
    auto g1 = WeightedGraph(n, e1), g2 = WeightedGraph(n, e2), gu = WeightedGraph(n, eu);
    auto p1 = shapley_brute_force(g1), p2 = shapley_brute_force(g2), pu = shapley_brute_force(gu);
    for (int v = 0; v < n; ++v) CHECK(pu[v] == p1[v] + p2[v]);
  }
}

TEST_CASE("raw and normalized vectors are consistent", "[shapley]") {
  SampleRng rng = make_sample_stream(36, 0);
  for (int trial = 0; trial < 15; ++trial) {
    int n = 1 + static_cast<int>(rng.below(6));
    auto g = trial % 2 == 0 ? random_unweighted(n, rng) : random_weighted(n, rng);
    auto phi = shapley_brute_force(g);
    auto raw = to_raw(phi);
    CHECK(to_normalized(raw) == phi);
    const BigInt n_fact = factorial(static_cast<unsigned long>(n));
    for (int v = 0; v < n; ++v) {
      CHECK(raw[v] == phi[v] * Rational(n_fact));
      if (g.is_unweighted()) CHECK(is_integral(raw[v]));
      CHECK(raw[v] == raw_shapley_single_brute_force(g, v));
    }
  }
}

TEST_CASE("axiom suite on exact outputs", "[shapley]") {
  for (int n = 0; n <= 4; ++n)
    for_each_unweighted_graph(n, [&](const WeightedGraph& g) { CHECK(satisfies_axioms(g, shapley_brute_force(g))); });
  SampleRng rng = make_sample_stream(37, 0);
  for (int trial = 0; trial < 25; ++trial) {
    int n = 1 + static_cast<int>(rng.below(8));
    auto g = random_weighted(n, rng);
    CHECK(satisfies_axioms(g, shapley_brute_force(g)));
  }
}

TEST_CASE("parallel brute force is bitwise identical", "[shapley]") {
  SampleRng rng = make_sample_stream(38, 0);
  auto g = random_weighted(8, rng);
  auto sequential = shapley_brute_force(g, 20, 1);
  CHECK(shapley_brute_force(g, 20, 4) == sequential);
  CHECK(shapley_brute_force(g, 20, 13) == sequential);
}

TEST_CASE("automatic dispatcher picks methods per component", "[shapley]") {
  // C5 + K2: cycle symmetry and a single edge.
  auto g = disjoint_union(cycle_graph(5), path_graph(2));
  auto result = shapley_auto(g);
  for (int v = 0; v < 5; ++v) CHECK(result.shapley[v] == Rational(2, 5));
  CHECK(result.shapley[5] == Rational(1, 2));
  CHECK(result.shapley[6] == Rational(1, 2));
  REQUIRE(result.components.size() == 2);
  CHECK(result.components[0].method == ExactMethod::degree_two);
  CHECK(result.components[1].method == ExactMethod::degree_two);

  auto k23 = complete_multipartite({2, 3});
  auto r23 = shapley_auto(k23);
  CHECK(r23.components[0].method == ExactMethod::modular);
  CHECK(r23.shapley[0] == Rational(13, 20));
  CHECK(r23.shapley[2] == Rational(7, 30));

  auto isolated = shapley_auto(WeightedGraph::unweighted(1, {}));
  CHECK(isolated.components[0].method == ExactMethod::isolated);
  CHECK(isolated.shapley[0] == 0);
}

TEST_CASE("dispatcher errors on large structureless instances", "[shapley]") {
  // 26-vertex 3-regular circulant: no small decomposition, above the brute
  // bound, so exact computation must refuse and point at the FPRAS.
  std::vector<std::pair<int, int>> es;
  for (int i = 0; i < 26; ++i) es.emplace_back(std::min(i, (i + 1) % 26), std::max(i, (i + 1) % 26));
  for (int i = 0; i < 13; ++i) es.emplace_back(i, i + 13);
  auto g = WeightedGraph::unweighted(26, es);
  CHECK_THROWS_MATCHES(shapley_auto(g), CapabilityError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("approx")));
}

TEST_CASE("dispatcher handles degree-two graphs past the coalition width", "[shapley]") {
  auto big = disjoint_union(path_graph(100), cycle_graph(9));
  auto result = shapley_auto(big);
  CHECK(result.shapley.sum() == max_matching_value(big));
  for (int pos = 1; pos <= 100; ++pos) CHECK(result.shapley[pos - 1] == shapley_path(100, pos));
  for (int v = 100; v < 109; ++v) CHECK(result.shapley[v] == Rational(4, 9));
  CHECK(result.components[0].method == ExactMethod::degree_two);

  // non-degree-two graphs of that size have no exact route
  auto star = [] {
    std::vector<std::pair<int, int>> es;
    for (int v = 1; v < 70; ++v) es.emplace_back(0, v);
    return WeightedGraph::unweighted(70, es);
  }();
  CHECK_THROWS_MATCHES(shapley_auto(star), CapabilityError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("approx")));
}

TEST_CASE("dispatcher agrees with brute force on mixed inputs", "[shapley]") {
  SampleRng rng = make_sample_stream(39, 0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + static_cast<int>(rng.below(8));
    auto g = trial % 2 == 0 ? random_unweighted(n, rng, 40) : random_weighted(n, rng, 40);
    CHECK(shapley_auto(g).shapley == shapley_brute_force(g));
  }
}
