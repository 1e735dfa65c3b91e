#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace matchshap;
using namespace testsupport;

TEST_CASE("counting matchable subsets", "[counting]") {
  auto p4 = path_graph(4);
  CHECK(count_matchable_subsets(p4, 0) == 1);  // empty set convention
  CHECK(count_matchable_subsets(p4, 2) == 3);  // the three edges
  CHECK(count_matchable_subsets(p4, 4) == 1);
  CHECK(count_matchable_subsets(p4, 1) == 0);
  CHECK(count_matchable_subsets(p4, 3) == 0);
  CHECK(count_matchable_subsets(cycle_graph(4), 2) == 4);
  CHECK_THROWS_AS(count_matchable_subsets(p4, 5), std::invalid_argument);
  CHECK_THROWS_AS(count_matchable_subsets(path_graph(9), 2, 8), CapabilityError);
}

TEST_CASE("alpha vector agrees with per-k counts and matchability", "[counting]") {
  SampleRng rng = make_sample_stream(51, 0);
  for (int trial = 0; trial < 15; ++trial) {
    int n = 1 + static_cast<int>(rng.below(7));
    auto g = random_unweighted(n, rng);
    auto alpha = alpha_vector(g);
    REQUIRE(alpha.order() == n);
    CHECK(alpha.alpha[0] == 1);
    BigInt direct_total = 0;
    for (int k = 0; k <= n; ++k) {
      CHECK(alpha.alpha[static_cast<std::size_t>(k)] == count_matchable_subsets(g, k));
      if (k % 2 == 1) CHECK(alpha.alpha[static_cast<std::size_t>(k)] == 0);
      CHECK(alpha.alpha[static_cast<std::size_t>(k)] <=
            binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(k)));
    }
    // cross-route: direct is_perfectly_matchable agreement on every subset
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      Coalition s = Coalition::from_mask(mask, n);
      if (is_perfectly_matchable(g, s)) ++direct_total;
    }
    BigInt table_total = 0;
    for (const auto& a : alpha.alpha) table_total += a;
    CHECK(direct_total == table_total);
  }
}

TEST_CASE("augmented graph construction", "[counting]") {
  auto k2 = path_graph(2);
  auto a0 = build_augmented_graph(k2, 0);
  CHECK(a0.graph.vertex_count() == 3);
  CHECK(a0.graph.edge_count() == 3);  // base edge + two star edges
  CHECK(a0.y(0) == 2);

  auto a2 = build_augmented_graph(k2, 2);
  CHECK(a2.graph.vertex_count() == 5);
  CHECK(a2.graph.edge_count() == 5);  // 1 base + 2 star + 2 tail
  CHECK(a2.graph.has_edge(2, 3));
  CHECK(a2.graph.has_edge(3, 4));
  CHECK_FALSE(a2.graph.has_edge(0, 3));

  auto single = build_augmented_graph(WeightedGraph::unweighted(1, {}), 1);
  CHECK(single.graph.vertex_count() == 3);
  CHECK(single.graph.edge_count() == 2);  // path y1 - y0 - v
  CHECK(single.graph.degree(1) == 2);

  CHECK_THROWS_AS(build_augmented_graph(WeightedGraph(2, {{0, 1, Rational(2)}}), 0), std::invalid_argument);
  CHECK_THROWS_AS(a2.y(3), std::invalid_argument);
}

TEST_CASE("the C(i) constants", "[counting]") {
  CHECK(constant_C(5, 0) == 0);
  CHECK(constant_C(9, 1) == 0);
  CHECK(constant_C(1, 2) == 4);  // j=0: 1!*2!*1 = 2, j=1: 2!*1!*1 = 2
  CHECK(constant_C(0, 2) == factorial(1) * factorial(1) * 1);  // single j=0 term
  CHECK_THROWS_AS(constant_C(-1, 0), std::invalid_argument);
}

TEST_CASE("alpha recovery from raw tail values", "[counting]") {
  auto recover = [](const WeightedGraph& g) {
    const int n = g.vertex_count();
    std::vector<Rational> kappas;
    for (int i = 0; i <= n; ++i) {
      auto aug = build_augmented_graph(g, i);
      kappas.push_back(raw_shapley_single_brute_force(aug.graph, aug.y(i)));
    }
    return recover_alpha_from_shapley(kappas, n);
  };
  CHECK(recover(path_graph(2)).alpha == std::vector<BigInt>{1, 0, 1});
  CHECK(recover(WeightedGraph::unweighted(2, {})).alpha == std::vector<BigInt>{1, 0, 0});
  CHECK(recover(path_graph(3)).alpha == std::vector<BigInt>{1, 0, 2, 0});

  // inconsistent inputs must be detected
  std::vector<Rational> zeros(3, Rational(0));
  CHECK_THROWS_AS(recover_alpha_from_shapley(zeros, 2), Error);
  CHECK_THROWS_AS(recover_alpha_from_shapley(zeros, 4), std::invalid_argument);  // wrong length
}

TEST_CASE("reduction round trip on the worked examples", "[counting]") {
  auto k2 = verify_reduction(path_graph(2));
  CHECK(k2.pass);
  CHECK(k2.recovered.alpha == std::vector<BigInt>{1, 0, 1});

  CHECK(verify_reduction(path_graph(3)).pass);

  auto c4 = verify_reduction(cycle_graph(4));
  CHECK(c4.pass);
  CHECK(c4.recovered.alpha == std::vector<BigInt>{1, 0, 4, 0, 1});

  CHECK(verify_reduction(WeightedGraph()).pass);  // n = 0 degenerate system

  CHECK_THROWS_AS(verify_reduction(WeightedGraph(2, {{0, 1, Rational(2)}})), std::invalid_argument);
  CHECK_THROWS_AS(verify_reduction(path_graph(9)), CapabilityError);
}

TEST_CASE("reduction round trip on random graphs", "[counting]") {
  SampleRng rng = make_sample_stream(52, 0);
  for (int trial = 0; trial < 4; ++trial) {
    int n = 6 + static_cast<int>(rng.below(2));
    auto report = verify_reduction(random_unweighted(n, rng));
    CHECK(report.pass);
  }
}

TEST_CASE("tail pivotality matches the matchability parity criterion", "[counting]") {
  // For S containing y_0..y_{i-1} (and not y_i): y_i pivotal in G_i iff
  // S's base part is non-matchable (even i) / matchable (odd i).
  SampleRng rng = make_sample_stream(53, 0);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng.below(6));
    int i = static_cast<int>(rng.below(5));
    auto g = random_unweighted(n, rng);
    auto aug = build_augmented_graph(g, i);
    const int total = aug.graph.vertex_count();
    Coalition s = Coalition::empty(total);
    for (int j = 0; j < i; ++j) s = s.with(aug.y(j));
    std::uint64_t base_bits = rng.next() & Coalition::full(n).mask();
    for (int v = 0; v < n; ++v)
      if ((base_bits >> v) & 1u) s = s.with(v);

    bool pivotal = is_pivotal(aug.graph, aug.y(i), s);
    Coalition base = Coalition::from_mask(s.mask() & Coalition::full(n).mask(), total);
    Coalition base_only = Coalition::from_mask(base.mask(), n);
    bool matchable = is_perfectly_matchable(g, base_only);
    if (i % 2 == 0)
      CHECK(pivotal == !matchable);
    else
      CHECK(pivotal == matchable);
  }
}

TEST_CASE("pascal factorial matrix determinant", "[counting]") {
  CHECK(pascal_matrix_determinant_check(0) == 1);
  CHECK(pascal_matrix_determinant_check(1) == 1);
  CHECK(pascal_matrix_determinant_check(2) == 4);
  for (int n = 3; n <= 12; ++n) {
    BigInt expected = 1;
    for (int i = 0; i <= n; ++i) expected *= factorial(static_cast<unsigned long>(i)) *
                                              factorial(static_cast<unsigned long>(i));
    CHECK(pascal_matrix_determinant_check(n) == expected);
  }
  CHECK_THROWS_AS(pascal_matrix_determinant_check(31), CapabilityError);
}

TEST_CASE("exact linear solver detects singular systems", "[counting]") {
  std::vector<std::vector<Rational>> a = {{Rational(1), Rational(2)}, {Rational(2), Rational(4)}};
  std::vector<Rational> b = {Rational(1), Rational(2)};
  CHECK_THROWS_AS(matchshap::detail::solve_linear_system(a, b), Error);
  std::vector<std::vector<Rational>> ok = {{Rational(0), Rational(1)}, {Rational(3), Rational(0)}};
  std::vector<Rational> rhs = {Rational(5), Rational(6)};
  auto x = matchshap::detail::solve_linear_system(ok, rhs);  // needs the pivot swap
  CHECK(x == std::vector<Rational>{Rational(2), Rational(5)});
}
