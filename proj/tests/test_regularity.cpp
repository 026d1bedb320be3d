#include "regbound/regularity.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace regbound;

TEST_CASE("exact pair check agrees with the all-sizes oracle") {
  const Rational deltas[] = {rat(1, 4), rat(1, 3), rat(1, 2)};
  int agree = 0, total = 0;
  for (uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed_for(99, "unit/" + std::to_string(seed)));
    uint32_t L = 2 + static_cast<uint32_t>(rng.below(6)), R = 2 + static_cast<uint32_t>(rng.below(6));
    Rational p = rat(1 + static_cast<int64_t>(rng.below(9)), 10);
    auto g = oracle::random_graph(L, R, p, seed);
    for (const auto& d : deltas) {
      ++total;
      auto v = is_delta_regular_pair(g, d);
      agree += v.regular == oracle::naive_delta_regular(g, d);
      if (!v.regular) {
        REQUIRE(v.witness);
        CHECK(edges_between(g, v.witness->A, v.witness->B) == v.witness->edges);
        CHECK(v.witness->ratio < rat(1, 2));
      }
    }
  }
  CHECK(agree == total);
}

TEST_CASE("density extremes scan every right subset") {
  // A 6x6 graph whose sparsest 3x3 block is empty but whose first right triple is dense.
  BipartiteGraph g(6, 6);
  for (uint32_t u = 0; u < 6; ++u)
    for (uint32_t v = 0; v < 3; ++v) g.set_edge(u, v);
  g.set_edge(0, 3);
  g.set_edge(5, 5);
  auto ex = density_extremes(g, 3, 3);
  auto [lo, hi] = oracle::naive_extremes(g, 3, 3);
  CHECK(lo == 0);
  CHECK(hi == 9);
  CHECK(ex.min_edges == lo);
  CHECK(ex.max_edges == hi);
  CHECK(edges_between(g, ex.min_A, ex.min_B) == ex.min_edges);
  CHECK(edges_between(g, ex.max_A, ex.max_B) == ex.max_edges);
}

TEST_CASE("density extremes match brute force on random graphs") {
  for (uint64_t seed = 0; seed < 25; ++seed) {
    auto g = oracle::random_graph(7, 8, rat(1, 3), seed);
    for (uint32_t a : {1u, 3u, 5u})
      for (uint32_t b : {2u, 4u}) {
        auto ex = density_extremes(g, a, b);
        auto [lo, hi] = oracle::naive_extremes(g, a, b);
        CHECK(ex.min_edges == lo);
        CHECK(ex.max_edges == hi);
      }
  }
}

TEST_CASE("minimal subset reduction sizes") {
  BipartiteGraph g(10, 7);
  auto s = minimal_subset_reduction(g, rat(1, 3));
  CHECK(s.a == 4);
  CHECK(s.b == 3);
  CHECK(s.left_combos == 210);
  CHECK(s.right_combos == 35);
  CHECK(s.enumerate == Side::Right);
  auto z = minimal_subset_reduction(g, 0);
  CHECK(z.a == 1);
  CHECK(z.b == 1);
}

TEST_CASE("pair check edge cases") {
  BipartiteGraph empty(4, 4);
  auto v = is_delta_regular_pair(empty, rat(1, 2));
  CHECK(v.vacuous);
  CHECK(v.regular);
  BipartiteGraph full = BipartiteGraph(5, 5).complement();
  CHECK(is_delta_regular_pair(full, rat(1, 5)).regular);
  // a single edge is irregular for any δ < 1 with two vertices per side
  BipartiteGraph one(2, 2);
  one.set_edge(0, 0);
  CHECK_FALSE(is_delta_regular_pair(one, rat(1, 2)).regular);
  CHECK(is_delta_regular_pair(one, 1).regular);
  CHECK_THROWS_AS(is_delta_regular_pair(one, rat(3, 2)), Error);
}

TEST_CASE("exact mode respects the cap") {
  auto g = oracle::random_graph(40, 40, rat(1, 2), 1);
  CheckOptions o;
  o.cap = 1000;
  try {
    is_delta_regular_pair(g, rat(1, 2), o);
    FAIL("expected a resource error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Resource);
  }
}

TEST_CASE("sampled mode never claims a false witness") {
  CheckOptions o;
  o.mode = Mode::Sampled;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto g = oracle::random_graph(30, 30, rat(1, 4), seed);
    auto v = is_delta_regular_pair(g, rat(1, 5), o);
    if (!v.regular) {
      REQUIRE(v.witness);
      uint64_t e = edges_between(g, v.witness->A, v.witness->B);
      CHECK(e == v.witness->edges);
      CHECK(2 * e * 900 < g.edge_count() * v.witness->A.size() * v.witness->B.size());
    } else {
      CHECK_FALSE(v.decided);
    }
  }
}

TEST_CASE("stop-at-first gives the same verdict") {
  CheckOptions first;
  first.stop_at_first = true;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto g = oracle::random_graph(6, 6, rat(1, 3), seed + 500);
    CHECK(is_delta_regular_pair(g, rat(1, 3)).regular == is_delta_regular_pair(g, rat(1, 3), first).regular);
  }
}

TEST_CASE("epsilon regularity of complete and split graphs") {
  auto full = BipartiteGraph(6, 6).complement();
  CHECK(is_eps_regular_graph(full, rat(1, 10)).regular);
  BipartiteGraph half(6, 6);
  for (uint32_t u = 0; u < 3; ++u)
    for (uint32_t v = 0; v < 6; ++v) half.set_edge(u, v);
  auto v = is_eps_regular_graph(half, rat(1, 2));
  CHECK_FALSE(v.regular);  // the lower half has density 0
  CHECK(v.worst_density == 0);
}

TEST_CASE("partition edit interval on a block graph") {
  // complete between cells (0,0) and (1,1), empty elsewhere: every pair regular or vacuous
  BipartiteGraph g(8, 8);
  for (uint32_t u = 0; u < 8; ++u)
    for (uint32_t v = 0; v < 8; ++v)
      if ((u < 4) == (v < 4)) g.set_edge(u, v);
  auto P = VertexPartition::blocks(8, 2), Q = VertexPartition::blocks(8, 2);
  auto iv = partition_edit_interval(g, P, Q, rat(1, 4));
  CHECK(iv.verdict == Verdict::Regular);
  CHECK(iv.lower == 0);
  CHECK(iv.vacuous_pairs == 2);
  // the trivial partition is irregular: a 2x2 block of the empty quadrant has density 0
  auto iv2 = partition_edit_interval(g, VertexPartition::trivial(8), VertexPartition::trivial(8), rat(1, 4));
  CHECK(iv2.pairs.size() == 1);
  CHECK_FALSE(iv2.pairs[0].regular);
  CHECK(iv2.lower > 0);
  CHECK(iv2.lower <= iv2.upper);
}

TEST_CASE("union of regular stars stays regular") {
  std::vector<BipartiteGraph> gs{BipartiteGraph(4, 4).complement(), BipartiteGraph(4, 4), BipartiteGraph(4, 4)};
  auto r = check_star_union(gs, rat(1, 2));
  CHECK(r.property_holds);
  CHECK(r.union_regular);
  std::vector<BipartiteGraph> overlap{BipartiteGraph(4, 4).complement(), BipartiteGraph(4, 4).complement()};
  CHECK_THROWS_AS(check_star_union(overlap, rat(1, 2)), Error);
}

TEST_CASE("k-partition checks on a complete 3-graph") {
  VertexClassSet cls({2, 2, 2});
  std::vector<std::vector<uint32_t>> t;
  for (uint32_t a = 0; a < 2; ++a)
    for (uint32_t b = 0; b < 2; ++b)
      for (uint32_t c = 0; c < 2; ++c) t.push_back({a, b, c});
  auto H = KPartiteKGraph::from_tuples(cls, t);
  auto P = KPartition::complete(VertexPartition::blocks(6, 3), 2);
  auto r = is_delta_regular_kpartition(H, P, rat(1, 2));
  CHECK(r.verdict == Verdict::Regular);
  CHECK(r.good.good);
}

TEST_CASE("ledger values") {
  CHECK(gamma_prime(rat(1, 4)) == rat(1, 128));
  // γ'·(¼·2^i·p·|P||R| − e_outside) = (1/128)·(¼·2·½·16) = 1/32
  CHECK(ledger_value(rat(1, 4), rat(1, 2), 1, 4, 4, 0) == rat(1, 32));
  CHECK(ledger_value(rat(1, 4), rat(1, 2), 1, 4, 4, 3) == rat(1, 128));
  CHECK(ledger_value(rat(1, 4), rat(1, 2), 1, 4, 4, 100) == 0);
}
