#include "regbound/rs_regularity.hpp"

#include <doctest.h>

using namespace regbound;

namespace {
// complete tripartite 2-graph polyad on clusters of the given size
Polyad complete_polyad(uint32_t n) {
  Polyad P;
  P.clusters.resize(3);
  for (uint32_t c = 0; c < 3; ++c)
    for (uint32_t v = 0; v < n; ++v) P.clusters[c].push_back(c * n + v);
  for (size_t i = 0; i < 3; ++i) {
    std::vector<std::vector<uint32_t>> e;
    for (uint32_t x : P.clusters[(i + 1) % 3])
      for (uint32_t y : P.clusters[(i + 2) % 3]) e.push_back({x, y});
    P.parts.push_back(UniformSet::from_sets(3 * n, 2, e));
  }
  return P;
}
}  // namespace

TEST_CASE("tolerance functions evaluate exactly") {
  auto F = F_kgamma(3, rat(1, 2));
  CHECK(F.coef == rat(1, 96));
  CHECK(F.exponent == 16);
  CHECK(F(rat(1)) == rat(1, 96) * pow(rat(1, 2), 16));
  auto R = reduction_tolerance(2, rat(1, 2));
  CHECK(R.exponent == 32);
  CHECK(R.coef == rat(1, 16));
  CHECK(ToleranceFn::constant(rat(1, 3))(rat(1, 7)) == rat(1, 3));
}

TEST_CASE("relative density conventions") {
  VertexClassSet cls({2, 2, 2});
  KPartiteKGraph H(cls);
  UniformSet S(6, 2);  // no (k-1)-sets, so no cliques
  auto c = relative_density(H, S);
  CHECK(c.cliques == 0);
  CHECK(c.density == 0);
  // H = K(S) gives density 1
  std::vector<std::vector<uint32_t>> t;
  for (uint32_t a = 0; a < 2; ++a)
    for (uint32_t b = 0; b < 2; ++b)
      for (uint32_t x = 0; x < 2; ++x) t.push_back({a, b, x});
  auto full = KPartiteKGraph::from_tuples(cls, t);
  auto P = complete_polyad(2);
  UniformSet all(6, 2);
  std::vector<std::vector<uint32_t>> edges;
  for (const auto& part : P.parts)
    for (auto code : part.codes()) edges.push_back(part.decode(code));
  auto S2 = UniformSet::from_sets(6, 2, edges);
  auto d = relative_density(full, S2);
  CHECK(d.cliques == 8);
  CHECK(d.density == 1);
}

TEST_CASE("polyad regularity: complete, vacuous and planted") {
  auto P = complete_polyad(2);
  auto K = clique_set(P);
  SUBCASE("H = K(P), d = 1") {
    for (auto eps : {rat(1, 10), rat(1)}) {
      auto v = is_eps_d_regular(K, P, eps, 1);
      CHECK(v.regular);
      CHECK(v.density == 1);
    }
    // ε = 0 admits clique-free sub-polyads, whose density is 0 by convention
    auto z = is_eps_d_regular(K, P, 0, 1);
    CHECK_FALSE(z.regular);
    REQUIRE(z.witness);
    CHECK(z.witness->cliques == 0);
  }
  SUBCASE("empty clique set is vacuous") {
    Polyad E = P;
    E.parts[0] = UniformSet(6, 2);
    auto v = is_eps_d_regular(UniformSet(6, 3), E, rat(1, 10), rat(1, 2));
    CHECK(v.vacuous);
    CHECK(v.regular);
  }
  SUBCASE("half of the cliques gives a witness that recounts") {
    std::vector<std::vector<uint32_t>> keep;
    for (auto code : K.codes()) {
      auto s = K.decode(code);
      if (s[0] == 0) keep.push_back(s);
    }
    auto H = UniformSet::from_sets(6, 3, keep);
    auto v = is_eps_d_regular(H, P, rat(1, 10), rat(1, 2));
    CHECK_FALSE(v.regular);
    REQUIRE(v.witness);
    auto again = recount(H, v.witness->S);
    CHECK(again.density == v.witness->density);
    CHECK(again.cliques == v.witness->cliques);
    CHECK(measured_eps(H, P, rat(1, 2)) == rat(1, 2));
  }
}

TEST_CASE("dense counting is exact on complete complexes") {
  auto C = complete_complex(VertexClassSet({3, 4, 5}));
  auto r = dense_counting_check(C, rat(1, 100));
  CHECK(r.cliques == 60);
  CHECK(r.predicted == 60);
  CHECK(r.slack == 0);
  CHECK(r.within_band);
}

TEST_CASE("dense counting matches brute force on a random complex") {
  auto C = random_complex(VertexClassSet({6, 6, 6}), {rat(1, 2)}, 3);
  C.validate();
  uint64_t brute = 0;
  const auto& E = C.rank(2);
  for (uint32_t a : C.classes[0])
    for (uint32_t b : C.classes[1])
      for (uint32_t c : C.classes[2]) brute += E.contains({a, b}) && E.contains({a, c}) && E.contains({b, c});
  auto r = dense_counting_check(C, rat(1, 2));
  CHECK(r.cliques == brute);
}

TEST_CASE("slicing identity") {
  auto C = random_complex(VertexClassSet({3, 3, 3}), {rat(1, 2)}, 5);
  auto r = slicing_check(C, C.classes[2], ToleranceFn::constant(rat(1, 2)), 1);
  CHECK(r.identity);
}

TEST_CASE("partition mass is monotone in epsilon") {
  VertexClassSet cls({2, 2, 2});
  std::vector<std::vector<uint32_t>> t;
  Rng rng(2);
  for (uint32_t a = 0; a < 2; ++a)
    for (uint32_t b = 0; b < 2; ++b)
      for (uint32_t c = 0; c < 2; ++c)
        if (rng.coin(rat(1, 2))) t.push_back({a, b, c});
  auto H = KPartiteKGraph::from_tuples(cls, t);
  auto P = KPartition::complete(VertexPartition::blocks(6, 3), 2);
  BigInt prev = -1;
  bool first = true;
  for (auto eps : {rat(0), rat(1, 100), rat(1, 10), rat(1, 4), rat(1, 2), rat(1)}) {
    auto v = is_eps_regular_partition(H, P, eps);
    if (!first) CHECK(v.irregular_mass <= prev);
    prev = v.irregular_mass;
    first = false;
  }
  CHECK(is_eps_regular_partition(H, P, 1).verdict == Verdict::Regular);
}

TEST_CASE("trivial partitions are f-equitable") {
  auto P = KPartition::complete(VertexPartition::blocks(6, 3), 2);
  RSParams params;
  params.a = {3, 1};
  params.f = ToleranceFn::constant(rat(1, 10));
  auto r = is_f_equitable(P, params);
  CHECK(r.equitable);
  auto uneven = KPartition::complete(VertexPartition(6, {{0}, {1, 2}, {3, 4, 5}}), 2);
  CHECK_FALSE(is_f_equitable(uneven, params).equitable);
}

TEST_CASE("reduction check for k = 2 reduces to pair checks") {
  BipartiteGraph g(4, 4);
  for (uint32_t u = 0; u < 4; ++u)
    for (uint32_t v = 0; v < 4; ++v) g.set_edge(u, v);
  auto H = to_kgraph(g);
  auto P = KPartition::complete(VertexPartition::blocks(8, 2), 1);
  auto r = reduction_check(H, P, rat(1, 4), std::nullopt, false);
  CHECK(r.hypothesis == Verdict::Regular);
  CHECK(r.conclusion == Verdict::Regular);
  CHECK(r.outcome == "confirmed");
}
