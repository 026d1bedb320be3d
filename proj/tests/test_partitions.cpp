#include "regbound/partitions.hpp"

#include <doctest.h>

#include <sstream>

using namespace regbound;

TEST_CASE("vertex partitions validate coverage") {
  auto P = VertexPartition::blocks(12, 3);
  CHECK(P.size() == 3);
  CHECK(P.cell(1) == std::vector<uint32_t>{4, 5, 6, 7});
  CHECK(P.equitable());
  CHECK(VertexPartition::singletons(12).refines(P));
  CHECK_FALSE(P.refines(VertexPartition::singletons(12)));
  CHECK_THROWS_AS(VertexPartition(4, {{0, 1}, {1, 2, 3}}), Error);
  CHECK_THROWS_AS(VertexPartition(4, {{0, 1}, {2}}), Error);
  auto L = VertexPartition::from_labels({2, 2, 0, 1, 0});
  CHECK(L.size() == 3);
  CHECK(L.cell_of(0) == L.cell_of(1));
}

TEST_CASE("approximate containment is strict") {
  CHECK(approx_subset(0, 10, 0));
  CHECK_FALSE(approx_subset(1, 10, rat(1, 10)));  // |S\T| < β|S| fails at equality
  CHECK(approx_subset(1, 10, rat(11, 100)));
}

TEST_CASE("beta refinement") {
  auto P = VertexPartition::blocks(16, 2);
  auto Q = VertexPartition::blocks(16, 4);
  auto r = refines_beta(Q, P, 0);
  CHECK(r.verdict);
  CHECK(r.mass_unassigned == 0);
  // shift every cell by one vertex: each Q-cell leaks 1/4 of its mass
  std::vector<uint32_t> labels(16);
  for (uint32_t v = 0; v < 16; ++v) labels[v] = ((v + 1) % 16) / 4;
  auto Qs = VertexPartition::from_labels(labels);
  CHECK_FALSE(refines_beta(Qs, P, rat(1, 4)).verdict);
  auto r2 = refines_beta(Qs, P, rat(1, 4) + rat(1, 100));
  CHECK(r2.verdict);
  CHECK(beta_host({0, 1, 2, 8}, P, rat(1, 2)) == 0);
  CHECK(beta_host({0, 1, 8, 9}, P, rat(1, 2)) == -1);
}

TEST_CASE("refinement union and size claim") {
  auto P = VertexPartition::blocks(16, 2);
  auto Q = VertexPartition::blocks(16, 8);
  auto u = refinement_union(Q, P, rat(1, 10));
  CHECK(u.symmetric_difference == 0);
  CHECK(u.within_bound);
  CHECK(check_refinement_size(Q, P).holds);
  // the claim presupposes Q ≺_{1/2} P
  CHECK_THROWS_AS(check_refinement_size(VertexPartition::trivial(16), VertexPartition::singletons(16)), Error);
}

TEST_CASE("cross sets against brute force") {
  auto P = VertexPartition::blocks(6, 3);
  auto c = cross_k(P, 2);
  uint64_t brute = 0;
  for (uint32_t a = 0; a < 6; ++a)
    for (uint32_t b = a + 1; b < 6; ++b) brute += P.cell_of(a) != P.cell_of(b);
  CHECK(c.size() == brute);
  CHECK(cross_count(P, 3) == 8);
  CHECK(cross_k(P, 3).size() == 8);
}

TEST_CASE("uniform sets") {
  auto U = UniformSet::from_sets(10, 3, {{3, 1, 2}, {9, 0, 5}, {1, 2, 3}});
  CHECK(U.size() == 2);
  CHECK(U.contains({1, 2, 3}));
  CHECK(U.decode(U.encode({5, 9, 0})) == std::vector<uint32_t>{0, 5, 9});
}

TEST_CASE("clique sets of a 3-polyad against brute force") {
  Polyad P;
  P.clusters = {{0, 1}, {2, 3}, {4, 5}};
  Rng rng(11);
  // part i avoids cluster i
  for (size_t i = 0; i < 3; ++i) {
    std::vector<std::vector<uint32_t>> edges;
    size_t a = (i + 1) % 3, b = (i + 2) % 3;
    for (uint32_t x : P.clusters[a])
      for (uint32_t y : P.clusters[b])
        if (rng.coin(rat(2, 3))) edges.push_back({x, y});
    P.parts.push_back(UniformSet::from_sets(6, 2, edges));
  }
  P.validate();
  auto K = clique_set(P);
  uint64_t brute = 0;
  for (uint32_t x : P.clusters[0])
    for (uint32_t y : P.clusters[1])
      for (uint32_t z : P.clusters[2]) {
        bool tri = P.parts[2].contains({x, y}) && P.parts[1].contains({x, z}) && P.parts[0].contains({y, z});
        brute += tri;
        CHECK(K.contains({x, y, z}) == tri);
      }
  CHECK(K.size() == brute);
}

TEST_CASE("complete k-partitions and serialization") {
  auto P1 = VertexPartition::blocks(6, 3);
  auto K = KPartition::complete(P1, 2);
  CHECK(K.arity() == 2);
  CHECK(K.layer(2).size() == 3);  // one cell per pair of clusters
  CHECK(K.cell_of(1, {4}) == 2);
  CHECK(K.cell_of(2, {0, 2}) >= 0);
  CHECK(K.cell_of(2, {0, 1}) == -1);
  auto U = under_polyad(K, 2, 0);
  CHECK(U.k() == 2);
  std::stringstream ss;
  write_kpartition(ss, K);
  CHECK(read_kpartition(ss) == K);
  std::stringstream ps;
  write_partition(ps, P1);
  CHECK(read_partition(ps) == P1);
}

TEST_CASE("restriction keeps induced structure") {
  auto K = KPartition::complete(VertexPartition::blocks(6, 3), 2);
  auto R = restrict_kpartition(K, {0, 1, 4, 5});
  CHECK(R.partition.p1().size() == 2);
  CHECK(R.partition.layer(2).size() == 1);
  CHECK(R.kept_vertices == std::vector<uint32_t>{0, 1, 4, 5});
  CHECK_THROWS_AS(restrict_kpartition(K, {0, 2, 4}), Error);
}
