#include "regbound/graphs.hpp"

#include <doctest.h>

#include <sstream>

using namespace regbound;

namespace {
BipartiteGraph random_graph(uint32_t l, uint32_t r, const Rational& p, uint64_t seed) {
  BipartiteGraph g(l, r);
  Rng rng(seed);
  for (uint32_t u = 0; u < l; ++u)
    for (uint32_t v = 0; v < r; ++v)
      if (rng.coin(p)) g.set_edge(u, v);
  return g;
}
}  // namespace

TEST_CASE("bipartite basics") {
  BipartiteGraph g(3, 70);
  g.set_edge(0, 0);
  g.set_edge(0, 69);
  g.set_edge(2, 65);
  CHECK(g.edge_count() == 3);
  CHECK(g.degree(0) == 2);
  CHECK(g.density() == rat(3, 210));
  CHECK(g.transposed().has_edge(69, 0));
  CHECK(g.complement().edge_count() == 207);
  g.set_edge(0, 0, false);
  CHECK_FALSE(g.has_edge(0, 0));
  CHECK(codegree(g, Side::Left, 0, 2) == 0);
  CHECK(edges_between(g, {0, 2}, {65, 69}) == 2);
  CHECK(density_between(g, {0, 2}, {65, 69}) == rat(1, 2));
}

TEST_CASE("codegree against direct count") {
  auto g = random_graph(9, 11, rat(1, 2), 3);
  for (uint32_t a = 0; a < 9; ++a)
    for (uint32_t b = 0; b < 9; ++b) {
      uint64_t c = 0;
      for (uint32_t v = 0; v < 11; ++v) c += g.has_edge(a, v) && g.has_edge(b, v);
      CHECK(codegree(g, Side::Left, a, b) == c);
    }
}

TEST_CASE("blowup replaces vertices by independent sets") {
  auto g = random_graph(4, 5, rat(1, 2), 9);
  auto b = blowup(g, 3);
  CHECK(b.left_size() == 12);
  CHECK(b.right_size() == 15);
  CHECK(b.density() == g.density());
  for (uint32_t u = 0; u < 12; ++u)
    for (uint32_t v = 0; v < 15; ++v) CHECK(b.has_edge(u, v) == g.has_edge(u / 3, v / 3));
  auto b2 = blowup(g, 2, 1);
  CHECK(b2.left_size() == 8);
  CHECK(b2.right_size() == 5);
}

TEST_CASE("k-partite k-graphs encode mixed radix in class order") {
  VertexClassSet cls({2, 3, 4});
  CHECK(cls.offset(2) == 5);
  CHECK(cls.total() == 9);
  CHECK(cls.product() == 24);
  auto h = KPartiteKGraph::from_tuples(cls, {{1, 2, 3}, {0, 0, 0}, {1, 2, 3}});
  CHECK(h.edge_count() == 2);
  CHECK(h.contains({1, 2, 3}));
  CHECK_FALSE(h.contains({1, 2, 2}));
  CHECK(h.decode(h.encode({1, 0, 3})) == std::vector<uint32_t>{1, 0, 3});
  CHECK(h.density() == rat(2, 24));
  CHECK_THROWS_AS(KPartiteKGraph::from_tuples(cls, {{2, 0, 0}}), Error);
}

TEST_CASE("aux graph and lift are inverse") {
  VertexClassSet cls({2, 3, 2});
  std::vector<std::vector<uint32_t>> tuples;
  Rng rng(4);
  for (uint32_t a = 0; a < 2; ++a)
    for (uint32_t b = 0; b < 3; ++b)
      for (uint32_t c = 0; c < 2; ++c)
        if (rng.coin(rat(1, 2))) tuples.push_back({a, b, c});
  auto h = KPartiteKGraph::from_tuples(cls, tuples);
  for (size_t axis = 1; axis <= 3; ++axis) {
    auto aux = aux_graph(h, axis);
    CHECK(aux.graph.edge_count() == h.edge_count());
    CHECK(aux.graph.right_size() == cls.sizes[axis - 1]);
  }
  auto aux = aux_graph(h, 3);
  CHECK(lift_graph_to_kgraph(aux.graph, aux.left_sizes) == h);
  // left index is the mixed-radix code of the remaining classes
  for (const auto& t : tuples) {
    uint64_t left = aux.encode_left({t[0], t[1]});
    CHECK(aux.graph.has_edge(static_cast<uint32_t>(left), t[2]));
    CHECK(aux.decode_left(left) == std::vector<uint32_t>{t[0], t[1]});
  }
}

TEST_CASE("bipartite and 2-graph conversions") {
  auto g = random_graph(6, 7, rat(1, 3), 2);
  auto h = to_kgraph(g);
  CHECK(h.edge_count() == g.edge_count());
  CHECK(to_bipartite(h) == g);
}

TEST_CASE("text and binary serialization round trip") {
  auto g = random_graph(13, 70, rat(1, 2), 5);
  auto h = to_kgraph(g);
  std::stringstream t;
  write_text(t, h);
  CHECK(read_text(t) == h);
  std::stringstream b;
  write_binary(b, g);
  CHECK(read_binary_bipartite(b) == g);
  std::stringstream b2;
  write_binary(b2, h);
  CHECK(read_binary_kgraph(b2) == h);
  CHECK(content_hash(g) == content_hash(random_graph(13, 70, rat(1, 2), 5)));
  auto g2 = g;
  g2.set_edge(0, 0, !g.has_edge(0, 0));
  CHECK(content_hash(g) != content_hash(g2));
  std::istringstream bad("kgraph 1\nclasses 2 2\nedges 1\n5 0\n");
  CHECK_THROWS_AS(read_text(bad), Error);
}
