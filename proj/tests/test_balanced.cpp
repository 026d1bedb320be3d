#include "regbound/balanced.hpp"

#include <doctest.h>

#include <sstream>

using namespace regbound;

namespace {
BalanceSpec small_spec(uint32_t xcells, uint32_t m, uint32_t ycells, uint32_t ysize, const Rational& alpha) {
  BalanceSpec s;
  s.X = VertexPartition::blocks(uint64_t(xcells) * m, xcells);
  s.Y = VertexPartition::blocks(uint64_t(ycells) * ysize, ycells);
  for (uint32_t j = 0; j < ycells; ++j) s.F.push_back(s.Y.cell(j));
  s.alpha = Radical::of(alpha);
  s.beta = rat(1, 16);
  return s;
}

// From-scratch recount of the four conditions.
std::array<bool, 4> recount(const BipartiteGraph& g, const BalanceSpec& s) {
  std::array<bool, 4> ok{true, true, true, true};
  for (const auto& X : s.X.cells())
    for (uint32_t y = 0; y < g.right_size(); ++y) {
      uint64_t d = 0;
      for (uint32_t x : X) d += g.has_edge(x, y);
      if (2 * d != X.size()) ok[0] = false;
    }
  for (const auto& F : s.F)
    for (uint32_t x = 0; x < g.left_size(); ++x)
      for (uint32_t x2 = x + 1; x2 < g.left_size(); ++x2) {
        uint64_t agree = 0;
        for (uint32_t y : F) agree += g.has_edge(x, y) == g.has_edge(x2, y);
        if (Rational(agree) > (rat(1, 2) + s.beta) * Rational(F.size())) ok[1] = false;
      }
  for (const auto& X : s.X.cells())
    for (const auto& F : s.F)
      for (size_t i = 0; i < F.size(); ++i)
        for (size_t j = i + 1; j < F.size(); ++j) {
          uint64_t c = 0;
          for (uint32_t x : X) c += g.has_edge(x, F[i]) && g.has_edge(x, F[j]);
          if (s.alpha.compare(Rational(4 * c, X.size()) - 1) < 0) ok[2] = false;
        }
  for (const auto& Y : s.Y.cells())
    for (uint32_t y : Y) {
      bool found = false;
      for (uint32_t z : Y) {
        bool comp = true;
        for (uint32_t x = 0; x < g.left_size() && comp; ++x) comp = g.has_edge(x, y) != g.has_edge(x, z);
        found = found || comp;
      }
      if (!found) ok[3] = false;
    }
  return ok;
}
}  // namespace

TEST_CASE("spec validation") {
  auto s = small_spec(2, 4, 2, 4, rat(1, 2));
  CHECK_NOTHROW(s.validate());
  s.F.push_back({0, 1});  // not a union of Y-cells
  CHECK_THROWS_AS(s.validate(false), Error);
  auto odd = small_spec(2, 4, 2, 3, rat(1, 2));
  CHECK_THROWS_AS(odd.validate(), Error);
}

TEST_CASE("sampler forces equitability and complement closure") {
  auto s = small_spec(3, 8, 4, 8, rat(1, 2));
  BalanceCheckOptions o;
  o.mask = kEquitable | kComplementClosed;
  for (uint64_t seed = 0; seed < 30; ++seed) {
    auto g = sample_candidate(s, seed);
    auto r = verify_balanced(g.graph, s, o);
    CHECK(r.passed(kEquitable | kComplementClosed));
    // φ is an involution inside each Y-cell with complementary neighborhoods
    for (uint32_t y = 0; y < g.graph.right_size(); ++y) {
      uint32_t z = g.phi[y];
      CHECK(g.phi[z] == y);
      CHECK(s.Y.cell_of(z) == s.Y.cell_of(y));
      for (uint32_t x = 0; x < g.graph.left_size(); ++x) CHECK(g.graph.has_edge(x, y) != g.graph.has_edge(x, z));
    }
  }
}

TEST_CASE("verify_balanced agrees with a from-scratch recount") {
  BalanceCheckOptions o;
  o.early_exit = false;
  int agree = 0, total = 0;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    auto s = small_spec(2, 8, 2, 8, seed % 2 ? rat(1, 2) : rat(1));
    auto g = sample_candidate(s, seed);
    auto mine = recount(g.graph, s);
    auto r = verify_balanced(g.graph, s, o);
    for (int c = 0; c < 4; ++c) {
      ++total;
      agree += r.cond[c].passed == mine[c];
    }
  }
  CHECK(agree == total);
}

TEST_CASE("planted degree violation is reported as condition (i)") {
  auto s = small_spec(2, 4, 2, 4, rat(1));
  auto g = sample_candidate(s, 3).graph;
  // flip one edge: y=0 now has |X|/2 ± 1 neighbors in X-cell 0
  g.set_edge(0, 0, !g.has_edge(0, 0));
  auto r = verify_balanced(g, s);
  CHECK(r.first_violated() == 1);
  CHECK_FALSE(r.cond[0].passed);
}

TEST_CASE("empty family leaves only (i) and (iv)") {
  auto s = small_spec(2, 8, 2, 8, rat(1, 4));
  s.F.clear();
  auto g = sample_balanced(s, 7, 1);
  CHECK(g.attempts == 1);
  CHECK(g.report.passed(kAllConditions));
}

TEST_CASE("one-sixth count") {
  auto s = small_spec(2, 16, 2, 16, rat(1));
  auto g = sample_candidate(s, 1).graph;
  uint32_t nX = g.left_size(), nY = g.right_size();
  SUBCASE("point mass gives threshold zero") {
    std::vector<Rational> lam(nX, 0);
    lam[5] = 1;
    auto r = check_one_six(g, lam);
    CHECK(r.threshold == 0);
    CHECK(r.qualifying.size() == nY);
    CHECK(r.bound_holds);
  }
  SUBCASE("uniform weights") {
    std::vector<Rational> lam(nX, rat(1, nX));
    auto r = check_one_six(g, lam);
    CHECK(r.threshold == (1 - rat(1, nX)) / 8);
    // every y has exactly half of each X-cell: both sides carry mass 1/2
    CHECK(r.qualifying.size() == nY);
  }
  SUBCASE("two-point weights") {
    std::vector<Rational> lam(nX, 0);
    lam[0] = lam[1] = rat(1, 2);
    auto r = check_one_six(g, lam);
    CHECK(r.threshold == rat(1, 16));
    std::vector<uint32_t> expect;
    for (uint32_t y = 0; y < nY; ++y)
      if (g.has_edge(0, y) != g.has_edge(1, y)) expect.push_back(y);
    CHECK(r.qualifying == expect);
  }
  SUBCASE("invalid weights") {
    std::vector<Rational> lam(nX, 0);
    CHECK_THROWS_AS(check_one_six(g, lam), Error);
  }
}

TEST_CASE("one-twelve with a point mass") {
  auto s = small_spec(2, 4, 1, 8, rat(1));
  auto q = sample_candidate(s, 2).graph;  // 8 x 8 quotient
  std::vector<uint32_t> family(8);
  for (uint32_t i = 0; i < 8; ++i) family[i] = i;
  std::vector<Rational> lam(8, 0);
  lam[0] = 1;
  auto r = check_one_twelve(q, family, {0, 1, 2, 3}, lam, 1);
  CHECK(r.threshold_outside == 0);
  CHECK(r.threshold_inside == rat(1, 2));
}

TEST_CASE("phi serialization") {
  std::vector<uint32_t> phi{1, 0, 3, 2};
  std::stringstream ss;
  write_phi(ss, phi);
  CHECK(read_phi(ss) == phi);
}
