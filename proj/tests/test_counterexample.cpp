#include "regbound/counterexample.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>

using namespace regbound;

namespace {
void check_decomposition(const std::vector<Rational>& x) {
  auto terms = convex_decompose(x);
  Rational norm = 0;
  for (const auto& v : x) norm += v;
  Rational wsum = 0;
  std::vector<Rational> back(x.size(), 0);
  for (const auto& t : terms) {
    CHECK(t.weight >= 0);
    wsum += t.weight;
    uint64_t ones = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      CHECK(t.y[i] <= 1);
      ones += t.y[i];
      if (t.y[i]) back[i] += t.weight;
    }
    CHECK(Rational(ones) == norm);
  }
  CHECK(wsum == 1);
  CHECK(back == x);
}

CounterexampleParams desk(uint64_t seed) {
  CounterexampleParams p;
  p.relaxed = true;
  p.k = 12;
  p.m = 3;
  p.seed = seed;
  return p;
}
}  // namespace

TEST_CASE("convex decomposition examples") {
  auto a = convex_decompose({rat(1, 2), rat(1, 2)});
  REQUIRE(a.size() == 2);
  CHECK(a[0].weight == rat(1, 2));
  CHECK(a[1].weight == rat(1, 2));
  auto b = convex_decompose({1, 0, 1});
  REQUIRE(b.size() == 1);
  CHECK(b[0].weight == 1);
  CHECK(b[0].y == std::vector<uint8_t>{1, 0, 1});
  check_decomposition({rat(3, 4), rat(1, 2), rat(3, 4)});
  check_decomposition({rat(1, 3), rat(1, 3), rat(1, 3), rat(1, 2), rat(1, 2)});
  check_decomposition({0, 0, 0});
  CHECK_THROWS_AS(convex_decompose({rat(1, 2), rat(1, 3)}), Error);
  CHECK_THROWS_AS(convex_decompose({rat(3, 2), rat(1, 2)}), Error);
}

TEST_CASE("convex decomposition fuzz") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = 2 + rng.below(8);
    std::vector<Rational> x(n);
    Rational sum = 0;
    for (size_t i = 0; i + 1 < n; ++i) {
      x[i] = Rational(static_cast<int64_t>(rng.below(13)), 12);
      sum += x[i];
    }
    // complete to an integral norm with the last coordinate when possible
    Rational last = ceil_big(sum) - sum;
    if (last > 1) continue;
    x[n - 1] = last;
    check_decomposition(x);
  }
}

TEST_CASE("parameter window") {
  CounterexampleParams p;
  CHECK(p.q() == rat(1, 5));
  CHECK(p.k_lower() == 1280);
  CHECK(p.k_upper() == rat(25, 32));
  CHECK_FALSE(p.violations().empty());
  try {
    p.validate();
    FAIL("defaults are outside the window");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Usage);
  }
  CounterexampleParams big;
  big.delta = rat(1, 2);
  big.p = rat(1, 100000);  // q = 3e-5, window [6826667, 34722]: empty
  CHECK_FALSE(big.violations().empty());
  auto back = CounterexampleParams::from_json(desk(4).to_json());
  CHECK(back.k == 12);
  CHECK(back.m == 3);
  CHECK(back.relaxed);
  CHECK(back.seed == 4);
}

TEST_CASE("relaxed builds are triangle free, dense enough and blow up exactly") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto inst = build_triangle_free(desk(seed));
    CHECK(oracle::naive_triangles(inst.base[0], inst.base[1], inst.base[2]) == 0);
    CHECK(oracle::naive_triangles(inst.blown[0], inst.blown[1], inst.blown[2]) == 0);
    CHECK(count_triangles(inst.base) == 0);
    for (int i = 0; i < 3; ++i) {
      CHECK(inst.base[i].density() >= inst.params.p);
      CHECK(inst.blown[i].density() == inst.base[i].density());
      CHECK(inst.blown[i] == blowup(inst.base[i], 3));
    }
    // deletions balanced within one of a third, never more than the triangles present
    const auto& d = inst.audit.deletions_per_pair;
    uint64_t total = d[0] + d[1] + d[2];
    CHECK(total == inst.audit.deletions.size());
    for (int i = 0; i < 3; ++i) {
      CHECK(3 * d[i] + 3 >= total);
      CHECK(3 * d[i] <= total + 3);
    }
    CHECK(total <= inst.audit.attempts.at(inst.audit.kept_attempt).triangles);
    auto r = verify_counterexample(inst);
    CHECK(r.triangle_free);
    CHECK(r.density_at_least_p);
    CHECK(r.blowup_exact);
    CHECK(r.ok());
  }
}

TEST_CASE("triangle counting agrees with brute force") {
  Tripartite g{oracle::random_graph(9, 9, rat(1, 2), 1), oracle::random_graph(9, 9, rat(1, 2), 2),
               oracle::random_graph(9, 9, rat(1, 2), 3)};
  CHECK(count_triangles(g) == oracle::naive_triangles(g[0], g[1], g[2]));
  CHECK(list_triangles(g).size() == count_triangles(g));
}

TEST_CASE("the strengthened property implies the pair check") {
  // cross-validation on the base pairs of several builds
  for (uint64_t seed = 0; seed < 6; ++seed) {
    auto inst = build_triangle_free(desk(seed));
    auto r = verify_counterexample(inst);
    for (int i = 0; i < 3; ++i)
      if (r.property[i]) CHECK(r.star_regular[i]);
  }
}

TEST_CASE("degenerate all-deleted instance") {
  auto inst = build_triangle_free(desk(1));
  for (auto& g : inst.base) g = BipartiteGraph(g.left_size(), g.right_size());
  for (auto& g : inst.blown) g = BipartiteGraph(g.left_size(), g.right_size());
  auto r = verify_counterexample(inst);
  CHECK(r.triangle_free);
  CHECK(r.base_density[0] == 0);
  CHECK_FALSE(r.density_at_least_p);
}

TEST_CASE("strict mode refuses impossible parameters") {
  CounterexampleParams p;
  p.k = 12;
  try {
    build_triangle_free(p);
    FAIL("expected a usage error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Usage);
  }
}

TEST_CASE("save and load") {
  auto inst = build_triangle_free(desk(2));
  auto dir = std::filesystem::temp_directory_path() / "regbound-unit-ce";
  std::filesystem::remove_all(dir);
  save_counterexample(inst, dir.string());
  auto back = load_counterexample(dir.string());
  for (int i = 0; i < 3; ++i) CHECK(back.base[i] == inst.base[i]);
  std::filesystem::remove_all(dir);
}
