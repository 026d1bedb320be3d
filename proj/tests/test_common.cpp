#include "regbound/common.hpp"

#include <doctest.h>

#include <set>

using namespace regbound;

TEST_CASE("rational parsing and printing") {
  CHECK(parse_rational("3/4") == rat(3, 4));
  CHECK(parse_rational(" 0.25 ") == rat(1, 4));
  CHECK(parse_rational("-1.5") == rat(-3, 2));
  CHECK(parse_rational("7") == rat(7));
  CHECK(to_string(rat(6, 8)) == "3/4");
  CHECK(to_string(rat(-4, 2)) == "-2");
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational("x"), Error);
  CHECK_THROWS_AS(parse_rational(""), Error);
}

TEST_CASE("floor and ceiling of rationals") {
  CHECK(ceil_big(rat(7, 2)) == 4);
  CHECK(floor_big(rat(7, 2)) == 3);
  CHECK(ceil_big(rat(-7, 2)) == -3);
  CHECK(floor_big(rat(-7, 2)) == -4);
  CHECK(ceil_to_i64(rat(6, 3)) == 2);
}

TEST_CASE("binomials and powers") {
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(3, 5) == 0);
  CHECK(binomial(64, 32) == BigInt("1832624140942590534"));
  CHECK(pow(rat(1, 2), 10) == rat(1, 1024));
  CHECK(log2_exact(1024) == 10);
  CHECK(is_power_of_two(64));
  CHECK_FALSE(is_power_of_two(96));
}

TEST_CASE("radicals compare exactly") {
  Radical r(1, 64, 6);  // 64^(1/6) = 2
  CHECK(r.is_rational());
  CHECK(r.rational_value() == 2);
  CHECK(r.compare(rat(2)) == 0);
  Radical s(2, 2, 2);  // 2√2
  CHECK(s.compare(rat(2828, 1000)) > 0);
  CHECK(s.compare(rat(2829, 1000)) < 0);
  CHECK(s.ceil_mul(rat(1)) == 3);
  CHECK(s.ceil_mul(rat(0)) == 0);
  // √2 * √2 exactly 2, so ceil(√2 · √2) = 2 through the scaled radicand
  Radical t(1, 2, 2);
  CHECK(t.compare(Radical(1, 4, 4)) == 0);
  CHECK(t.ceil_mul(rat(10)) == 15);  // 14.142...
}

TEST_CASE("bit rows") {
  Bits b = Bits::from_indices(130, {0, 64, 129});
  CHECK(b.count() == 3);
  CHECK(b.test(129));
  CHECK_FALSE(b.test(128));
  b.reset(64);
  CHECK(b.indices() == std::vector<uint32_t>{0, 129});
}

TEST_CASE("seeded randomness is reproducible and label-separated") {
  CHECK(seed_for(7, "a") == seed_for(7, "a"));
  CHECK(seed_for(7, "a") != seed_for(7, "b"));
  CHECK(seed_for(7, "a") != seed_for(8, "a"));
  Rng r1(42), r2(42);
  for (int i = 0; i < 100; ++i) CHECK(r1.below(1000) == r2.below(1000));
  Rng r3(3);
  auto s = r3.sample_subset(50, 10);
  CHECK(s.size() == 10);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::set<uint32_t>(s.begin(), s.end()).size() == 10);
  Rng r4(5);
  int heads = 0;
  for (int i = 0; i < 4000; ++i) heads += r4.coin(rat(1, 4));
  CHECK(heads > 850);
  CHECK(heads < 1150);
}

TEST_CASE("range formatting round trip") {
  std::vector<uint32_t> v{0, 1, 2, 3, 7, 12, 13};
  CHECK(format_ranges(v) == "0-3 7 12-13");
  CHECK(parse_ranges("0-3 7 12-13") == v);
  CHECK(parse_ranges("").empty());
}

TEST_CASE("combination enumeration") {
  uint64_t count = 0;
  std::vector<uint32_t> last;
  for_each_combination(7, 3, [&](const std::vector<uint32_t>& c) {
    ++count;
    last = c;
    return true;
  });
  CHECK(count == 35);
  CHECK(last == std::vector<uint32_t>{4, 5, 6});
  count = 0;
  for_each_combination(7, 3, [&](const std::vector<uint32_t>&) { return ++count < 5; });
  CHECK(count == 5);
  count = 0;
  for_each_combination(3, 0, [&](const std::vector<uint32_t>& c) {
    CHECK(c.empty());
    ++count;
    return true;
  });
  CHECK(count == 1);
}

TEST_CASE("hashing is stable") {
  // FNV-1a 64 reference values
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}
