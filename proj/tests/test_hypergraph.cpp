#include "regbound/hypergraph.hpp"

#include <doctest.h>

#include <filesystem>

using namespace regbound;

TEST_CASE("Ackermann values") {
  CHECK(ackermann(1, 3).str() == "8");
  CHECK(ackermann(2, 1).str() == "2");
  CHECK(ackermann(2, 3).str() == "16");
  CHECK(ackermann(2, 4).str() == "65536");
  CHECK(ackermann(3, 1).str() == "2");
  CHECK(ackermann(3, 2).str() == "4");
  CHECK(ackermann(3, 3).str() == "65536");
  CHECK(ackermann(2, 5).exact);  // 2^65536 sits inside the default cutoff
  CHECK_FALSE(ackermann(2, 6).exact);
  auto small = ackermann(2, 5, 16);
  CHECK_FALSE(small.exact);
  CHECK(small.str().find("Ack_2") != std::string::npos);
}

TEST_CASE("delta_k = 2^(-8^k)") {
  CHECK(ParamSchedule::delta(1) == rat(1, 256));
  CHECK(ParamSchedule::delta(2) == Rational(BigInt(1), BigInt(1) << 64));
  CHECK(ParamSchedule::desk().delta_value(1).str() == "1/256");
}

TEST_CASE("desk schedule values") {
  auto d = ParamSchedule::desk();
  CHECK(d.t(1).str() == "2");
  CHECK(d.t(2).str() == "4");
  CHECK(d.t(3).str() == "8");
  CHECK(d.t(4).str() == "16");
  CHECK(d.A(3, 1).str() == "1");
  CHECK(minimal_class_size(3, 2, d) == 16);
  CHECK_FALSE(d.violations(3, 3).empty());
  auto back = ParamSchedule::from_json(d.to_json());
  CHECK(back.t(3).str() == "8");
  CHECK(schedule_eval(d, parse_sched_fn("t"), 3, 2).str() == "4");
  CHECK_THROWS_AS(parse_sched_fn("nope"), Error);
}

TEST_CASE("strict schedules stay symbolic") {
  auto s = ParamSchedule::strict_schedule();
  CHECK_FALSE(s.t(2).exact);
  try {
    build_pasted_instance(3, 2, 16, s, 1);
    FAIL("strict schedules must not materialize");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::Resource || e.code() == ErrorCode::Usage));
  }
}

TEST_CASE("chain partitions are nested") {
  auto d = ParamSchedule::desk();
  auto a = chain_partition(d, 16, 1), b = chain_partition(d, 16, 2), c = chain_partition(d, 16, 3);
  CHECK(a.size() == 2);
  CHECK(b.size() == 4);
  CHECK(c.size() == 8);
  CHECK(c.refines(b));
  CHECK(b.refines(a));
}

TEST_CASE("inductive families verify for k = 2 and k = 3") {
  auto d = ParamSchedule::desk();
  auto f2 = build_inductive_family(2, 2, minimal_class_size(2, 2, d), d, 3);
  CHECK(verify_family(f2).ok());
  // k = 2 delegates to the core construction: the members are the core's member graphs
  for (uint32_t j = 1; j <= 2; ++j)
    for (uint32_t b = 0; b < (1u << j); ++b) CHECK(f2.member_aux(j, b) == f2.core.member_graph(j, b));
  auto f3 = build_inductive_family(3, 2, 16, d, 3);
  auto r = verify_family(f3);
  CHECK(r.ok());
  for (uint32_t j = 1; j <= 2; ++j)
    for (uint32_t b = 0; b < (1u << j); ++b) {
      auto H = f3.member(j, b);
      CHECK(H.density() == Rational(1, 1u << j));
      CHECK(aux_graph(H, 3).graph == f3.member_aux(j, b));
    }
  CHECK_THROWS_AS(build_inductive_family(1, 2, 16, d, 3), Error);
  CHECK_THROWS_AS(build_inductive_family(3, 2, 17, d, 3), Error);
}

TEST_CASE("pasted instance density and beta analysis") {
  auto d = ParamSchedule::desk();
  auto inst = build_pasted_instance(3, 2, 16, d, 11);
  auto r = verify_pasted_instance(inst);
  CHECK(r.ok());
  // (2k / 2^k) 2^-s with k = 3, s = 2
  CHECK(r.density == rat(3, 16));
  CHECK(inst.H.density() == rat(3, 16));
  CHECK(inst.B.size() == 6);
  auto full = beta_star_analysis(inst, inst.chain(3));
  CHECK(full.beta_star == full.K);
  auto v0 = beta_star_analysis(inst, inst.V0);
  for (auto b : v0.beta) CHECK(b >= 1);
  // lag one class at level 2
  std::vector<uint32_t> lab(inst.H.classes().total());
  auto c3 = inst.chain(3), c2 = inst.chain(2);
  for (uint32_t v = 0; v < lab.size(); ++v) lab[v] = c3.cell_of(v);
  for (uint32_t v : inst.class_vertices(2)) lab[v] = 100000 + c2.cell_of(v);
  auto lag = beta_star_analysis(inst, VertexPartition::from_labels(lab));
  CHECK(lag.beta_star == 2);
  CHECK(lag.x == 2);
  CHECK(lag.edge == std::vector<uint32_t>{2, 3, 4});
}

TEST_CASE("pasted instances reload from their manifest") {
  auto d = ParamSchedule::desk();
  auto inst = build_pasted_instance(3, 2, 16, d, 4);
  auto dir = std::filesystem::temp_directory_path() / "regbound-unit-pasted";
  std::filesystem::remove_all(dir);
  save_pasted_instance(inst, dir.string());
  auto back = load_pasted_instance(dir.string());
  CHECK(back.H == inst.H);
  std::filesystem::remove_all(dir);
}

TEST_CASE("one-sided property on the chain and a refutation of the adversary") {
  auto d = ParamSchedule::desk();
  auto f3 = build_inductive_family(3, 2, 16, d, 7);
  auto P = chain_kpartition(f3, 2);
  auto rep = verify_onesided_property(f3, 2, 0, P, 1, rat(1, 4), false);
  CHECK(rep.outcome == "confirmed");
  auto A = adversarial_partition(f3, 1, 3);
  auto ref = refute_onesided(f3, 2, 0, A, 1, rat(1, 1 << 20), rat(1, 4));
  CHECK(ref.refutes_all);
  for (const auto& c : ref.certificates) CHECK(c.verified);
  CHECK_THROWS_AS(verify_onesided_property(f3, 1, 0, P, 5, rat(1, 4), false), Error);
}
