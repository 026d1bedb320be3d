#include "regbound/hypergraph.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace regbound {

using nlohmann::json;
namespace fs = std::filesystem;

// ---- big values ----
BigInt BigValue::integer() const {
  if (!is_integer()) fail(ErrorCode::Usage, "expected an exact integer, got " + str());
  return boost::multiprecision::numerator(value);
}

uint64_t BigValue::index(const std::string& what, uint64_t limit) const {
  if (!exact) fail(ErrorCode::Resource, what + " = " + expr + " is not materializable");
  BigInt v = integer();
  if (v < 0 || v > limit) fail(ErrorCode::Resource, what + " = " + str() + " is out of range");
  return static_cast<uint64_t>(v);
}

std::string BigValue::str() const {
  if (!exact) return expr;
  if (boost::multiprecision::denominator(value) == 1) {
    BigInt v = boost::multiprecision::numerator(value);
    if (v > BigInt(uint64_t(1) << 63) && (v & (v - 1)) == 0) return "2^" + std::to_string(boost::multiprecision::msb(v));
  }
  return to_string(value);
}

uint64_t default_cutoff_bits() { return uint64_t(1) << 17; }

BigValue pow2(const BigValue& exponent, uint64_t cutoff_bits) {
  if (exponent.exact) {
    BigInt x = exponent.integer();
    if (x < 0) fail(ErrorCode::Usage, "negative exponent");
    if (x <= cutoff_bits) return BigValue::of(Rational(BigInt(1) << static_cast<unsigned>(x)));
  }
  return BigValue::symbolic("2^(" + exponent.str() + ")");
}

namespace {

BigValue ack_value(uint32_t k, const BigValue& n, uint64_t cutoff) {
  if (!n.exact || n.integer() > cutoff)
    return k == 1 ? pow2(n, cutoff) : BigValue::symbolic("Ack_" + std::to_string(k) + "(" + n.str() + ")");
  if (k == 1) return pow2(n, cutoff);
  uint64_t reps = static_cast<uint64_t>(n.integer());
  BigValue v = BigValue::of(1);
  for (uint64_t r = 0; r < reps; ++r) {
    v = ack_value(k - 1, v, cutoff);
    if (!v.exact) return BigValue::symbolic("Ack_" + std::to_string(k) + "(" + n.str() + ")");
  }
  return v;
}

BigValue divide(const BigValue& a, const BigValue& b) {
  if (a.exact && b.exact) return BigValue::of(a.value / b.value);
  return BigValue::symbolic("(" + a.str() + ")/(" + b.str() + ")");
}

constexpr uint64_t kMaxRecursion = 1u << 16;

}  // namespace

BigValue ackermann(uint32_t k, uint64_t n, uint64_t cutoff_bits) {
  require(k >= 1, "Ackermann level must be at least 1");
  return ack_value(k, BigValue::of(n), cutoff_bits);
}

std::string to_string(SchedFn f) {
  switch (f) {
    case SchedFn::T: return "t";
    case SchedFn::E: return "e";
    case SchedFn::FStar: return "f*";
    case SchedFn::A: return "A";
    case SchedFn::AStar: return "A*";
    case SchedFn::M: return "m";
    case SchedFn::Delta: return "delta";
  }
  return "?";
}

SchedFn parse_sched_fn(const std::string& name) {
  for (SchedFn f : {SchedFn::T, SchedFn::E, SchedFn::FStar, SchedFn::A, SchedFn::AStar, SchedFn::M, SchedFn::Delta})
    if (to_string(f) == name) return f;
  fail(ErrorCode::Usage, "unknown schedule function '" + name + "'");
}

// ---- schedule ----
ParamSchedule ParamSchedule::desk() {
  ParamSchedule p;
  p.t1 = 2;
  p.e_table = {Rational(1), Rational(4, 3), Rational(2)};
  p.A1 = {{3, 1}};
  return p;
}

ParamSchedule ParamSchedule::strict_schedule() {
  ParamSchedule p;
  p.strict = true;
  return p;
}

namespace {

struct Evaluator {
  const ParamSchedule& s;

  BigValue e(const BigValue& i) const {
    if (!i.exact || i.integer() > kMaxRecursion) {
      if (s.strict) return pow2(BigValue::symbolic(i.str() + "+10"), s.cutoff_bits);
      return BigValue::of(s.e_table.back());
    }
    uint64_t x = i.index("i");
    require(x >= 1, "schedule index must be at least 1");
    if (s.strict) return BigValue::of(Rational(BigInt(1) << static_cast<unsigned>(x + 10)));
    require(!s.e_table.empty(), "desk schedule needs at least one e entry");
    return BigValue::of(s.e_table[std::min<uint64_t>(x, s.e_table.size()) - 1]);
  }

  BigValue t(const BigValue& i) const {
    if (!i.exact) return BigValue::symbolic("t(" + i.str() + ")");
    BigInt target = i.integer();
    require(target >= 1, "t is defined from index 1");
    BigValue v = BigValue::of(s.strict ? Rational(BigInt(1) << 200) : Rational(s.t1));
    for (uint64_t j = 1; BigInt(j) < target; ++j) {
      if (j > kMaxRecursion) return BigValue::symbolic("t(" + i.str() + ")");
      BigValue ex = divide(v, e(BigValue::of(j)));
      if (ex.exact && boost::multiprecision::denominator(ex.value) != 1)
        fail(ErrorCode::Usage, "t(" + std::to_string(j) + ")/e(" + std::to_string(j) + ") = " + ex.str() +
                                   " is not an integer: misconfigured schedule");
      v = pow2(ex, s.cutoff_bits);
      if (!v.exact && BigInt(j + 1) < target) return BigValue::symbolic("t(" + i.str() + ")");
    }
    return v;
  }

  BigValue f_star(const BigValue& fi, const BigValue& i) const {
    BigValue r = divide(t(fi), e(i));
    if (r.exact && (boost::multiprecision::denominator(r.value) != 1 || r.value < 1))
      fail(ErrorCode::Usage, "f*(" + i.str() + ") = " + r.str() + " is not a positive integer: misconfigured schedule");
    return r;
  }

  BigValue A(uint32_t k, const BigValue& i) const {
    require(k >= 2, "A_k needs k >= 2");
    if (k == 2) return i;
    if (!i.exact || i.integer() > kMaxRecursion)
      return BigValue::symbolic("A_" + std::to_string(k) + "(" + i.str() + ")");
    uint64_t x = i.index("i");
    require(x >= 1, "A_k is defined from index 1");
    if (x == 1) {
      if (s.strict) return pow2(pow2(BigValue::of(3 * k + 2), s.cutoff_bits), s.cutoff_bits);
      auto it = s.A1.find(k);
      if (it == s.A1.end()) fail(ErrorCode::Usage, "desk schedule has no A_" + std::to_string(k) + "(1)");
      return BigValue::of(it->second);
    }
    return A(k - 1, A_star(k, BigValue::of(x - 1)));
  }

  BigValue A_star(uint32_t k, const BigValue& i) const { return f_star(A(k, i), i); }

  BigValue m(uint32_t k, const BigValue& i) const {
    BigValue v = i;
    for (uint32_t kk = k; kk >= 2; --kk) v = A_star(kk, v);
    return v;
  }
};

}  // namespace

BigValue ParamSchedule::e(uint64_t i) const { return Evaluator{*this}.e(BigValue::of(i)); }
BigValue ParamSchedule::t(const BigValue& i) const { return Evaluator{*this}.t(i); }
BigValue ParamSchedule::f_star(const BigValue& fi, uint64_t i) const {
  return Evaluator{*this}.f_star(fi, BigValue::of(i));
}
BigValue ParamSchedule::A(uint32_t k, uint64_t i) const { return Evaluator{*this}.A(k, BigValue::of(i)); }
BigValue ParamSchedule::A_star(uint32_t k, uint64_t i) const { return Evaluator{*this}.A_star(k, BigValue::of(i)); }
BigValue ParamSchedule::m(uint32_t k, uint64_t i) const {
  require(k >= 2, "m_k needs k >= 2");
  return Evaluator{*this}.m(k, BigValue::of(i));
}

Rational ParamSchedule::delta(uint32_t k) {
  require(k >= 1 && k <= 5, "delta_k is kept exact for 1 <= k <= 5");
  return Rational(1) / Rational(BigInt(1) << (1u << (3 * k)));
}

BigValue ParamSchedule::delta_value(uint32_t k) const {
  require(k >= 1, "delta_k needs k >= 1");
  if (3 * uint64_t(k) <= 62 && (uint64_t(1) << (3 * k)) <= cutoff_bits)
    return BigValue::of(Rational(1) / Rational(BigInt(1) << static_cast<unsigned>(uint64_t(1) << (3 * k))));
  return BigValue::symbolic("2^(-8^" + std::to_string(k) + ")");
}

std::vector<ScheduleViolation> ParamSchedule::violations(uint32_t k, uint64_t upto) const {
  std::vector<ScheduleViolation> out;
  if (strict) return out;
  auto add = [&](std::string inv, std::string det) { out.push_back({std::move(inv), std::move(det)}); };
  add("t(1) = 2^200", "t(1) = " + std::to_string(t1));  // a 64-bit t1 never reaches 2^200
  for (uint64_t i = 1; i <= upto; ++i) {
    BigValue ei = e(i);
    if (ei.value != Rational(BigInt(1) << static_cast<unsigned>(i + 10)))
      add("e(i) = 2^(i+10)", "e(" + std::to_string(i) + ") = " + ei.str());
  }
  for (uint64_t i = 1; i <= upto; ++i) {
    BigValue ti = t(i);
    if (!ti.exact) break;
    BigInt v = ti.integer();
    if ((v & (v - 1)) != 0) add("t(i) is a power of 2", "t(" + std::to_string(i) + ") = " + ti.str());
    if (i >= 2) {
      BigValue tp = t(i - 1);
      if (tp.exact && ti.value < 4 * tp.value)
        add("t(i) >= 4 t(i-1)", "t(" + std::to_string(i) + ") = " + ti.str() + ", t(" + std::to_string(i - 1) + ") = " + tp.str());
    }
  }
  for (uint32_t kk = 3; kk <= k; ++kk) {
    for (uint64_t i = 1; i <= upto; ++i) {
      BigValue a;
      try {
        a = A(kk, i);
      } catch (const Error&) {
        break;
      }
      if (!a.exact) break;
      BigValue ack = ackermann(kk, i, cutoff_bits);
      if (!ack.exact || a.value < ack.value)
        add("A_k(i) >= Ack_k(i)", "A_" + std::to_string(kk) + "(" + std::to_string(i) + ") = " + a.str() +
                                      " < Ack_" + std::to_string(kk) + "(" + std::to_string(i) + ") = " + ack.str());
    }
  }
  return out;
}

namespace {
Rational json_rational(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<int64_t>());
  fail(ErrorCode::Usage, "expected a rational, got " + j.dump());
}

json schedule_json(const ParamSchedule& s) {
  json j;
  j["strict"] = s.strict;
  j["cutoff_bits"] = s.cutoff_bits;
  j["t1"] = s.t1;
  j["e"] = json::array();
  for (const auto& e : s.e_table) j["e"].push_back(to_string(e));
  j["A1"] = json::object();
  for (const auto& [k, v] : s.A1) j["A1"][std::to_string(k)] = v;
  j["core_alpha"] = to_string(s.core_alpha);
  return j;
}

ParamSchedule schedule_from(const json& j) {
  ParamSchedule s;
  s.strict = j.value("strict", false);
  s.cutoff_bits = j.value("cutoff_bits", default_cutoff_bits());
  s.t1 = j.value("t1", uint64_t(2));
  s.e_table.clear();
  if (j.contains("e"))
    for (const auto& x : j["e"]) s.e_table.push_back(json_rational(x));
  if (j.contains("A1"))
    for (const auto& [k, v] : j["A1"].items()) s.A1[static_cast<uint32_t>(std::stoul(k))] = v.get<uint64_t>();
  if (j.contains("core_alpha")) s.core_alpha = json_rational(j["core_alpha"]);
  if (!s.strict) {
    if (s.e_table.empty()) fail(ErrorCode::Usage, "desk schedule needs a non-empty e list");
    for (const auto& e : s.e_table)
      if (e <= 0) fail(ErrorCode::Usage, "e entries must be positive");
    if (s.t1 < 2 || !is_power_of_two(s.t1)) fail(ErrorCode::Usage, "t1 must be a power of two >= 2");
  }
  if (s.core_alpha <= 0 || s.core_alpha > 1) fail(ErrorCode::Usage, "core_alpha must lie in (0,1]");
  return s;
}
}  // namespace

std::string ParamSchedule::to_json() const { return schedule_json(*this).dump(2); }

ParamSchedule ParamSchedule::from_json(const std::string& text) {
  try {
    return schedule_from(json::parse(text));
  } catch (const json::exception& e) {
    fail(ErrorCode::Usage, std::string("malformed schedule: ") + e.what());
  }
}

BigValue schedule_eval(const ParamSchedule& sched, SchedFn which, uint32_t k, uint64_t i) {
  switch (which) {
    case SchedFn::T: return sched.t(i);
    case SchedFn::E: return sched.e(i);
    case SchedFn::FStar: return sched.f_star(BigValue::of(i), i);
    case SchedFn::A: return sched.A(k, i);
    case SchedFn::AStar: return sched.A_star(k, i);
    case SchedFn::M: return sched.m(k, i);
    case SchedFn::Delta: return sched.delta_value(k);
  }
  fail(ErrorCode::Internal, "unhandled schedule function");
}

VertexPartition chain_partition(const ParamSchedule& sched, uint64_t n, uint64_t level) {
  uint64_t cells = sched.t(level).index("t(" + std::to_string(level) + ")", n);
  if (!is_power_of_two(cells) || n % cells) fail(ErrorCode::Usage, "t(" + std::to_string(level) + ") must divide the class size");
  return VertexPartition::blocks(n, cells);
}

// ---- inductive family ----
namespace {

uint64_t ipow(uint64_t b, uint32_t e) {
  uint64_t r = 1;
  for (uint32_t i = 0; i < e; ++i) {
    if (r > (uint64_t(1) << 40) / b) fail(ErrorCode::Resource, "product of class sizes is too large");
    r *= b;
  }
  return r;
}

uint64_t idx(const BigValue& v, const std::string& what) { return v.index(what, uint64_t(1) << 40); }

std::string lbl(const char* name, uint64_t i) { return std::string(name) + "(" + std::to_string(i) + ")"; }

GrowthProfile family_profile(uint32_t s, const std::vector<uint64_t>& R, const std::vector<Rational>& e,
                             uint64_t L_ground, uint64_t R_ground, const ParamSchedule& sched) {
  GrowthProfile p;
  p.s = s;
  p.R_sizes = R;
  p.e = e;
  p.alpha.assign(s, sched.core_alpha);
  uint64_t Ls = p.L_sizes().back();
  if (L_ground % Ls || R_ground % R.back())
    fail(ErrorCode::Usage, "class size is not a multiple of the finest partition sizes");
  p.blowup_left = static_cast<uint32_t>(L_ground / Ls);
  p.blowup_right = static_cast<uint32_t>(R_ground / R.back());
  p.validate();
  return p;
}

// Descend the in/out split of 𝒢_1..𝒢_j from (left position, right vertex).
uint32_t core_member(const CoreSequence& seq, uint32_t j, uint64_t lpos, uint64_t r) {
  uint32_t b = 0;
  for (uint32_t l = 1; l <= j; ++l) {
    uint32_t Lc = static_cast<uint32_t>(lpos / (seq.L_ground() / seq.L_count(l)));
    uint32_t Rc = static_cast<uint32_t>(r / (seq.R_ground() / seq.R_count(l)));
    b = seq.quotient(l, 2 * b).has_edge(Lc, Rc) ? 2 * b : 2 * b + 1;
  }
  return b;
}

}  // namespace

VertexClassSet InductiveFamily::classes() const { return VertexClassSet(std::vector<uint64_t>(k, n)); }

BipartiteGraph InductiveFamily::member_aux(uint32_t j, uint32_t b) const {
  require(j >= 1 && j <= s && b < member_count(j), "family member out of range");
  BipartiteGraph g = core.member_graph(j, b);
  if (k == 2) return g;
  BipartiteGraph out(g.left_size(), g.right_size());
  for (uint32_t x = 0; x < g.left_size(); ++x) std::memcpy(out.row_mut(x), g.row(left_order[x]), g.words() * 8);
  return out;
}

KPartiteKGraph InductiveFamily::member(uint32_t j, uint32_t b) const {
  return lift_graph_to_kgraph(member_aux(j, b), std::vector<uint64_t>(k - 1, n));
}

uint32_t InductiveFamily::member_of(uint32_t j, const std::vector<uint32_t>& tuple) const {
  require(tuple.size() == k, "tuple arity mismatch");
  require(j >= 1 && j <= s, "level out of range");
  uint64_t x = 0;
  for (uint32_t h = 0; h + 1 < k; ++h) {
    require(tuple[h] < n, "tuple coordinate out of range");
    x = x * n + tuple[h];
  }
  require(tuple[k - 1] < n, "tuple coordinate out of range");
  uint64_t pos = k == 2 ? x : left_order[x];
  return core_member(core, j, pos, tuple[k - 1]);
}

uint64_t minimal_class_size(uint32_t k, uint32_t s, const ParamSchedule& sched) {
  require(k >= 2 && s >= 1, "need k >= 2 and s >= 1");
  uint64_t m = idx(sched.m(k, s), "m_k(s)");
  uint64_t n = idx(sched.t(m), lbl("t", m));
  // The left product must also split into 2^{A_k*(s)} equal members.
  if (k >= 3) {
    uint64_t sp = idx(sched.A_star(k, s), "A_k*(s)");
    while (sp > 0 && ipow(n, k - 1) % (uint64_t(1) << std::min<uint64_t>(sp, 63)) != 0) n *= 2;
  }
  return n;
}

InductiveFamily build_inductive_family(uint32_t k, uint32_t s, uint64_t n, const ParamSchedule& sched, uint64_t seed) {
  require(k >= 2, "k must be at least 2");
  require(s >= 1, "s must be at least 1");
  if (sched.strict) fail(ErrorCode::Usage, "strict schedules are symbolic; build with a desk schedule");
  InductiveFamily fam;
  fam.k = k;
  fam.s = s;
  fam.n = n;
  fam.sched = sched;
  fam.seed = seed;
  fam.chain_levels = idx(sched.m(k, s), "m_k(s)");
  for (uint32_t j = 1; j <= s; ++j) fam.V_levels.push_back(idx(sched.A(k, j), lbl("A_k", j)));
  if (fam.V_levels.back() >= fam.chain_levels)
    fail(ErrorCode::Usage, "schedule incompatibility: A_k(s) = " + std::to_string(fam.V_levels.back()) +
                               " must be below m_k(s) = " + std::to_string(fam.chain_levels));
  uint64_t tm = idx(sched.t(fam.chain_levels), "t(m)");
  if (n < tm || n % tm) fail(ErrorCode::Usage, "class size must be a positive multiple of t(m) = " + std::to_string(tm));

  if (k == 2) {
    std::vector<uint64_t> R;
    std::vector<Rational> e;
    for (uint32_t j = 1; j <= s; ++j) {
      R.push_back(idx(sched.t(j), lbl("t", j)));
      e.push_back(sched.e(j).value);
    }
    GrowthProfile p = family_profile(s, R, e, n, n, sched);
    auto L = p.L_sizes();
    for (uint32_t j = 1; j <= s; ++j)
      if (L[j - 1] != idx(sched.t(j + 1), lbl("t", j + 1)))
        fail(ErrorCode::Internal, "base profile does not reproduce t(j+1)");
    fam.core = build_core_sequence(p, seed_for(seed, "family/k=2/core"));
    return fam;
  }

  uint64_t sp = idx(sched.A_star(k, s), "A_k*(s)");
  if (sp > 30) fail(ErrorCode::Resource, "A_k*(s) = " + std::to_string(sp) + " members do not fit");
  for (uint32_t j = 1; j <= s; ++j) fam.F_levels.push_back(idx(sched.A_star(k, j), lbl("A_k*", j)));
  auto lower = std::make_shared<InductiveFamily>(
      build_inductive_family(k - 1, static_cast<uint32_t>(sp), n, sched, seed_for(seed, "family/lower")));
  if (lower->chain_levels != fam.chain_levels)
    fail(ErrorCode::Internal, "m_{k-1}(s') differs from m_k(s)");
  fam.lower = lower;

  // Order the product V^1 x ... x V^{k-1} by finest 𝓕-member, so every 𝓕_(j) becomes contiguous blocks.
  uint64_t N = ipow(n, k - 1);
  std::vector<uint32_t> label(N, UINT32_MAX);
  for (uint32_t c = 0; c < lower->member_count(static_cast<uint32_t>(sp)); ++c) {
    BipartiteGraph g = lower->member_aux(static_cast<uint32_t>(sp), c);
    for (uint32_t l = 0; l < g.left_size(); ++l)
      for (uint32_t v = 0; v < g.right_size(); ++v)
        if (g.has_edge(l, v)) label[uint64_t(l) * n + v] = c;
  }
  std::vector<uint64_t> count(uint64_t(1) << sp, 0);
  for (uint32_t c : label) {
    if (c == UINT32_MAX) fail(ErrorCode::Verification, "lower family does not cover the product");
    ++count[c];
  }
  for (uint64_t c : count)
    if (c != N >> sp) fail(ErrorCode::Verification, "lower family members are not equitable");
  fam.left_order.resize(N);
  std::vector<uint64_t> next(count.size());
  for (size_t c = 0; c < next.size(); ++c) next[c] = c * (N >> sp);
  for (uint64_t x = 0; x < N; ++x) fam.left_order[x] = static_cast<uint32_t>(next[label[x]]++);

  std::vector<uint64_t> R;
  std::vector<Rational> e;
  for (uint32_t j = 1; j <= s; ++j) {
    R.push_back(idx(sched.t(fam.V_levels[j - 1]), "t(A_k(j))"));
    e.push_back(sched.e(j).value);
  }
  GrowthProfile p = family_profile(s, R, e, N, n, sched);
  auto L = p.L_sizes();
  for (uint32_t j = 1; j <= s; ++j)
    if (L[j - 1] != (uint64_t(1) << fam.F_levels[j - 1]))
      fail(ErrorCode::Internal, "step profile does not reproduce 2^{A_k*(j)}");
  fam.core = build_core_sequence(p, seed_for(seed, "family/k=" + std::to_string(k) + "/core"));
  return fam;
}

FamilyReport verify_family(const InductiveFamily& fam) {
  FamilyReport rep;
  auto note = [&](bool& flag, const std::string& m) {
    flag = false;
    if (rep.failures.size() < 16) rep.failures.push_back(m);
  };
  StructureReport st = verify_structure(fam.core);
  if (!st.ok()) note(rep.core_structure, "core: " + (st.failures.empty() ? std::string("structure") : st.failures[0]));
  const uint64_t N = ipow(fam.n, fam.k - 1), total = N * fam.n;
  std::vector<BipartiteGraph> prev;
  for (uint32_t j = 1; j <= fam.s; ++j) {
    std::vector<BipartiteGraph> cur;
    Bits seen(total);
    uint64_t sum = 0;
    for (uint32_t b = 0; b < fam.member_count(j); ++b) {
      BipartiteGraph g = fam.member_aux(j, b);
      uint64_t e = g.edge_count();
      sum += e;
      if (Rational(e) != Rational(total) / Rational(BigInt(1) << j))
        note(rep.densities, "H_" + std::to_string(j) + "[" + std::to_string(b) + "] has density " +
                                to_string(Rational(e) / Rational(total)));
      for (uint32_t x = 0; x < g.left_size(); ++x)
        for (uint32_t v = 0; v < g.right_size(); ++v)
          if (g.has_edge(x, v)) {
            uint64_t code = uint64_t(x) * fam.n + v;
            if (seen.test(code)) note(rep.equitable, "members of H_" + std::to_string(j) + " overlap");
            seen.set(code);
          }
      if (!prev.empty()) {
        const BipartiteGraph& par = prev[b >> 1];
        for (uint32_t x = 0; x < g.left_size(); ++x)
          for (size_t w = 0; w < g.words(); ++w)
            if (g.row(x)[w] & ~par.row(x)[w]) {
              note(rep.chain, "H_" + std::to_string(j) + "[" + std::to_string(b) + "] leaves its parent");
              x = g.left_size() - 1;
              break;
            }
      }
      KPartiteKGraph H = fam.member(j, b);
      if (!(aux_graph(H, fam.k).graph == g)) note(rep.lift, "aux graph of H_G differs from G at level " + std::to_string(j));
      cur.push_back(std::move(g));
    }
    if (sum != total || seen.count() != total) note(rep.equitable, "H_" + std::to_string(j) + " does not partition the product");
    prev = std::move(cur);
  }
  // member_of agrees with the materialized members on a deterministic sample.
  Rng rng(seed_for(fam.seed, "verify/member_of"));
  for (int r = 0; r < 64; ++r) {
    std::vector<uint32_t> t(fam.k);
    for (auto& v : t) v = static_cast<uint32_t>(rng.below(fam.n));
    uint32_t b = fam.member_of(fam.s, t);
    if (!fam.member(fam.s, b).contains(t)) note(rep.lift, "member_of disagrees with the member edge sets");
  }
  const auto& sc = fam.sched;
  if (fam.chain_levels != idx(sc.m(fam.k, fam.s), "m_k(s)")) note(rep.bookkeeping, "chain length differs from m_k(s)");
  for (uint32_t j = 1; j <= fam.s; ++j) {
    if (fam.V_levels[j - 1] != idx(sc.A(fam.k, j), "A_k(j)")) note(rep.bookkeeping, "V level mismatch");
    uint64_t want_R = idx(sc.t(fam.k == 2 ? j : fam.V_levels[j - 1]), "t");
    uint64_t want_L = fam.k == 2 ? idx(sc.t(j + 1), "t") : (uint64_t(1) << fam.F_levels[j - 1]);
    if (fam.core.R_count(j) != want_R)
      note(rep.bookkeeping, "|V_(" + std::to_string(j) + ")| = " + std::to_string(fam.core.R_count(j)) +
                                ", expected " + std::to_string(want_R));
    if (fam.core.L_count(j) != want_L)
      note(rep.bookkeeping, "|F_(" + std::to_string(j) + ")| = " + std::to_string(fam.core.L_count(j)) +
                                ", expected " + std::to_string(want_L));
    if (fam.k >= 3 && fam.F_levels[j - 1] > fam.lower->s) note(rep.bookkeeping, "F level beyond the lower family");
  }
  if (fam.lower) {
    if (fam.lower->s != idx(sc.A_star(fam.k, fam.s), "A_k*(s)")) note(rep.bookkeeping, "lower family length differs from A_k*(s)");
    if (fam.lower->chain_levels != fam.chain_levels) note(rep.bookkeeping, "m_{k-1}(s') differs from m_k(s)");
    FamilyReport sub = verify_family(*fam.lower);
    rep.equitable &= sub.equitable;
    rep.densities &= sub.densities;
    rep.chain &= sub.chain;
    rep.lift &= sub.lift;
    rep.bookkeeping &= sub.bookkeeping;
    rep.core_structure &= sub.core_structure;
    for (const auto& f : sub.failures) rep.failures.push_back("lower: " + f);
  }
  return rep;
}

VertexPartition class_restriction(const VertexPartition& P, uint64_t class_size, uint32_t cls) {
  uint64_t lo = uint64_t(cls) * class_size, hi = lo + class_size;
  require(hi <= P.ground_size(), "class index out of range");
  std::vector<std::vector<uint32_t>> cells;
  for (const auto& c : P.cells()) {
    bool in = c.front() >= lo && c.front() < hi;
    std::vector<uint32_t> local;
    for (uint32_t v : c) {
      if ((v >= lo && v < hi) != in) fail(ErrorCode::Usage, "partition cell straddles vertex classes");
      if (in) local.push_back(static_cast<uint32_t>(v - lo));
    }
    if (in) cells.push_back(std::move(local));
  }
  return VertexPartition(class_size, std::move(cells));
}

// ---- one-sided property ----
namespace {
const Rational kC = Rational(1, 512);

VertexPartition concat_classes(const std::vector<VertexPartition>& parts, uint64_t n) {
  std::vector<uint32_t> labels(parts.size() * n);
  uint32_t base = 0;
  for (size_t h = 0; h < parts.size(); ++h) {
    for (uint64_t v = 0; v < n; ++v) labels[h * n + v] = base + parts[h].cell_of(static_cast<uint32_t>(v));
    base += static_cast<uint32_t>(parts[h].size());
  }
  return VertexPartition::from_labels(labels);
}

void check_onesided_args(const InductiveFamily& fam, uint32_t j, uint32_t member, const KPartition& P, uint32_t i) {
  if (j < 1 || j > fam.s) fail(ErrorCode::Usage, "level j out of range");
  if (member >= fam.member_count(j)) fail(ErrorCode::Usage, "member out of range");
  uint64_t A = fam.V_levels[j - 1];
  if (i < 1 || i > A)
    fail(ErrorCode::Usage, "index i = " + std::to_string(i) + " outside 1..A_k(j) = " + std::to_string(A));
  if (i + 1 > fam.chain_levels) fail(ErrorCode::Usage, "i + 1 exceeds the materialized chain");
  if (P.arity() + 1 != fam.k) fail(ErrorCode::Usage, "need an arity-(k-1) partition");
  if (P.p1().ground_size() != uint64_t(fam.k) * fam.n) fail(ErrorCode::Usage, "partition ground set does not match the classes");
}
}  // namespace

KPartition chain_kpartition(const InductiveFamily& fam, uint64_t level) {
  std::vector<VertexPartition> parts(fam.k, chain_partition(fam.sched, fam.n, level));
  return KPartition::complete(concat_classes(parts, fam.n), fam.k - 1);
}

KPartition adversarial_partition(const InductiveFamily& fam, uint32_t i, uint64_t seed) {
  std::vector<VertexPartition> parts(fam.k, chain_partition(fam.sched, fam.n, i));
  uint64_t cells = chain_partition(fam.sched, fam.n, i + 1).size();
  std::vector<uint32_t> perm(fam.n);
  for (uint32_t v = 0; v < fam.n; ++v) perm[v] = v;
  Rng rng(seed_for(seed, "adversarial/class1"));
  rng.shuffle(perm);
  std::vector<uint32_t> labels(fam.n);
  for (uint64_t r = 0; r < fam.n; ++r) labels[perm[r]] = static_cast<uint32_t>(r / (fam.n / cells));
  parts[0] = VertexPartition::from_labels(labels);
  return KPartition::complete(concat_classes(parts, fam.n), fam.k - 1);
}

OneSidedReport verify_onesided_property(const InductiveFamily& fam, uint32_t j, uint32_t member, const KPartition& P,
                                        uint32_t i, const Rational& delta, bool check_regularity,
                                        const CheckOptions& opt) {
  check_onesided_args(fam, j, member, P, i);
  OneSidedReport rep;
  rep.j = j;
  rep.member = member;
  rep.i = i;
  VertexPartition Vi = chain_partition(fam.sched, fam.n, i), Vnext = chain_partition(fam.sched, fam.n, i + 1);
  rep.hypothesis_holds = true;
  for (uint32_t h = 1; h < fam.k; ++h) {
    rep.hypothesis.push_back(refines_beta(class_restriction(P.p1(), fam.n, h), Vi, kC));
    rep.hypothesis_holds &= rep.hypothesis.back().verdict;
  }
  rep.conclusion = refines_beta(class_restriction(P.p1(), fam.n, 0), Vnext, kC);
  rep.conclusion_holds = rep.conclusion.verdict;
  if (check_regularity) {
    rep.regularity_checked = true;
    GoodReport good = is_delta_good(P, delta, opt);
    if (!good.good) rep.regularity = Verdict::NotRegular;
    else if (!good.decided) rep.regularity = Verdict::Undecided;
    else rep.regularity = is_delta_regular_kpartition(fam.member(j, member), P, delta, opt, false).verdict;
  }
  if (!rep.hypothesis_holds) rep.outcome = "vacuous-hypothesis";
  else if (rep.regularity == Verdict::NotRegular) rep.outcome = "vacuous-irregular";
  else if (rep.conclusion_holds) rep.outcome = "confirmed";
  else if (rep.regularity == Verdict::Regular) rep.outcome = "violated";
  else rep.outcome = "undecided";
  return rep;
}

OneSidedRefutation refute_onesided(const InductiveFamily& fam, uint32_t j, uint32_t member, const KPartition& P,
                                   uint32_t i, const Rational& delta, const Rational& gamma) {
  check_onesided_args(fam, j, member, P, i);
  OneSidedRefutation out;
  if (fam.k == 2) {
    out.base_level = j;
    RefuteOptions ro;
    ro.gamma = gamma;
    VertexPartition P1 = class_restriction(P.p1(), fam.n, 0), Q = class_restriction(P.p1(), fam.n, 1);
    OneSidedCertificate oc;
    oc.path = "k=2/j=" + std::to_string(j) + "/member=" + std::to_string(member);
    oc.certificate = refute_partition(fam.core, j, member, P1, Q, delta, i, ro);
    oc.certificate.graph_label = oc.path;
    oc.verified = verify_certificate(oc.certificate, fam.core.member_graph(j, member)).ok;
    out.refutes_all = oc.verified && oc.certificate.refutes;
    out.certificates.push_back(std::move(oc));
    return out;
  }
  // j' with A_k(j') <= i < A_k(j'+1); the relevant 𝓕-level is A_k*(j').
  uint32_t jp = 1;
  while (jp < fam.s && fam.V_levels[jp] <= i) ++jp;
  uint32_t ell = static_cast<uint32_t>(fam.F_levels[jp - 1]);
  std::vector<uint32_t> keep(static_cast<size_t>((fam.k - 1) * fam.n));
  for (uint32_t v = 0; v < keep.size(); ++v) keep[v] = v;
  KPartition Pp = truncate_arity(restrict_kpartition(P, keep).partition, fam.k - 2);
  out.refutes_all = true;
  for (uint32_t f = 0; f < fam.lower->member_count(ell); ++f) {
    OneSidedRefutation sub = refute_onesided(*fam.lower, ell, f, Pp, i, delta, gamma);
    out.base_level = sub.base_level;
    out.refutes_all &= sub.refutes_all;
    for (auto& c : sub.certificates) {
      c.path = "k=" + std::to_string(fam.k) + "/j'=" + std::to_string(jp) + "/" + c.path;
      out.certificates.push_back(std::move(c));
    }
  }
  return out;
}

// ---- pasting ----
uint32_t first_member(const InductiveFamily&, uint32_t) { return 0; }

uint64_t PastedInstance::global_vertex(uint32_t h, uint64_t v) const {
  require(h < 2 * k && v < n, "vertex out of range");
  return uint64_t(h % k) * 2 * n + (h >= k ? n : 0) + v;
}

std::vector<uint32_t> PastedInstance::class_vertices(uint32_t h) const {
  std::vector<uint32_t> out(n);
  for (uint64_t v = 0; v < n; ++v) out[v] = static_cast<uint32_t>(global_vertex(h, v));
  return out;
}

VertexPartition PastedInstance::chain(uint64_t level) const {
  VertexPartition c = chain_partition(sched, n, level);
  std::vector<uint32_t> labels(2 * k * n);
  for (uint32_t h = 0; h < 2 * k; ++h)
    for (uint64_t v = 0; v < n; ++v)
      labels[global_vertex(h, v)] = static_cast<uint32_t>(h * c.size() + c.cell_of(static_cast<uint32_t>(v)));
  return VertexPartition::from_labels(labels);
}

PastedInstance build_pasted_instance(uint32_t k, uint32_t s, uint64_t n, const ParamSchedule& sched, uint64_t seed,
                                     MemberSelector select) {
  require(k >= 2 && s >= 1, "need k >= 2 and s >= 1");
  PastedInstance inst;
  inst.k = k;
  inst.s = s;
  inst.n = n;
  inst.sched = sched;
  inst.seed = seed;
  inst.chain_levels = idx(sched.m(k, s), "m_k(s)");
  for (uint32_t x = 0; x < 2 * k; ++x) {
    std::vector<uint32_t> e;
    for (uint32_t h = 0; h < k; ++h) e.push_back((x + h) % (2 * k));
    inst.B.push_back(std::move(e));
  }
  std::vector<std::future<InductiveFamily>> jobs;
  for (uint32_t x = 0; x < 2 * k; ++x)
    jobs.push_back(std::async(std::launch::async, [=, &sched] {
      return build_inductive_family(k, s, n, sched, seed_for(seed, "paste/edge/" + std::to_string(x)));
    }));
  for (auto& j : jobs) inst.families.push_back(std::make_shared<InductiveFamily>(j.get()));

  std::vector<uint64_t> H_sizes(k, 2 * n), codes;
  KPartiteKGraph shape{VertexClassSet(H_sizes)};
  for (uint32_t x = 0; x < 2 * k; ++x) {
    uint32_t b = select ? select(*inst.families[x], x) : 0;
    if (b >= inst.families[x]->member_count(s)) fail(ErrorCode::Usage, "member selector returned an out-of-range index");
    inst.selected.push_back(b);
    KPartiteKGraph piece = inst.families[x]->member(s, b);
    std::vector<uint32_t> t(k);
    for (uint64_t c : piece.codes()) {
      auto local = piece.decode(c);
      for (uint32_t h = 0; h < k; ++h) {
        uint32_t cls = (x + h) % (2 * k);
        t[cls % k] = static_cast<uint32_t>((cls >= k ? n : 0) + local[h]);
      }
      codes.push_back(shape.encode(t));
    }
    inst.pieces.push_back(std::move(piece));
  }
  inst.H = KPartiteKGraph::from_codes(VertexClassSet(H_sizes), std::move(codes));
  inst.V0 = inst.chain(1);
  return inst;
}

PastedReport verify_pasted_instance(const PastedInstance& inst) {
  PastedReport rep;
  auto note = [&](bool& flag, const std::string& m) {
    flag = false;
    rep.failures.push_back(m);
  };
  const Rational ps = Rational(1) / Rational(BigInt(1) << inst.s);
  uint64_t sum = 0;
  for (size_t x = 0; x < inst.pieces.size(); ++x) {
    sum += inst.pieces[x].edge_count();
    if (inst.pieces[x].density() != ps) note(rep.pieces_density, "piece " + std::to_string(x) + " has density " + to_string(inst.pieces[x].density()));
  }
  rep.density = inst.H.density();
  Rational want = Rational(2 * inst.k) / Rational(BigInt(1) << inst.k) * ps;
  if (rep.density != want) note(rep.union_density, "d(H) = " + to_string(rep.density) + ", expected " + to_string(want));
  if (rep.density < ps / Rational(BigInt(1) << inst.k)) note(rep.union_density, "d(H) below 2^(-s-k)");
  if (sum != inst.H.edge_count()) note(rep.edge_disjoint, "pieces overlap");
  for (uint64_t sz : inst.H.classes().sizes)
    if (sz != 2 * inst.n) note(rep.equal_classes, "unequal vertex classes");
  uint64_t t1 = idx(inst.sched.t(1), "t(1)");
  if (inst.V0.size() > 2 * inst.k * t1) note(rep.v0_size, "|V_0| exceeds 2k t(1)");
  for (uint32_t h = 0; h < 2 * inst.k; ++h) {
    auto cls = inst.class_vertices(h);
    for (const auto& c : inst.V0.cells())
      if (std::binary_search(cls.begin(), cls.end(), c.front()))
        for (uint32_t v : c)
          if (!std::binary_search(cls.begin(), cls.end(), v)) note(rep.v0_size, "V_0 does not refine the class split");
  }
  return rep;
}

BetaStar beta_star_analysis(const PastedInstance& inst, const VertexPartition& P) {
  const uint64_t n = inst.n;
  const uint32_t k = inst.k;
  require(P.ground_size() == 2 * k * n, "partition ground set does not match the instance");
  auto locate = [&](uint32_t g, uint32_t& h, uint32_t& v) {
    uint32_t c = static_cast<uint32_t>(g / (2 * n)), r = static_cast<uint32_t>(g % (2 * n));
    h = c + (r >= n ? k : 0);
    v = static_cast<uint32_t>(r % n);
  };
  std::vector<std::vector<std::vector<uint32_t>>> per(2 * k);
  for (const auto& cell : P.cells()) {
    uint32_t h0, v;
    locate(cell.front(), h0, v);
    std::vector<uint32_t> local;
    for (uint32_t g : cell) {
      uint32_t h;
      locate(g, h, v);
      if (h != h0) fail(ErrorCode::Usage, "P^(1) does not refine the class split");
      local.push_back(v);
    }
    std::sort(local.begin(), local.end());
    per[h0].push_back(std::move(local));
  }
  BetaStar out;
  out.K = static_cast<uint32_t>(std::min<uint64_t>(idx(inst.sched.A(k, inst.s), "A_k(s)") + 1, inst.chain_levels));
  std::vector<VertexPartition> chain;
  for (uint32_t i = 1; i <= out.K; ++i) chain.push_back(chain_partition(inst.sched, n, i));
  for (uint32_t h = 0; h < 2 * k; ++h) {
    std::sort(per[h].begin(), per[h].end());
    VertexPartition Ph(n, per[h]);
    uint32_t best = 0;
    for (uint32_t i = 1; i <= out.K; ++i)
      if (refines_beta(Ph, chain[i - 1], kC).verdict) best = i;
    out.beta.push_back(best);
  }
  out.x = static_cast<uint32_t>(std::min_element(out.beta.begin(), out.beta.end()) - out.beta.begin());
  out.beta_star = out.beta[out.x];
  out.edge = inst.B[out.x];
  return out;
}

// ---- manifests ----
namespace {
json family_json(const InductiveFamily& fam) {
  json j;
  j["format"] = "regbound-family 1";
  j["k"] = fam.k;
  j["s"] = fam.s;
  j["n"] = fam.n;
  j["seed"] = fam.seed;
  j["chain_levels"] = fam.chain_levels;
  j["V_levels"] = fam.V_levels;
  j["F_levels"] = fam.F_levels;
  j["members"] = json::object();
  for (uint32_t l = 1; l <= fam.s; ++l) {
    json hs = json::array();
    for (uint32_t b = 0; b < fam.member_count(l); ++b) hs.push_back(hex64(content_hash(fam.member(l, b))));
    j["members"][std::to_string(l)] = hs;
  }
  if (fam.lower) j["lower"] = family_json(*fam.lower);
  return j;
}

json instance_json(const PastedInstance& inst) {
  json j;
  j["format"] = "regbound-pasted 1";
  j["k"] = inst.k;
  j["s"] = inst.s;
  j["n"] = inst.n;
  j["seed"] = inst.seed;
  j["schedule"] = schedule_json(inst.sched);
  j["chain_levels"] = inst.chain_levels;
  j["cycle_edges"] = inst.B;
  j["selected"] = inst.selected;
  j["piece_hashes"] = json::array();
  for (const auto& p : inst.pieces) j["piece_hashes"].push_back(hex64(content_hash(p)));
  j["H_hash"] = hex64(content_hash(inst.H));
  j["H_edges"] = inst.H.edge_count();
  j["density"] = to_string(inst.H.density());
  j["V0_cells"] = inst.V0.size();
  j["families"] = json::array();
  for (const auto& f : inst.families) j["families"].push_back(family_json(*f));
  return j;
}
}  // namespace

std::string manifest_json(const InductiveFamily& fam) {
  json j = family_json(fam);
  j["schedule"] = schedule_json(fam.sched);
  return j.dump(2);
}

std::string manifest_json(const PastedInstance& inst) { return instance_json(inst).dump(2); }

void save_pasted_instance(const PastedInstance& inst, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  auto open = [&](const std::string& name, std::ios::openmode mode) {
    std::ofstream os(fs::path(dir) / name, mode);
    if (!os) fail(ErrorCode::Io, "cannot write " + (fs::path(dir) / name).string());
    return os;
  };
  {
    auto os = open("manifest.json", std::ios::out);
    os << manifest_json(inst) << "\n";
  }
  {
    auto os = open("H.rbkg", std::ios::out | std::ios::binary);
    write_binary(os, inst.H);
  }
  {
    auto os = open("V0.txt", std::ios::out);
    write_partition(os, inst.V0);
  }
}

PastedInstance load_pasted_instance(const std::string& dir) {
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) fail(ErrorCode::Io, "cannot read " + (fs::path(dir) / "manifest.json").string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorCode::Usage, std::string("malformed manifest: ") + e.what());
  }
  if (j.value("format", "") != "regbound-pasted 1") fail(ErrorCode::Usage, "not a pasted-instance manifest");
  auto selected = j.at("selected").get<std::vector<uint32_t>>();
  PastedInstance inst = build_pasted_instance(
      j.at("k").get<uint32_t>(), j.at("s").get<uint32_t>(), j.at("n").get<uint64_t>(), schedule_from(j.at("schedule")),
      j.at("seed").get<uint64_t>(), [selected](const InductiveFamily&, uint32_t x) {
        if (x >= selected.size()) fail(ErrorCode::Usage, "manifest lists too few selections");
        return selected[x];
      });
  if (hex64(content_hash(inst.H)) != j.at("H_hash").get<std::string>())
    fail(ErrorCode::Verification, "rebuilt H does not match the manifest hash");
  auto ph = j.at("piece_hashes").get<std::vector<std::string>>();
  for (size_t x = 0; x < inst.pieces.size(); ++x)
    if (x >= ph.size() || hex64(content_hash(inst.pieces[x])) != ph[x])
      fail(ErrorCode::Verification, "rebuilt piece " + std::to_string(x) + " does not match the manifest hash");
  std::ifstream hb(fs::path(dir) / "H.rbkg", std::ios::binary);
  if (hb && !(read_binary_kgraph(hb) == inst.H)) fail(ErrorCode::Verification, "stored H.rbkg differs from the rebuilt H");
  return inst;
}

}  // namespace regbound
