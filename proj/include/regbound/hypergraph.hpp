// Parameter schedules, the inductive k-graph family built from nested core sequences, and the tight-cycle pasting.
#pragma once

#include "regbound/common.hpp"
#include "regbound/core.hpp"
#include "regbound/graphs.hpp"
#include "regbound/partitions.hpp"
#include "regbound/regularity.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace regbound {

// An exact value when it fits under the magnitude cutoff, otherwise a printable symbolic expression.
struct BigValue {
  bool exact = true;
  Rational value;
  std::string expr;

  static BigValue of(const Rational& v) { return BigValue{true, v, {}}; }
  static BigValue symbolic(std::string e) { return BigValue{false, 0, std::move(e)}; }
  bool is_integer() const { return exact && boost::multiprecision::denominator(value) == 1; }
  BigInt integer() const;  // throws Usage unless is_integer()
  // Index-sized value; throws Resource when symbolic or above `limit`.
  uint64_t index(const std::string& what, uint64_t limit = uint64_t(1) << 40) const;
  std::string str() const;
};

// 2^exponent, symbolic when exponent exceeds cutoff_bits.
BigValue pow2(const BigValue& exponent, uint64_t cutoff_bits);

uint64_t default_cutoff_bits();  // 2^17
// Ack_1(n) = 2^n; Ack_{k+1}(n) iterates Ack_k n times starting from 1.
BigValue ackermann(uint32_t k, uint64_t n, uint64_t cutoff_bits = default_cutoff_bits());

enum class SchedFn { T, E, FStar, A, AStar, M, Delta };
std::string to_string(SchedFn f);
SchedFn parse_sched_fn(const std::string& name);  // "t", "e", "f*", "A", "A*", "m", "delta"

struct ScheduleViolation {
  std::string invariant;
  std::string detail;
};

class ParamSchedule {
 public:
  bool strict = false;
  uint64_t cutoff_bits = default_cutoff_bits();
  // Desk replacements; strict mode ignores them.
  uint64_t t1 = 2;                      // t(1)
  std::vector<Rational> e_table;        // e(1), e(2), ...; the last entry repeats
  std::map<uint32_t, uint64_t> A1;      // A_k(1) per k >= 3
  Rational core_alpha = 1;              // α used for every Γ sampled by the construction

  static ParamSchedule desk();    // t = (2,4,8,16), e = (1,4/3,2), A_3(1) = 1
  static ParamSchedule strict_schedule();

  BigValue e(uint64_t i) const;
  BigValue t(const BigValue& i) const;
  BigValue t(uint64_t i) const { return t(BigValue::of(i)); }
  BigValue f_star(const BigValue& fi, uint64_t i) const;  // t(f(i))/e(i); Usage when not an integer
  BigValue A(uint32_t k, uint64_t i) const;
  BigValue A_star(uint32_t k, uint64_t i) const;
  BigValue m(uint32_t k, uint64_t i) const;
  static Rational delta(uint32_t k);  // 2^(-8^k), exact for 1 <= k <= 5
  BigValue delta_value(uint32_t k) const;

  // Invariants of the strict recurrences that this schedule breaks, over indices 1..upto.
  std::vector<ScheduleViolation> violations(uint32_t k, uint64_t upto) const;

  std::string to_json() const;
  static ParamSchedule from_json(const std::string& text);
};

// k = number of classes; args are (i) for t, e, f*, delta uses k only.
BigValue schedule_eval(const ParamSchedule& sched, SchedFn which, uint32_t k, uint64_t i);

// The chain 𝒱_1 ≻ ... ≻ 𝒱_m restricted to one class of size n: nested contiguous blocks with t(i) cells.
VertexPartition chain_partition(const ParamSchedule& sched, uint64_t n, uint64_t level);

struct InductiveFamily {
  uint32_t k = 2, s = 1;
  uint64_t n = 0;  // common class size
  ParamSchedule sched;
  uint64_t seed = 0;
  uint64_t chain_levels = 0;  // m_k(s)
  CoreSequence core;          // on (V^1 x ... x V^{k-1}) x V^k, left side in `left_order` positions
  std::shared_ptr<const InductiveFamily> lower;  // the (k-1)-family supplying 𝓕, k >= 3
  std::vector<uint32_t> left_order;              // product tuple code -> core left position (k >= 3)
  std::vector<uint64_t> F_levels;  // A_k*(j), j = 1..s (k >= 3)
  std::vector<uint64_t> V_levels;  // A_k(j), j = 1..s

  VertexClassSet classes() const;
  uint64_t member_count(uint32_t j) const { return uint64_t(1) << j; }
  // G for member b of 𝒢_j with left index = mixed-radix code over classes 1..k-1.
  BipartiteGraph member_aux(uint32_t j, uint32_t b) const;
  // H_G.
  KPartiteKGraph member(uint32_t j, uint32_t b) const;
  // Index of the member of ℋ_j containing the tuple.
  uint32_t member_of(uint32_t j, const std::vector<uint32_t>& tuple) const;
};

InductiveFamily build_inductive_family(uint32_t k, uint32_t s, uint64_t n, const ParamSchedule& sched, uint64_t seed);
// Smallest admissible class size: t(m_k(s)) rounded up so that every blowup is integral.
uint64_t minimal_class_size(uint32_t k, uint32_t s, const ParamSchedule& sched);

struct FamilyReport {
  bool equitable = true, densities = true, chain = true, lift = true, bookkeeping = true, core_structure = true;
  std::vector<std::string> failures;
  bool ok() const { return equitable && densities && chain && lift && bookkeeping && core_structure; }
};
// Exact recount of every ℋ_j invariant, the lift identity, and the schedule bookkeeping; recurses into `lower`.
FamilyReport verify_family(const InductiveFamily& fam);

// Per-class restriction of a vertex partition of the concatenated classes; cells must not straddle classes.
VertexPartition class_restriction(const VertexPartition& P, uint64_t class_size, uint32_t cls);

struct OneSidedReport {
  uint32_t j = 0, member = 0, i = 0;
  Verdict regularity = Verdict::Undecided;  // ⟨δ⟩-regularity of P for H, Undecided when not checked
  bool regularity_checked = false;
  std::vector<RefinementReport> hypothesis;  // classes 2..k against 𝒱_i
  bool hypothesis_holds = false;
  RefinementReport conclusion;               // class 1 against 𝒱_{i+1}
  bool conclusion_holds = false;
  std::string outcome;  // "confirmed", "violated", "vacuous-hypothesis", "vacuous-irregular", "undecided"
};
// P: arity-(k-1) partition of the concatenated classes. Usage error unless 1 <= i <= A_k(j) and i < m.
OneSidedReport verify_onesided_property(const InductiveFamily& fam, uint32_t j, uint32_t member, const KPartition& P,
                                        uint32_t i, const Rational& delta, bool check_regularity = true,
                                        const CheckOptions& opt = {});

// P agrees with 𝒱_i on classes 2..k; class 1 is a seeded equitable scramble with t(i+1) cells.
KPartition adversarial_partition(const InductiveFamily& fam, uint32_t i, uint64_t seed);
// 𝒱_level on every class, completed to arity k-1.
KPartition chain_kpartition(const InductiveFamily& fam, uint64_t level);

struct OneSidedCertificate {
  std::string path;    // e.g. "k=3 lower/j=2/member=5"
  IrregularityCertificate certificate;
  bool verified = false;
};
struct OneSidedRefutation {
  uint32_t base_level = 0;  // ℓ on the 2-graph family where the certificates live
  std::vector<OneSidedCertificate> certificates;
  bool refutes_all = false;
};
// Follows the descent of the proof to the bipartite base and refutes V_1(P) ∪ V_2(P) for every relevant member.
OneSidedRefutation refute_onesided(const InductiveFamily& fam, uint32_t j, uint32_t member, const KPartition& P,
                                   uint32_t i, const Rational& delta, const Rational& gamma);

struct PastedInstance {
  uint32_t k = 2, s = 1;
  uint64_t n = 0;
  ParamSchedule sched;
  uint64_t seed = 0;
  uint64_t chain_levels = 0;
  std::vector<std::vector<uint32_t>> B;  // tight 2k-cycle edges {x,...,x+k-1} mod 2k
  std::vector<std::shared_ptr<const InductiveFamily>> families;
  std::vector<uint32_t> selected;        // member of ℋ_s taken from each family
  std::vector<KPartiteKGraph> pieces;    // H_e on (V^x,...,V^{x+k-1})
  KPartiteKGraph H;                      // classes V^c ∪ V^{c+k}, c = 0..k-1, each of size 2n
  VertexPartition V0;                    // 𝒱^1

  // Position of vertex v of V^h in the layout of H's concatenated classes.
  uint64_t global_vertex(uint32_t h, uint64_t v) const;
  std::vector<uint32_t> class_vertices(uint32_t h) const;
  VertexPartition chain(uint64_t level) const;  // 𝒱^level in H's layout
};

// Picks the member of ℋ_s used for cycle edge `edge`.
using MemberSelector = std::function<uint32_t(const InductiveFamily&, uint32_t edge)>;
uint32_t first_member(const InductiveFamily&, uint32_t);

PastedInstance build_pasted_instance(uint32_t k, uint32_t s, uint64_t n, const ParamSchedule& sched, uint64_t seed,
                                     MemberSelector select = first_member);

struct PastedReport {
  bool pieces_density = true, union_density = true, edge_disjoint = true, equal_classes = true, v0_size = true;
  Rational density;
  std::vector<std::string> failures;
  bool ok() const { return pieces_density && union_density && edge_disjoint && equal_classes && v0_size; }
};
PastedReport verify_pasted_instance(const PastedInstance& inst);

struct BetaStar {
  std::vector<uint32_t> beta;  // β(h), h = 0..2k-1
  uint32_t beta_star = 0;
  uint32_t x = 0;              // first class attaining β*
  std::vector<uint32_t> edge;  // {x,...,x+k-1} mod 2k
  uint32_t K = 0;              // A_k(s)+1, capped by the materialized chain
};
// P ≺ {V^0,...,V^{2k-1}} over H's layout; Usage otherwise.
BetaStar beta_star_analysis(const PastedInstance& inst, const VertexPartition& P);

// Manifest with schedule, seeds and per-member hashes; save also writes H and 𝒱_0.
std::string manifest_json(const InductiveFamily& fam);
std::string manifest_json(const PastedInstance& inst);
void save_pasted_instance(const PastedInstance& inst, const std::string& dir);
// Rebuilds from the manifest and checks every recorded hash; Verification on mismatch.
PastedInstance load_pasted_instance(const std::string& dir);

}  // namespace regbound
