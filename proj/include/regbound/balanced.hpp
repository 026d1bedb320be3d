// (X,Y,F,α,β)-balanced bipartite graphs: verification, the half-neighborhood sampler, and the 1/6 and 1/12 counts.
#pragma once

#include "regbound/common.hpp"
#include "regbound/graphs.hpp"
#include "regbound/partitions.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace regbound {

// Graphs are stored with left side 𝐗 and right side 𝐘.
struct BalanceSpec {
  VertexPartition X;                      // partition of 𝐗
  VertexPartition Y;                      // partition of 𝐘
  std::vector<std::vector<uint32_t>> F;   // sorted subsets of 𝐘, each a union of Y-cells
  Radical alpha = Radical::of(Rational(1));
  Rational beta = Rational(1, 16);

  // Throws Usage when a member of F is not a union of Y-cells or a cell has odd size.
  // With `uniform`, X-cells must share one size and F-members one size.
  void validate(bool uniform = true) const;
};

enum Condition : unsigned {
  kEquitable = 1u << 0,         // (i)
  kBalanced = 1u << 1,          // (ii)
  kPseudorandom = 1u << 2,      // (iii)
  kComplementClosed = 1u << 3,  // (iv)
  kAllConditions = 0xFu,
};
std::string condition_name(unsigned index);  // index 0..3

struct ConditionStatus {
  bool checked = false;
  bool passed = true;
  bool exact = true;        // false when (ii) was sampled because of the pair cap
  uint64_t violations = 0;  // counted up to the first one when early exit is on
  uint64_t tested = 0;
  std::string detail;       // first violation, human readable
};

struct BalanceCheckOptions {
  unsigned mask = kAllConditions;
  bool early_exit = true;             // stop each condition at its first violation
  uint64_t pair_cap = uint64_t(1) << 26;  // (ii): above this many (F,x,x') triples, sample instead
  uint64_t seed = 1;
};

struct BalanceReport {
  std::array<ConditionStatus, 4> cond;
  std::vector<uint32_t> phi;  // involution on 𝐘 when (iv) holds
  bool passed(unsigned mask) const;
  int first_violated() const;  // 1..4, or 0
  std::string summary() const;
};

BalanceReport verify_balanced(const BipartiteGraph& g, const BalanceSpec& spec, const BalanceCheckOptions& opt = {});

struct BalancedGraph {
  BipartiteGraph graph;       // 𝐗 x 𝐘
  std::vector<uint32_t> phi;  // φ(y); pairs the i-th vertex of each Y-cell's lower half with the i-th of its upper half
  uint32_t attempts = 0;
  std::array<uint32_t, 4> failures{};  // per-condition failure counts over rejected attempts
  BalanceReport report;
};

// One draw of the construction: exact half-neighborhoods on 𝐘_1, complemented copy on 𝐘_2.
BalancedGraph sample_candidate(const BalanceSpec& spec, uint64_t seed);
// Redraws until every condition in `enforce` holds; throws Verification when retries run out.
BalancedGraph sample_balanced(const BalanceSpec& spec, uint64_t seed, uint32_t max_retries,
                              unsigned enforce = kAllConditions, const BalanceCheckOptions& check = {});

struct OneSixResult {
  Rational threshold;              // (1 - ‖λ‖∞)/8
  std::vector<uint32_t> qualifying;
  bool bound_holds = false;        // 6·count ≥ |𝐘|
};
// λ indexed by 𝐗; nonnegative with sum 1.
OneSixResult check_one_six(const BipartiteGraph& g, const std::vector<Rational>& lambda);

struct OneTwelveResult {
  Rational threshold_outside;      // (1 - ‖λ‖∞)/8
  Rational threshold_inside;       // 1/2 - λ(ℒ_i ∖ L)
  std::vector<uint32_t> qualifying;
  bool bound_holds = false;        // 6·2^i·count ≥ |ℛ_i|
};
// quotient: G̃_i on (ℒ_i, ℛ_i); family: 𝔑_i(L) as ℛ_i indices; inside: ℒ_i indices contained in L.
OneTwelveResult check_one_twelve(const BipartiteGraph& quotient, const std::vector<uint32_t>& family,
                                 const std::vector<uint32_t>& inside, const std::vector<Rational>& lambda,
                                 uint32_t level);

void write_phi(std::ostream& os, const std::vector<uint32_t>& phi);
std::vector<uint32_t> read_phi(std::istream& is);

}  // namespace regbound
