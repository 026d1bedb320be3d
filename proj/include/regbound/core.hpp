// Iterative edge-partition chain over 𝐋 x 𝐑 built from balanced graphs, with checks of its structural claims
// and a refutation pipeline that emits irregularity certificates.
#pragma once

#include "regbound/balanced.hpp"
#include "regbound/common.hpp"
#include "regbound/graphs.hpp"
#include "regbound/partitions.hpp"
#include "regbound/regularity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace regbound {

struct GrowthProfile {
  uint32_t s = 0;
  std::vector<uint64_t> R_sizes;  // |ℛ_1| <= ... <= |ℛ_s|, powers of two
  std::vector<Rational> e;        // |ℒ_i| = 2^(|ℛ_i| / e(i))
  bool strict = false;            // enforce the asymptotic assumptions verbatim
  bool quadrupling = false;       // require |ℛ_{i+1}| >= 4|ℛ_i|
  uint32_t blowup_left = 1, blowup_right = 1;  // |𝐋| = |ℒ_s|·blowup_left, |𝐑| = |ℛ_s|·blowup_right
  std::vector<std::optional<Rational>> alpha;   // per level; empty entry means |ℒ_i|^(-1/6)
  uint32_t max_retries = 200;
  unsigned enforce = kEquitable | kPseudorandom | kComplementClosed;
  uint64_t telemetry_pair_cap = uint64_t(1) << 16;  // sampled (ii) telemetry on accepted Γ_i; 0 disables

  std::vector<uint64_t> L_sizes() const;  // |ℒ_1|..|ℒ_s|
  uint64_t L_ground() const;
  uint64_t R_ground() const;
  Radical alpha_at(uint32_t level) const;  // 1-based
  void validate() const;                   // throws Usage

  static GrowthProfile desk();
  static GrowthProfile from_json(const std::string& text);
  std::string to_json() const;
};

struct CoreLevel {
  uint32_t level = 0;
  uint64_t L_count = 1, R_count = 1;
  std::vector<BipartiteGraph> quotients;  // 2^level members on (ℒ_level, ℛ_level)
  std::vector<BalancedGraph> gammas;      // one per parent member (empty at level 0)
  std::vector<uint64_t> gamma_seeds;
  std::vector<BalanceReport> telemetry;   // sampled (ii) check of each accepted Γ
  Radical alpha;
};

class CoreSequence {
 public:
  GrowthProfile profile;
  uint64_t seed = 0;
  std::vector<CoreLevel> levels;  // levels[0] is the trivial partition

  uint32_t s() const { return profile.s; }
  uint64_t L_ground() const { return profile.L_ground(); }
  uint64_t R_ground() const { return profile.R_ground(); }
  uint64_t L_count(uint32_t i) const {
    return i < levels.size() ? levels[i].L_count : profile.L_sizes().at(i - 1);
  }
  uint64_t R_count(uint32_t i) const { return i < levels.size() ? levels[i].R_count : profile.R_sizes.at(i - 1); }
  VertexPartition L_partition(uint32_t i) const { return VertexPartition::blocks(L_ground(), L_count(i)); }
  VertexPartition R_partition(uint32_t i) const { return VertexPartition::blocks(R_ground(), R_count(i)); }
  // Cell of ℒ_i containing cell c of ℒ_j (j >= i).
  uint32_t L_ancestor(uint32_t j, uint32_t c, uint32_t i) const;
  uint32_t R_ancestor(uint32_t j, uint32_t c, uint32_t i) const;
  std::vector<uint32_t> L_children(uint32_t i, uint32_t c) const;  // ℒ_{i+1}[c]
  std::vector<uint32_t> R_children(uint32_t i, uint32_t c) const;

  const BipartiteGraph& quotient(uint32_t j, uint32_t member) const { return levels.at(j).quotients.at(member); }
  BipartiteGraph& quotient_mut(uint32_t j, uint32_t member) { return levels.at(j).quotients.at(member); }
  // Member of 𝒢_i containing member `member` of 𝒢_j.
  static uint32_t member_ancestor(uint32_t j, uint32_t member, uint32_t i) { return member >> (j - i); }
  // Vertex-level graph of a member: the blowup of its quotient.
  BipartiteGraph member_graph(uint32_t j, uint32_t member) const;

  void save(const std::string& dir) const;
  static CoreSequence load(const std::string& dir);
};

CoreSequence build_core_sequence(const GrowthProfile& profile, uint64_t seed);

// 𝔑_i(L) for L ∈ ℒ_{i-1}, with respect to member `member` of 𝒢_{i-1}; sorted ℛ_i indices.
std::vector<uint32_t> neighbor_family(const CoreSequence& seq, uint32_t i, uint32_t L, uint32_t member = 0);

struct StructureReport {
  bool equitable = true, chain = true, blowup = true, family_sizes = true;
  std::vector<std::string> failures;
  bool ok() const { return equitable && chain && blowup && family_sizes; }
};
// Exact vertex-level recount of equitability, chain refinement, the blowup property and |𝔑_i(L)|.
StructureReport verify_structure(const CoreSequence& seq);

struct CorePropertiesReport {
  bool item1 = true, item2 = true;
  uint64_t blocks_checked = 0, pairs_checked = 0;
  std::vector<std::string> failures;  // first few, with located (L,R)
};
// Both items for every member of 𝒢_i (each parent's two children) and every L ∈ ℒ_{i-1}, or only `only_L`.
CorePropertiesReport verify_core_properties(const CoreSequence& seq, uint32_t i,
                                            std::optional<uint32_t> only_L = std::nullopt);

struct DegreeReport {
  bool precondition = false;
  bool ok = false;
  uint64_t expected = 0;
  std::vector<std::string> failures;
};
// G = member `member` of 𝒢_ℓ; L ∈ ℒ_i, R ∈ ℛ_i with d_{G_i}(L,R) = 1.
DegreeReport verify_degree_property(const CoreSequence& seq, uint32_t ell, uint32_t member, uint32_t i, uint32_t L,
                                    uint32_t R);

struct QuasirandomReport {
  Rational p;
  bool biregular = false;
  Rational max_excess;     // max_v Σ_{v'} max{codeg(v,v') - p²|𝐋|, 0}
  Rational alpha_hat;      // max_excess / (p²|𝐋||𝐑|)
  Radical epsilon;         // 2·α̂^(1/6)
  EpsVerdict full;         // (ε)-regularity of G in the requested mode
  bool chain_ok = false;   // hypothesis holds and the verdict agrees
};
QuasirandomReport verify_quasirandomness(const CoreSequence& seq, uint32_t ell, uint32_t member,
                                         const CheckOptions& opt = {});

struct WitnessCluster {
  uint32_t R = 0;               // ℛ_i index
  std::vector<uint32_t> P1;     // P ∩ (union of ℒ_i-cells not adjacent to R in G̃_i)
  uint64_t e_P_R = 0;
  bool in_family = false;       // R ∈ 𝔑_i(L)
};
struct WitnessReport {
  uint32_t L = 0;               // host of P in ℒ_{i-1}
  std::vector<WitnessCluster> witnesses;  // every R ∈ ℛ_i satisfying both properties
  std::vector<uint32_t> claim_clusters;   // R' ∈ 𝔑_i(L) meeting the two set-size inequalities of the proof
  std::vector<Rational> lambda;           // over ℒ_i
  bool count_bound = false;               // |claim_clusters| >= (1/6)2^(-i)|ℛ_i|
};
WitnessReport find_irregularity_witnesses(const CoreSequence& seq, uint32_t ell, uint32_t member, uint32_t i,
                                          const std::vector<uint32_t>& P, const Rational& gamma);

// max{2^5·√δ, 32/|ℛ_1|^(1/6)}, exact when rational, else rounded down to a multiple of 2^-30.
Rational default_gamma(const Rational& delta, uint64_t R1);

struct RefuteOptions {
  std::optional<Rational> gamma;
  bool drop_zero_lines = false;
};
IrregularityCertificate refute_partition(const CoreSequence& seq, uint32_t ell, uint32_t member,
                                         const VertexPartition& P, const VertexPartition& Q, const Rational& delta,
                                         uint32_t t, const RefuteOptions& opt = {});

}  // namespace regbound
