// ⟨δ⟩-regularity of pairs, partitions and k-partitions; (ε)-regularity; refutation certificates.
#pragma once

#include "regbound/common.hpp"
#include "regbound/graphs.hpp"
#include "regbound/partitions.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace regbound {

enum class Mode { Exact, Sampled };

// Enumeration cap: REGBOUND_CAP environment variable, else 2^24.
uint64_t default_cap();

struct CheckOptions {
  Mode mode = Mode::Exact;
  uint64_t cap = default_cap();
  uint64_t seed = 1;
  uint32_t restarts = 24;
  bool stop_at_first = false;  // exact mode: stop at the first violating pair instead of the minimum
};

struct DeltaWitness {
  std::vector<uint32_t> A, B;
  uint64_t edges = 0;
  Rational ratio;  // d(A',B') / d(A,B)
};

struct PairVerdict {
  bool regular = true;
  bool decided = true;   // false only in sampled mode without a witness
  bool vacuous = false;  // d(A,B) = 0
  std::optional<DeltaWitness> witness;
  BigInt enumerated = 0;
};

struct SubsetSearchSpace {
  uint32_t a = 0, b = 0;          // exact subset sizes
  BigInt left_combos, right_combos;
  Side enumerate = Side::Right;   // side whose subsets get enumerated
  BigInt cost() const { return enumerate == Side::Left ? left_combos : right_combos; }
};

SubsetSearchSpace minimal_subset_reduction(const BipartiteGraph& g, const Rational& delta);
SubsetSearchSpace subset_space(const BipartiteGraph& g, uint32_t a, uint32_t b);

PairVerdict is_delta_regular_pair(const BipartiteGraph& g, const Rational& delta, const CheckOptions& opt = {});
// Same check with explicit minimum subset sizes (used when the threshold is irrational).
PairVerdict is_delta_regular_pair_sizes(const BipartiteGraph& g, uint32_t a, uint32_t b, const CheckOptions& opt = {});

// Extreme densities over all A' x B' with |A'| = a, |B'| = b.
struct DensityExtremes {
  uint64_t min_edges = 0, max_edges = 0;
  std::vector<uint32_t> min_A, min_B, max_A, max_B;
  BigInt enumerated = 0;
  bool exact = true;
};
DensityExtremes density_extremes(const BipartiteGraph& g, uint32_t a, uint32_t b, const CheckOptions& opt = {});

struct EpsVerdict {
  bool regular = true;
  bool decided = true;
  uint32_t a = 0, b = 0;
  Rational worst_density;  // the subset density furthest from p
};
// |d(S,T) - p| <= eps * p for |S| >= eps|A|, |T| >= eps|B|, p = d(G).
EpsVerdict is_eps_regular_graph(const BipartiteGraph& g, const Radical& eps, const CheckOptions& opt = {});
inline EpsVerdict is_eps_regular_graph(const BipartiteGraph& g, const Rational& eps, const CheckOptions& opt = {}) {
  return is_eps_regular_graph(g, Radical::of(eps), opt);
}

BipartiteGraph induced(const BipartiteGraph& g, const std::vector<uint32_t>& S, const std::vector<uint32_t>& T);

enum class Verdict { Regular, NotRegular, Undecided };
std::string to_string(Verdict v);

struct PairRecord {
  size_t p = 0, q = 0;
  uint64_t edges = 0;
  bool regular = true, decided = true, vacuous = false;
  BigInt lower = 0, upper = 0;
  std::string repair;  // "none", "empty", "complete", "shuffle"
  std::optional<DeltaWitness> witness;
};

struct EditInterval {
  BigInt lower = 0, upper = 0;
  Rational budget;
  Verdict verdict = Verdict::Undecided;
  std::vector<PairRecord> pairs;  // only irregular/undecided/vacuous pairs are kept
  size_t vacuous_pairs = 0;
};

EditInterval partition_edit_interval(const BipartiteGraph& g, const VertexPartition& P, const VertexPartition& Q,
                                     const Rational& delta, const CheckOptions& opt = {});
// Variant where the left side is covered by explicit cells (used with aux graphs).
EditInterval partition_edit_interval_cells(const BipartiteGraph& g, const std::vector<std::vector<uint32_t>>& P,
                                           const std::vector<std::vector<uint32_t>>& Q, const Rational& delta,
                                           const CheckOptions& opt = {});

struct GoodFailure {
  uint32_t layer = 0;
  size_t cell = 0;
  uint32_t axis = 0;  // 1-based position within the cell's clusters
  std::optional<DeltaWitness> witness;
};
struct GoodReport {
  bool good = true;
  bool decided = true;
  std::vector<GoodFailure> failures;
  size_t checked = 0;
};
// Bipartite graph G^i_{F,under(F)} of a layer-r cell (axis 1-based in sorted cluster order).
BipartiteGraph cell_axis_graph(const KPartition& P, uint32_t r, size_t cell, uint32_t axis);
GoodReport is_delta_good(const KPartition& P, const Rational& delta, const CheckOptions& opt = {});

struct KPartitionReport {
  Verdict verdict = Verdict::Regular;
  std::vector<EditInterval> axes;
  GoodReport good;
};
// P is an arity-(k-1) partition of the k classes of H, the ground set being the concatenated classes.
KPartitionReport is_delta_regular_kpartition(const KPartiteKGraph& H, const KPartition& P, const Rational& delta,
                                             const CheckOptions& opt = {}, bool require_good = true);

struct StarUnionReport {
  std::vector<bool> parts_regular;
  bool union_regular = false;
  bool property_holds = true;  // all parts regular => union regular
};
StarUnionReport check_star_union(const std::vector<BipartiteGraph>& gs, const Rational& delta, const CheckOptions& opt = {});

KPartition truncate_arity(const KPartition& P, uint32_t arity);

struct UniformRefinementReport {
  size_t family_member = 0;
  uint64_t symmetric_difference = 0;
  bool union_bound = false;
  KPartitionReport restricted;  // the ⟨3δ⟩ check of F with the restricted partition
  bool passes = false;
};
// family: a partition of ∏_{j<k} V_j given as labels over aux-left indices of axis k; members as k-1 graphs.
UniformRefinementReport check_uniform_refinement(const KPartiteKGraph& H, const KPartition& P,
                                                 const std::vector<KPartiteKGraph>& family, const Rational& delta,
                                                 const CheckOptions& opt = {});

// ---- refutation certificates ----
struct LedgerLine {
  uint32_t p_cell = 0;   // index into the left partition
  uint32_t level = 0;    // i, so that R is a cell of R_i
  uint32_t r_cell = 0;   // index into R_i
  std::vector<uint32_t> P1;
  uint64_t e_P_R = 0;          // e_G(P,R)
  uint64_t e_P_R_outside = 0;  // e_G(P, R \ R*_i)
  Rational value;              // max(0, γ'(¼·2^i·p·|P||R| - e_P_R_outside))
};

struct IrregularityCertificate {
  std::string graph_hash;     // hex FNV-1a of the graph's canonical binary form
  std::string graph_label;    // where the graph lives (informational)
  uint32_t left_size = 0, right_size = 0;
  uint64_t edges = 0;
  Rational delta, gamma, p;
  VertexPartition P, Q;
  std::map<uint32_t, VertexPartition> R_levels;  // R_i for every level used
  std::vector<LedgerLine> lines;
  Rational total, budget;
  bool refutes = false;       // total > budget
  std::vector<std::string> notes;
};

Rational gamma_prime(const Rational& gamma);
Rational ledger_value(const Rational& gamma, const Rational& p, uint32_t level, uint64_t P_size, uint64_t R_size,
                      uint64_t e_outside);
// R*_i: union of Q ∩ R over pairs with Q ⊂_c R, c = 2^-9.
std::vector<uint32_t> r_star(const VertexPartition& Q, const VertexPartition& R_i);

struct CertificateCheck {
  bool ok = true;
  std::vector<std::string> failures;
  Rational recomputed_total;
};
CertificateCheck verify_certificate(const IrregularityCertificate& cert, const BipartiteGraph& g);

void write_certificate(std::ostream& os, const IrregularityCertificate& cert);
IrregularityCertificate read_certificate(std::istream& is);

}  // namespace regbound
