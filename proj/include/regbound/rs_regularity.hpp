// Polyad-based regularity of k-graphs, complexes with the dense counting and slicing checks,
// and the bridge from polyad regularity to ⟨δ⟩-regularity of the auxiliary graph.
#pragma once

#include "regbound/common.hpp"
#include "regbound/graphs.hpp"
#include "regbound/partitions.hpp"
#include "regbound/regularity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace regbound {

// coef * (x/2)^exponent; covers the constant tolerance (exponent 0) and the F_{k,γ} family.
struct ToleranceFn {
  Rational coef = 0;
  uint64_t exponent = 0;
  static ToleranceFn constant(const Rational& c) { return ToleranceFn{c, 0}; }
  Rational operator()(const Rational& x) const;
  std::string str() const;
};
// F_{k,γ}(x) = (γ³/12)(x/2)^(2^(k+1))
ToleranceFn F_kgamma(uint32_t k, const Rational& gamma);
// δ⁴(x/2)^(2^(k+3)), the tolerance the reduction claim asks of the partition
ToleranceFn reduction_tolerance(uint32_t k, const Rational& delta);

struct RSCheckOptions {
  Mode mode = Mode::Exact;
  uint64_t cap = default_cap();  // sub-polyads (times per-subset work) allowed in exact mode
  uint32_t part_limit = 16;      // edges per part in exact mode
  uint64_t samples = 4096;
  uint64_t seed = 1;
};

// ---- relative density ----
struct CliqueCount {
  uint64_t cliques = 0, in_H = 0;
  Rational density;  // 0 when there are no cliques
};
// S: (k-1)-sets over H's concatenated classes; cliques take one vertex per class.
CliqueCount relative_density(const KPartiteKGraph& H, const UniformSet& S);
// H's edges as k-sets of global vertices.
UniformSet as_uniform(const KPartiteKGraph& H);

// ---- regularity inside one polyad ----
struct SubPolyad {
  Polyad S;
  uint64_t cliques = 0, in_H = 0;
  Rational density;
};
struct PolyadVerdict {
  bool regular = true;
  bool decided = true;   // false in sampled mode without a witness
  bool vacuous = false;  // |𝒦(P)| = 0
  uint64_t cliques = 0, in_H = 0;
  Rational density;      // d_H(P)
  Rational min_density, max_density;  // over qualifying sub-polyads seen
  std::optional<SubPolyad> witness;   // (ε,d): outside d±ε; ε-regular: the lowest sub-polyad
  std::optional<SubPolyad> witness_high;  // ε-regular: the highest sub-polyad
  BigInt enumerated = 0;
};
// H: k-sets over the polyad's ground, only those in 𝒦(P) count.
PolyadVerdict is_eps_d_regular(const UniformSet& H, const Polyad& P, const Rational& eps, const Rational& d,
                               const RSCheckOptions& opt = {});
// Some d works: the qualifying densities span at most 2ε.
PolyadVerdict is_eps_regular_polyad(const UniformSet& H, const Polyad& P, const Rational& eps,
                                    const RSCheckOptions& opt = {});
// Infimum of ε for which H is (ε,d)-regular in P; exact mode only.
Rational measured_eps(const UniformSet& H, const Polyad& P, const Rational& d, const RSCheckOptions& opt = {});
// Recount d_H(S) directly from clique_set(S).
SubPolyad recount(const UniformSet& H, const Polyad& S);

// ---- partitions ----
struct PartitionPolyad {
  std::vector<uint32_t> faces;  // face cell ids, face i omits class i
  Polyad polyad;
  uint64_t cliques = 0, in_H = 0;
};
// Every k-polyad of an arity-(k-1) partition of H's classes with a nonempty clique set.
std::vector<PartitionPolyad> partition_polyads(const KPartiteKGraph& H, const KPartition& P);

struct IrregularPolyad {
  std::vector<uint32_t> faces;
  uint64_t cliques = 0;
  PolyadVerdict verdict;
};
struct PartitionVerdict {
  Verdict verdict = Verdict::Regular;
  BigInt irregular_mass = 0, undecided_mass = 0;
  Rational budget;  // ε|V(H)|^k
  size_t polyads = 0;
  std::vector<IrregularPolyad> irregular;
};
PartitionVerdict is_eps_regular_partition(const KPartiteKGraph& H, const KPartition& P, const Rational& eps,
                                          const RSCheckOptions& opt = {});

struct RSParams {
  std::vector<uint64_t> a;  // a_1..a_r
  ToleranceFn f;
  Rational eps = 1;         // partition-level parameter
  Rational d0() const;      // min 1/a_i, i >= 2 (1 when r = 1)
};
// a_1..a_r read off P; nullopt with a reason when some polyad is split unevenly.
std::optional<std::vector<uint64_t>> layer_counts(const KPartition& P, std::string* why = nullptr);

struct EquitableFailure {
  uint32_t layer = 0;
  size_t cell = 0;
  PolyadVerdict verdict;
};
struct EquitableReport {
  bool equitable = true;
  bool decided = true;
  std::string reason;  // first structural failure
  size_t cells_checked = 0;
  std::vector<EquitableFailure> failures;
};
EquitableReport is_f_equitable(const KPartition& P, const RSParams& params, const RSCheckOptions& opt = {});

// ---- complexes ----
struct RankedHypergraph {
  uint32_t ground = 0;
  std::vector<std::vector<uint32_t>> classes;  // global vertex lists, one per class
  std::vector<UniformSet> ranks;               // ranks[r] for 1 <= r <= k-1; rank 1 is every vertex

  uint32_t k() const { return static_cast<uint32_t>(classes.size()); }
  const UniformSet& rank(uint32_t r) const;
  void validate() const;  // transversal edges, P^(r) ⊆ 𝒦(P^(r-1))
};
RankedHypergraph complete_complex(const VertexClassSet& classes);
// Each rank-r clique of the previous rank kept with probability d[r-2].
RankedHypergraph random_complex(const VertexClassSet& classes, const std::vector<Rational>& d, uint64_t seed);
// Q = P[V_1,...,V_{k-1},V_k'].
RankedHypergraph slice_complex(const RankedHypergraph& P, const std::vector<uint32_t>& Vk_subset);
// Cliques of rank r-1 on the given classes.
uint64_t count_cliques(const RankedHypergraph& P, const std::vector<uint32_t>& class_subset);
// d_r = |P^(r)| / |𝒦(P^(r-1))| summed over all r-sets of classes, r = 2..k-1.
std::vector<Rational> measured_densities(const RankedHypergraph& P);

struct DenseCountReport {
  uint32_t k = 0;
  std::vector<Rational> d;
  uint64_t cliques = 0;
  Rational predicted, lower, upper;
  bool within_band = false;
  Rational slack;  // |count - predicted| / predicted, or 0 when both are 0
  // per-edge extension over P_k (the rank-(k-1) edges missing class k)
  uint64_t top_edges = 0, exceptional_edges = 0;
  Rational per_edge_predicted, exceptional_fraction;
  bool per_edge_within = false;  // exceptional ≤ γ|P_k|
};
// d empty → measured_densities(P).
DenseCountReport dense_counting_check(const RankedHypergraph& P, const Rational& gamma,
                                      const std::vector<Rational>& d = {});

struct SliceLayer {
  uint32_t rank = 0;
  std::vector<uint32_t> class_subset;
  Rational eps_P, eps_Q;  // measured infima
  bool P_ok = false;      // (f(d0), d_r)-regular in P
  bool Q_ok = false;      // (f*(d0), d_r)-regular in Q
};
struct SlicingReport {
  std::vector<Rational> d;
  Rational d0, f_d0, fstar_d0;
  bool f_bound = false;       // f(d0) ≤ (δ/2) F_{k-1,1/4}(d0)
  bool hypothesis = false;    // every layer of P within f(d0)
  bool conclusion = false;    // every layer of Q within f*(d0)
  bool identity = false;      // Q = P
  std::vector<SliceLayer> layers;
};
SlicingReport slicing_check(const RankedHypergraph& P, const std::vector<uint32_t>& Vk_subset, const ToleranceFn& f,
                            const Rational& delta, const std::vector<Rational>& d = {}, const RSCheckOptions& opt = {});

// ---- reduction ----
struct HypothesisFailure {
  std::vector<uint32_t> faces;
  uint64_t cliques = 0;
  Rational density;
  SubPolyad witness;
};
struct ConclusionFailure {
  size_t e_cell = 0, v_cluster = 0;
  PairVerdict verdict;
};
struct ReductionReport {
  bool equitable_checked = false, equitable = false;
  std::string equitable_detail;
  Verdict hypothesis = Verdict::Regular;  // Regular = holds
  std::vector<HypothesisFailure> hypothesis_failures;
  Verdict conclusion = Verdict::Regular;
  std::vector<ConclusionFailure> conclusion_failures;
  size_t polyads = 0, pairs = 0;
  Radical threshold;     // 2√δ
  std::string outcome;   // "confirmed", "violated", "hypothesis-failed", "undecided"
};
// f empty → reduction_tolerance(k, δ); check_equitable false skips the f-equitable precondition.
ReductionReport reduction_check(const KPartiteKGraph& H, const KPartition& P, const Rational& delta,
                                const std::optional<ToleranceFn>& f = std::nullopt, bool check_equitable = true,
                                const RSCheckOptions& opt = {});

// Structured text with exact rationals.
std::string to_json(const PolyadVerdict& v);
std::string to_json(const PartitionVerdict& v);
std::string to_json(const DenseCountReport& r);
std::string to_json(const SlicingReport& r);
std::string to_json(const ReductionReport& r);

}  // namespace regbound
