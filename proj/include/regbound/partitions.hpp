// Vertex partitions, approximate refinement, uniform set systems, polyads and layered k-partitions.
#pragma once

#include "regbound/common.hpp"
#include "regbound/graphs.hpp"

#include <iosfwd>
#include <unordered_map>
#include <vector>

namespace regbound {

class VertexPartition {
 public:
  VertexPartition() = default;
  // Validates disjointness and coverage of [0,n); cells are sorted and ordered by smallest vertex.
  VertexPartition(uint64_t n, std::vector<std::vector<uint32_t>> cells);
  static VertexPartition from_labels(const std::vector<uint32_t>& labels);
  static VertexPartition blocks(uint64_t n, uint64_t count);  // equal contiguous blocks
  static VertexPartition trivial(uint64_t n) { return blocks(n, 1); }
  static VertexPartition singletons(uint64_t n) { return blocks(n, n); }

  uint64_t ground_size() const { return n_; }
  size_t size() const { return cells_.size(); }
  const std::vector<std::vector<uint32_t>>& cells() const { return cells_; }
  const std::vector<uint32_t>& cell(size_t i) const { return cells_.at(i); }
  uint32_t cell_of(uint32_t v) const { return label_.at(v); }
  const std::vector<uint32_t>& labels() const { return label_; }
  bool equitable() const;
  bool refines(const VertexPartition& coarser) const;  // exact refinement
  bool operator==(const VertexPartition& o) const { return n_ == o.n_ && cells_ == o.cells_; }

 private:
  uint64_t n_ = 0;
  std::vector<std::vector<uint32_t>> cells_;
  std::vector<uint32_t> label_;
};

// S ⊂_β T: |S \ T| < β|S|, with S ⊆ T always qualifying (so β = 0 means exact containment).
bool approx_subset(uint64_t outside, uint64_t size, const Rational& beta);

struct RefinementReport {
  Rational beta;
  std::vector<int64_t> host;       // per Q-cell: host P-cell or -1
  uint64_t mass_unassigned = 0;    // vertices in Q-cells without a β-host
  Rational mass_fraction;          // mass_unassigned / n
  bool verdict = false;            // Q ≺_β P
};

RefinementReport refines_beta(const VertexPartition& Q, const VertexPartition& P, const Rational& beta);
// Host of an arbitrary vertex set S in P at β, or -1 (S ∈_β P iff result >= 0).
int64_t beta_host(const std::vector<uint32_t>& S, const VertexPartition& P, const Rational& beta);

struct RefinementUnion {
  size_t p_cell = 0;
  std::vector<uint32_t> q_cells;    // Q-cells with Q ⊂_δ P
  uint64_t symmetric_difference = 0;
  bool within_bound = false;        // |P △ P_Q| <= 3δ|P|
  std::vector<uint64_t> all_differences;  // per P-cell, for inspection
};
RefinementUnion refinement_union(const VertexPartition& Q, const VertexPartition& P, const Rational& delta);

struct RefinementSizeReport {
  size_t q_cells = 0, p_cells = 0;
  bool holds = false;  // |Q| >= |P|/4
};
RefinementSizeReport check_refinement_size(const VertexPartition& Q, const VertexPartition& P);

// r-uniform set system on vertices [0,n): sorted r-sets encoded base n, kept sorted.
class UniformSet {
 public:
  UniformSet() = default;
  UniformSet(uint32_t n, uint32_t r) : n_(n), r_(r) {}
  static UniformSet from_sets(uint32_t n, uint32_t r, const std::vector<std::vector<uint32_t>>& sets);
  static UniformSet from_codes(uint32_t n, uint32_t r, std::vector<uint64_t> codes);

  uint32_t ground() const { return n_; }
  uint32_t arity() const { return r_; }
  size_t size() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }
  const std::vector<uint64_t>& codes() const { return codes_; }
  uint64_t encode(std::vector<uint32_t> set) const;  // sorts its argument
  std::vector<uint32_t> decode(uint64_t code) const;
  bool contains(const std::vector<uint32_t>& set) const;
  bool contains_code(uint64_t c) const;
  bool operator==(const UniformSet& o) const { return n_ == o.n_ && r_ == o.r_ && codes_ == o.codes_; }

 private:
  uint32_t n_ = 0, r_ = 0;
  std::vector<uint64_t> codes_;
};

// Cross_r(P): all r-sets meeting r distinct cells.
UniformSet cross_k(const VertexPartition& P, uint32_t r);
BigInt cross_count(const VertexPartition& P, uint32_t r);

// A k-polyad: clusters Z_1..Z_k and parts F_1..F_k, F_i a (k-1)-set family avoiding Z_i.
// For k = 2 the parts are 1-sets: F_1 ⊆ Z_2 and F_2 ⊆ Z_1.
struct Polyad {
  std::vector<std::vector<uint32_t>> clusters;
  std::vector<UniformSet> parts;
  size_t k() const { return clusters.size(); }
  void validate() const;
};

UniformSet clique_set(const Polyad& P);
// F ∘ V for a family F of (k-1)-sets and a vertex set V disjoint from V(F).
UniformSet compose(const UniformSet& F, const std::vector<uint32_t>& V);

struct KCell {
  UniformSet edges;
  std::vector<uint32_t> under;  // r indices into layer r-1 (clusters when r = 2), under[i] omits the i-th cluster
  std::vector<uint32_t> clusters;  // sorted cluster ids spanned
};

class KPartition {
 public:
  KPartition() = default;
  // layers[0] is layer 2, layers[1] is layer 3, ... Validates eagerly.
  KPartition(VertexPartition p1, std::vector<std::vector<KCell>> upper_layers);
  // One cell per r-polyad for every layer up to `arity`.
  static KPartition complete(VertexPartition p1, uint32_t arity);

  uint32_t arity() const { return static_cast<uint32_t>(upper_.size() + 1); }
  const VertexPartition& p1() const { return p1_; }
  // layer(r) for r >= 2
  const std::vector<KCell>& layer(uint32_t r) const;
  // Index of the layer-r cell containing an r-set (r >= 2), or of the cluster when r = 1.
  int64_t cell_of(uint32_t r, const std::vector<uint32_t>& set) const;
  bool operator==(const KPartition& o) const;

 private:
  void validate_and_index();
  VertexPartition p1_;
  std::vector<std::vector<KCell>> upper_;
  std::vector<std::unordered_map<uint64_t, uint32_t>> index_;
};

// Polyad under(F) for a cell of layer r.
Polyad under_polyad(const KPartition& P, uint32_t r, size_t cell);

// Class-aware views of a partition of a k-partite ground set (arity k-1).
std::vector<uint32_t> class_of_clusters(const KPartition& P, const VertexClassSet& classes);
std::vector<size_t> V_i(const KPartition& P, const VertexClassSet& classes, size_t axis);  // cluster ids, axis 1-based
std::vector<size_t> E_i(const KPartition& P, const VertexClassSet& classes, size_t axis);  // top-layer cells

struct DecomposedPolyad {
  std::vector<uint32_t> part_cells;  // top-layer cell ids for the faces omitting clusters 1..k-1, then F
  UniformSet cliques;
};
std::vector<DecomposedPolyad> decompose_polyads(const KPartition& P, const VertexClassSet& classes, size_t F_cell,
                                                size_t V_cluster);

struct RestrictedPartition {
  KPartition partition;
  std::vector<uint32_t> kept_vertices;  // new index -> old vertex
};
RestrictedPartition restrict_kpartition(const KPartition& P, const std::vector<uint32_t>& keep_vertices);

// ---- text serialization ----
void write_partition(std::ostream& os, const VertexPartition& P);
VertexPartition read_partition(std::istream& is);
void write_kpartition(std::ostream& os, const KPartition& P);
KPartition read_kpartition(std::istream& is);

}  // namespace regbound
