// Bipartite graphs (bit-packed rows) and k-partite k-graphs (sorted mixed-radix tuple codes).
#pragma once

#include "regbound/common.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace regbound {

// Disjoint named classes laid out contiguously in one global index space.
struct VertexClassSet {
  std::vector<std::string> names;
  std::vector<uint64_t> sizes;

  VertexClassSet() = default;
  explicit VertexClassSet(std::vector<uint64_t> sizes, std::vector<std::string> names = {});
  size_t count() const { return sizes.size(); }
  uint64_t offset(size_t cls) const;
  uint64_t total() const;
  // Product of all class sizes; throws when it does not fit 64 bits.
  uint64_t product() const;
  bool operator==(const VertexClassSet& o) const { return sizes == o.sizes; }
};

class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  BipartiteGraph(uint32_t left, uint32_t right);

  uint32_t left_size() const { return left_; }
  uint32_t right_size() const { return right_; }
  size_t words() const { return words_; }

  bool has_edge(uint32_t u, uint32_t v) const { return bits::test(row(u), v); }
  void set_edge(uint32_t u, uint32_t v, bool on = true);
  const uint64_t* row(uint32_t u) const { return data_.data() + static_cast<size_t>(u) * words_; }
  uint64_t* row_mut(uint32_t u) { return data_.data() + static_cast<size_t>(u) * words_; }

  uint64_t edge_count() const;
  uint32_t degree(uint32_t u) const { return static_cast<uint32_t>(bits::count(row(u), words_)); }
  Rational density() const;
  BipartiteGraph transposed() const;
  BipartiteGraph complement() const;
  bool operator==(const BipartiteGraph& o) const {
    return left_ == o.left_ && right_ == o.right_ && data_ == o.data_;
  }

 private:
  uint32_t left_ = 0, right_ = 0;
  size_t words_ = 0;
  std::vector<uint64_t> data_;
};

enum class Side { Left, Right };

Rational density(const BipartiteGraph& g);
uint64_t codegree(const BipartiteGraph& g, Side side, uint32_t v, uint32_t w);
uint64_t edges_between(const BipartiteGraph& g, const std::vector<uint32_t>& S, const std::vector<uint32_t>& T);
uint64_t edges_between(const BipartiteGraph& g, const std::vector<uint32_t>& S, const Bits& T);
Rational density_between(const BipartiteGraph& g, const std::vector<uint32_t>& S,
                         const std::vector<uint32_t>& T);
BipartiteGraph blowup(const BipartiteGraph& g, uint32_t m);
BipartiteGraph blowup(const BipartiteGraph& g, uint32_t m_left, uint32_t m_right);
BipartiteGraph union_of(const BipartiteGraph& a, const BipartiteGraph& b);  // sides must match

class KPartiteKGraph {
 public:
  KPartiteKGraph() = default;
  explicit KPartiteKGraph(VertexClassSet classes);
  static KPartiteKGraph from_codes(VertexClassSet classes, std::vector<uint64_t> codes);
  static KPartiteKGraph from_tuples(VertexClassSet classes, const std::vector<std::vector<uint32_t>>& tuples);

  size_t k() const { return classes_.count(); }
  const VertexClassSet& classes() const { return classes_; }
  const std::vector<uint64_t>& codes() const { return edges_; }
  uint64_t edge_count() const { return edges_.size(); }
  Rational density() const;

  // Tuples use class-local indices, one entry per class.
  uint64_t encode(const std::vector<uint32_t>& tuple) const;
  std::vector<uint32_t> decode(uint64_t code) const;
  bool contains(const std::vector<uint32_t>& tuple) const;
  bool contains_code(uint64_t code) const;
  bool operator==(const KPartiteKGraph& o) const { return classes_ == o.classes_ && edges_ == o.edges_; }

 private:
  VertexClassSet classes_;
  std::vector<uint64_t> edges_;  // sorted, unique
};

Rational density(const KPartiteKGraph& h);

// Auxiliary bipartite graph of h for one axis: left vertices are tuples over the other classes
// (mixed-radix in class order), right vertices are the axis class.
struct AuxGraphView {
  BipartiteGraph graph;
  size_t axis = 1;                   // 1-based
  std::vector<uint64_t> left_sizes;  // sizes of the other classes, in order
  std::vector<uint32_t> decode_left(uint64_t index) const;
  uint64_t encode_left(const std::vector<uint32_t>& tuple) const;
};

AuxGraphView aux_graph(const KPartiteKGraph& h, size_t axis);
KPartiteKGraph lift_graph_to_kgraph(const BipartiteGraph& g, const std::vector<uint64_t>& left_class_sizes);

// Conversions between a bipartite graph and the equivalent 2-partite 2-graph.
KPartiteKGraph to_kgraph(const BipartiteGraph& g);
BipartiteGraph to_bipartite(const KPartiteKGraph& h);

// ---- serialization ----
// Text: "kgraph 1", "classes n1 ... nk", "edges N", then one sorted tuple per line.
void write_text(std::ostream& os, const KPartiteKGraph& h);
KPartiteKGraph read_text(std::istream& is);
// Binary container: magic "RBKG", version, encoding (0 = sorted codes, 1 = dense bitmap for k=2).
void write_binary(std::ostream& os, const KPartiteKGraph& h);
void write_binary(std::ostream& os, const BipartiteGraph& g);  // dense encoding
KPartiteKGraph read_binary_kgraph(std::istream& is);
BipartiteGraph read_binary_bipartite(std::istream& is);
std::string to_bytes(const BipartiteGraph& g);
uint64_t content_hash(const BipartiteGraph& g);
uint64_t content_hash(const KPartiteKGraph& h);

}  // namespace regbound
