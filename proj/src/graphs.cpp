#include "regbound/graphs.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace regbound {

// ---- VertexClassSet ----
VertexClassSet::VertexClassSet(std::vector<uint64_t> s, std::vector<std::string> n)
    : names(std::move(n)), sizes(std::move(s)) {
  for (uint64_t x : sizes) require(x > 0, "vertex classes must be non-empty");
  if (names.empty())
    for (size_t i = 0; i < sizes.size(); ++i) names.push_back("V" + std::to_string(i + 1));
  require(names.size() == sizes.size(), "class name count mismatch");
}

uint64_t VertexClassSet::offset(size_t cls) const {
  require(cls < sizes.size(), "class index out of range");
  uint64_t o = 0;
  for (size_t i = 0; i < cls; ++i) o += sizes[i];
  return o;
}

uint64_t VertexClassSet::total() const {
  uint64_t t = 0;
  for (uint64_t x : sizes) t += x;
  return t;
}

uint64_t VertexClassSet::product() const {
  unsigned __int128 p = 1;
  for (uint64_t x : sizes) {
    p *= x;
    if (p > UINT64_MAX) fail(ErrorCode::Resource, "product of class sizes exceeds 64 bits");
  }
  return static_cast<uint64_t>(p);
}

// ---- BipartiteGraph ----
BipartiteGraph::BipartiteGraph(uint32_t left, uint32_t right)
    : left_(left), right_(right), words_(bits::words_for(right)),
      data_(static_cast<size_t>(left) * bits::words_for(right), 0) {}

void BipartiteGraph::set_edge(uint32_t u, uint32_t v, bool on) {
  if (u >= left_ || v >= right_) fail(ErrorCode::Usage, "edge endpoint out of range");
  if (on) bits::set(row_mut(u), v); else bits::reset(row_mut(u), v);
}

uint64_t BipartiteGraph::edge_count() const { return bits::count(data_.data(), data_.size()); }

Rational BipartiteGraph::density() const {
  uint64_t cells = uint64_t(left_) * right_;
  if (cells == 0) return 0;
  return Rational(edge_count()) / Rational(cells);
}

BipartiteGraph BipartiteGraph::transposed() const {
  BipartiteGraph t(right_, left_);
  for (uint32_t u = 0; u < left_; ++u) {
    const uint64_t* r = row(u);
    for (size_t w = 0; w < words_; ++w) {
      uint64_t x = r[w];
      while (x) {
        uint32_t v = static_cast<uint32_t>(w * 64 + __builtin_ctzll(x));
        bits::set(t.row_mut(v), u);
        x &= x - 1;
      }
    }
  }
  return t;
}

BipartiteGraph BipartiteGraph::complement() const {
  BipartiteGraph c(left_, right_);
  for (uint32_t u = 0; u < left_; ++u)
    for (uint32_t v = 0; v < right_; ++v)
      if (!has_edge(u, v)) bits::set(c.row_mut(u), v);
  return c;
}

Rational density(const BipartiteGraph& g) { return g.density(); }

uint64_t codegree(const BipartiteGraph& g, Side side, uint32_t v, uint32_t w) {
  if (side == Side::Left) {
    require(v < g.left_size() && w < g.left_size(), "codegree vertex out of range");
    return bits::and_count(g.row(v), g.row(w), g.words());
  }
  require(v < g.right_size() && w < g.right_size(), "codegree vertex out of range");
  uint64_t c = 0;
  for (uint32_t u = 0; u < g.left_size(); ++u) c += (g.has_edge(u, v) && g.has_edge(u, w)) ? 1 : 0;
  return c;
}

uint64_t edges_between(const BipartiteGraph& g, const std::vector<uint32_t>& S, const Bits& T) {
  require(T.size() == g.right_size(), "right mask size mismatch");
  uint64_t c = 0;
  for (uint32_t u : S) {
    require(u < g.left_size(), "left index out of range");
    c += bits::and_count(g.row(u), T.data(), g.words());
  }
  return c;
}

uint64_t edges_between(const BipartiteGraph& g, const std::vector<uint32_t>& S, const std::vector<uint32_t>& T) {
  for (uint32_t v : T) require(v < g.right_size(), "right index out of range");
  return edges_between(g, S, Bits::from_indices(g.right_size(), T));
}

Rational density_between(const BipartiteGraph& g, const std::vector<uint32_t>& S, const std::vector<uint32_t>& T) {
  if (S.empty() || T.empty()) return 0;
  return Rational(edges_between(g, S, T)) / Rational(uint64_t(S.size()) * T.size());
}

BipartiteGraph blowup(const BipartiteGraph& g, uint32_t m) { return blowup(g, m, m); }

BipartiteGraph blowup(const BipartiteGraph& g, uint32_t ml, uint32_t mr) {
  require(ml >= 1 && mr >= 1, "blowup factor must be at least 1");
  BipartiteGraph out(g.left_size() * ml, g.right_size() * mr);
  for (uint32_t u = 0; u < g.left_size(); ++u) {
    uint64_t* dst = out.row_mut(u * ml);
    for (uint32_t v = 0; v < g.right_size(); ++v)
      if (g.has_edge(u, v))
        for (uint32_t j = 0; j < mr; ++j) bits::set(dst, v * mr + j);
    for (uint32_t i = 1; i < ml; ++i) std::copy(dst, dst + out.words(), out.row_mut(u * ml + i));
  }
  return out;
}

BipartiteGraph union_of(const BipartiteGraph& a, const BipartiteGraph& b) {
  require(a.left_size() == b.left_size() && a.right_size() == b.right_size(), "union of graphs on different sides");
  BipartiteGraph out = a;
  for (uint32_t u = 0; u < a.left_size(); ++u) {
    uint64_t* d = out.row_mut(u);
    const uint64_t* s = b.row(u);
    for (size_t w = 0; w < a.words(); ++w) d[w] |= s[w];
  }
  return out;
}

// ---- KPartiteKGraph ----
KPartiteKGraph::KPartiteKGraph(VertexClassSet classes) : classes_(std::move(classes)) {
  require(classes_.count() >= 2, "a k-partite k-graph needs k >= 2");
  (void)classes_.product();
}

KPartiteKGraph KPartiteKGraph::from_codes(VertexClassSet classes, std::vector<uint64_t> codes) {
  KPartiteKGraph h(std::move(classes));
  uint64_t limit = h.classes_.product();
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  if (!codes.empty()) require(codes.back() < limit, "edge code out of range");
  h.edges_ = std::move(codes);
  return h;
}

KPartiteKGraph KPartiteKGraph::from_tuples(VertexClassSet classes, const std::vector<std::vector<uint32_t>>& tuples) {
  KPartiteKGraph h(std::move(classes));
  std::vector<uint64_t> codes;
  codes.reserve(tuples.size());
  for (const auto& t : tuples) codes.push_back(h.encode(t));
  return from_codes(h.classes_, std::move(codes));
}

Rational KPartiteKGraph::density() const {
  return Rational(edge_count()) / Rational(classes_.product());
}

uint64_t KPartiteKGraph::encode(const std::vector<uint32_t>& t) const {
  require(t.size() == k(), "tuple arity mismatch");
  uint64_t code = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    require(t[i] < classes_.sizes[i], "tuple coordinate out of range");
    code = code * classes_.sizes[i] + t[i];
  }
  return code;
}

std::vector<uint32_t> KPartiteKGraph::decode(uint64_t code) const {
  std::vector<uint32_t> t(k());
  for (size_t i = k(); i-- > 0;) {
    t[i] = static_cast<uint32_t>(code % classes_.sizes[i]);
    code /= classes_.sizes[i];
  }
  return t;
}

bool KPartiteKGraph::contains_code(uint64_t code) const {
  return std::binary_search(edges_.begin(), edges_.end(), code);
}

bool KPartiteKGraph::contains(const std::vector<uint32_t>& t) const { return contains_code(encode(t)); }

Rational density(const KPartiteKGraph& h) { return h.density(); }

// ---- aux graphs ----
std::vector<uint32_t> AuxGraphView::decode_left(uint64_t index) const {
  std::vector<uint32_t> t(left_sizes.size());
  for (size_t i = left_sizes.size(); i-- > 0;) {
    t[i] = static_cast<uint32_t>(index % left_sizes[i]);
    index /= left_sizes[i];
  }
  return t;
}

uint64_t AuxGraphView::encode_left(const std::vector<uint32_t>& t) const {
  require(t.size() == left_sizes.size(), "aux tuple arity mismatch");
  uint64_t code = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    require(t[i] < left_sizes[i], "aux tuple coordinate out of range");
    code = code * left_sizes[i] + t[i];
  }
  return code;
}

AuxGraphView aux_graph(const KPartiteKGraph& h, size_t axis) {
  require(axis >= 1 && axis <= h.k(), "axis out of range");
  AuxGraphView view;
  view.axis = axis;
  uint64_t left = 1;
  for (size_t i = 0; i < h.k(); ++i)
    if (i != axis - 1) {
      view.left_sizes.push_back(h.classes().sizes[i]);
      left *= h.classes().sizes[i];
    }
  if (left > UINT32_MAX || h.classes().sizes[axis - 1] > UINT32_MAX)
    fail(ErrorCode::Resource, "aux graph too large to materialize");
  view.graph = BipartiteGraph(static_cast<uint32_t>(left), static_cast<uint32_t>(h.classes().sizes[axis - 1]));
  std::vector<uint32_t> rest(h.k() - 1);
  for (uint64_t code : h.codes()) {
    auto t = h.decode(code);
    size_t j = 0;
    for (size_t i = 0; i < t.size(); ++i)
      if (i != axis - 1) rest[j++] = t[i];
    view.graph.set_edge(static_cast<uint32_t>(view.encode_left(rest)), t[axis - 1]);
  }
  return view;
}

KPartiteKGraph lift_graph_to_kgraph(const BipartiteGraph& g, const std::vector<uint64_t>& left_class_sizes) {
  require(!left_class_sizes.empty(), "lift needs at least one left class");
  uint64_t prod = 1;
  for (uint64_t s : left_class_sizes) prod *= s;
  if (prod != g.left_size()) fail(ErrorCode::Usage, "malformed product index: left side is not the product of the given classes");
  std::vector<uint64_t> sizes = left_class_sizes;
  sizes.push_back(g.right_size());
  std::vector<uint64_t> codes;
  codes.reserve(g.edge_count());
  for (uint32_t u = 0; u < g.left_size(); ++u) {
    const uint64_t* r = g.row(u);
    for (size_t w = 0; w < g.words(); ++w) {
      uint64_t x = r[w];
      while (x) {
        uint64_t v = w * 64 + static_cast<uint64_t>(__builtin_ctzll(x));
        codes.push_back(uint64_t(u) * g.right_size() + v);
        x &= x - 1;
      }
    }
  }
  return KPartiteKGraph::from_codes(VertexClassSet(sizes), std::move(codes));
}

KPartiteKGraph to_kgraph(const BipartiteGraph& g) { return lift_graph_to_kgraph(g, {g.left_size()}); }

BipartiteGraph to_bipartite(const KPartiteKGraph& h) {
  require(h.k() == 2, "only 2-graphs convert to bipartite graphs");
  return aux_graph(h, 2).graph;
}

// ---- serialization ----
void write_text(std::ostream& os, const KPartiteKGraph& h) {
  os << "kgraph 1\nclasses";
  for (uint64_t s : h.classes().sizes) os << ' ' << s;
  os << "\nedges " << h.edge_count() << '\n';
  for (uint64_t code : h.codes()) {
    auto t = h.decode(code);
    for (size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << t[i];
    os << '\n';
  }
}

KPartiteKGraph read_text(std::istream& is) {
  std::string line, word;
  auto next_line = [&]() {
    if (!std::getline(is, line)) fail(ErrorCode::Usage, "unexpected end of graph text");
    return std::istringstream(line);
  };
  {
    auto s = next_line();
    int version = 0;
    s >> word >> version;
    if (word != "kgraph" || version != 1) fail(ErrorCode::Usage, "not a kgraph v1 text file");
  }
  std::vector<uint64_t> sizes;
  {
    auto s = next_line();
    s >> word;
    if (word != "classes") fail(ErrorCode::Usage, "missing classes header");
    uint64_t x;
    while (s >> x) sizes.push_back(x);
  }
  uint64_t m = 0;
  {
    auto s = next_line();
    s >> word >> m;
    if (word != "edges") fail(ErrorCode::Usage, "missing edges header");
  }
  KPartiteKGraph probe{VertexClassSet(sizes)};
  std::vector<uint64_t> codes;
  codes.reserve(m);
  std::vector<uint32_t> t(sizes.size());
  for (uint64_t e = 0; e < m; ++e) {
    auto s = next_line();
    for (auto& x : t)
      if (!(s >> x)) fail(ErrorCode::Usage, "short edge line");
    codes.push_back(probe.encode(t));
  }
  for (size_t i = 1; i < codes.size(); ++i)
    if (codes[i - 1] >= codes[i]) fail(ErrorCode::Usage, "edge list not sorted/unique");
  return KPartiteKGraph::from_codes(VertexClassSet(sizes), std::move(codes));
}

namespace {
constexpr char kMagic[4] = {'R', 'B', 'K', 'G'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>((static_cast<uint64_t>(v) >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) fail(ErrorCode::Usage, "truncated binary graph");
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return static_cast<T>(v);
}

struct Header {
  uint32_t encoding = 0;
  std::vector<uint64_t> sizes;
};

Header read_header(std::istream& is) {
  char m[4];
  if (!is.read(m, 4) || std::string(m, 4) != std::string(kMagic, 4)) fail(ErrorCode::Usage, "bad graph container magic");
  if (get<uint32_t>(is) != kVersion) fail(ErrorCode::Usage, "unsupported graph container version");
  Header h;
  h.encoding = get<uint32_t>(is);
  uint32_t k = get<uint32_t>(is);
  if (k < 2 || k > 64) fail(ErrorCode::Usage, "bad arity in graph container");
  for (uint32_t i = 0; i < k; ++i) h.sizes.push_back(get<uint64_t>(is));
  if (h.encoding > 1 || (h.encoding == 1 && k != 2)) fail(ErrorCode::Usage, "bad graph container encoding");
  return h;
}

BipartiteGraph read_dense_body(std::istream& is, const Header& h) {
  if (h.sizes[0] > UINT32_MAX || h.sizes[1] > UINT32_MAX) fail(ErrorCode::Usage, "graph too large");
  BipartiteGraph g(static_cast<uint32_t>(h.sizes[0]), static_cast<uint32_t>(h.sizes[1]));
  for (uint32_t u = 0; u < g.left_size(); ++u) {
    uint64_t* r = g.row_mut(u);
    for (size_t w = 0; w < g.words(); ++w) r[w] = get<uint64_t>(is);
  }
  return g;
}

std::vector<uint64_t> read_codes_body(std::istream& is) {
  uint64_t m = get<uint64_t>(is);
  std::vector<uint64_t> codes(m);
  for (auto& c : codes) c = get<uint64_t>(is);
  for (size_t i = 1; i < codes.size(); ++i)
    if (codes[i - 1] >= codes[i]) fail(ErrorCode::Usage, "binary edge codes not sorted/unique");
  return codes;
}
}  // namespace

void write_binary(std::ostream& os, const KPartiteKGraph& h) {
  os.write(kMagic, 4);
  put<uint32_t>(os, kVersion);
  put<uint32_t>(os, 0);
  put<uint32_t>(os, static_cast<uint32_t>(h.k()));
  for (uint64_t s : h.classes().sizes) put<uint64_t>(os, s);
  put<uint64_t>(os, h.edge_count());
  for (uint64_t c : h.codes()) put<uint64_t>(os, c);
}

void write_binary(std::ostream& os, const BipartiteGraph& g) {
  os.write(kMagic, 4);
  put<uint32_t>(os, kVersion);
  put<uint32_t>(os, 1);
  put<uint32_t>(os, 2);
  put<uint64_t>(os, g.left_size());
  put<uint64_t>(os, g.right_size());
  for (uint32_t u = 0; u < g.left_size(); ++u)
    for (size_t w = 0; w < g.words(); ++w) put<uint64_t>(os, g.row(u)[w]);
}

KPartiteKGraph read_binary_kgraph(std::istream& is) {
  Header h = read_header(is);
  if (h.encoding == 1) return to_kgraph(read_dense_body(is, h));
  return KPartiteKGraph::from_codes(VertexClassSet(h.sizes), read_codes_body(is));
}

BipartiteGraph read_binary_bipartite(std::istream& is) {
  Header h = read_header(is);
  if (h.sizes.size() != 2) fail(ErrorCode::Usage, "container does not hold a bipartite graph");
  if (h.encoding == 1) return read_dense_body(is, h);
  return to_bipartite(KPartiteKGraph::from_codes(VertexClassSet(h.sizes), read_codes_body(is)));
}

std::string to_bytes(const BipartiteGraph& g) {
  std::ostringstream os;
  write_binary(os, g);
  return os.str();
}

uint64_t content_hash(const BipartiteGraph& g) { return fnv1a64(to_bytes(g)); }

uint64_t content_hash(const KPartiteKGraph& h) {
  std::ostringstream os;
  write_binary(os, h);
  return fnv1a64(os.str());
}

}  // namespace regbound
