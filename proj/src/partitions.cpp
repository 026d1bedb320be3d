#include "regbound/partitions.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace regbound {

// ---- VertexPartition ----
VertexPartition::VertexPartition(uint64_t n, std::vector<std::vector<uint32_t>> cells) : n_(n) {
  require(n <= UINT32_MAX, "ground set too large");
  label_.assign(n, UINT32_MAX);
  for (auto& c : cells) {
    require(!c.empty(), "partition cell is empty");
    std::sort(c.begin(), c.end());
    for (size_t i = 0; i < c.size(); ++i) {
      require(c[i] < n, "partition cell has a vertex outside the ground set");
      require(i == 0 || c[i] != c[i - 1], "duplicate vertex in partition cell");
    }
  }
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (size_t ci = 0; ci < cells.size(); ++ci)
    for (uint32_t v : cells[ci]) {
      require(label_[v] == UINT32_MAX, "partition cells overlap");
      label_[v] = static_cast<uint32_t>(ci);
    }
  for (uint64_t v = 0; v < n; ++v) require(label_[v] != UINT32_MAX, "partition does not cover the ground set");
  cells_ = std::move(cells);
}

VertexPartition VertexPartition::from_labels(const std::vector<uint32_t>& labels) {
  std::map<uint32_t, std::vector<uint32_t>> groups;
  for (uint32_t v = 0; v < labels.size(); ++v) groups[labels[v]].push_back(v);
  std::vector<std::vector<uint32_t>> cells;
  for (auto& [k, c] : groups) cells.push_back(std::move(c));
  return VertexPartition(labels.size(), std::move(cells));
}

VertexPartition VertexPartition::blocks(uint64_t n, uint64_t count) {
  require(count >= 1 && count <= n && n % count == 0, "block partition needs count dividing n");
  uint64_t size = n / count;
  std::vector<std::vector<uint32_t>> cells(count);
  for (uint64_t c = 0; c < count; ++c)
    for (uint64_t j = 0; j < size; ++j) cells[c].push_back(static_cast<uint32_t>(c * size + j));
  return VertexPartition(n, std::move(cells));
}

bool VertexPartition::equitable() const {
  for (const auto& c : cells_)
    if (c.size() != cells_.front().size()) return false;
  return true;
}

bool VertexPartition::refines(const VertexPartition& coarser) const {
  if (coarser.n_ != n_) return false;
  for (const auto& c : cells_)
    for (uint32_t v : c)
      if (coarser.cell_of(v) != coarser.cell_of(c.front())) return false;
  return true;
}

// ---- approximate refinement ----
bool approx_subset(uint64_t outside, uint64_t size, const Rational& beta) {
  if (outside == 0) return true;
  return Rational(outside) < beta * Rational(size);
}

int64_t beta_host(const std::vector<uint32_t>& S, const VertexPartition& P, const Rational& beta) {
  require(beta <= rat(1, 2) && beta >= 0, "approximate refinement requires 0 <= beta <= 1/2");
  if (S.empty()) return -1;
  std::unordered_map<uint32_t, uint64_t> hits;
  for (uint32_t v : S) {
    require(v < P.ground_size(), "vertex outside ground set");
    ++hits[P.cell_of(v)];
  }
  int64_t best = -1;
  for (const auto& [cell, inside] : hits)
    if (approx_subset(S.size() - inside, S.size(), beta) && (best < 0 || cell < best)) best = cell;
  return best;
}

RefinementReport refines_beta(const VertexPartition& Q, const VertexPartition& P, const Rational& beta) {
  require(Q.ground_size() == P.ground_size(), "partitions live on different ground sets");
  RefinementReport rep;
  rep.beta = beta;
  for (const auto& q : Q.cells()) {
    int64_t h = beta_host(q, P, beta);
    rep.host.push_back(h);
    if (h < 0) rep.mass_unassigned += q.size();
  }
  rep.mass_fraction = Q.ground_size() ? Rational(rep.mass_unassigned) / Rational(Q.ground_size()) : Rational(0);
  rep.verdict = Rational(rep.mass_unassigned) <= beta * Rational(Q.ground_size());
  return rep;
}

RefinementUnion refinement_union(const VertexPartition& Q, const VertexPartition& P, const Rational& delta) {
  auto rep = refines_beta(Q, P, delta);
  if (!rep.verdict) fail(ErrorCode::Usage, "refinement_union requires Q ≺_δ P");
  RefinementUnion best;
  bool have = false;
  for (size_t pi = 0; pi < P.size(); ++pi) {
    std::vector<uint32_t> members;
    uint64_t in_union = 0, in_both = 0;
    for (size_t qi = 0; qi < Q.size(); ++qi)
      if (rep.host[qi] == static_cast<int64_t>(pi)) {
        members.push_back(static_cast<uint32_t>(qi));
        in_union += Q.cell(qi).size();
        for (uint32_t v : Q.cell(qi)) in_both += P.cell_of(v) == pi ? 1 : 0;
      }
    uint64_t diff = (P.cell(pi).size() - in_both) + (in_union - in_both);
    best.all_differences.push_back(diff);
    // minimize |P △ P_Q| / |P|; ties keep the lowest index
    bool better = !have || Rational(diff) / Rational(P.cell(pi).size()) <
                               Rational(best.symmetric_difference) / Rational(P.cell(best.p_cell).size());
    if (better) {
      have = true;
      best.p_cell = pi;
      best.q_cells = members;
      best.symmetric_difference = diff;
    }
  }
  best.within_bound = Rational(best.symmetric_difference) <= 3 * delta * Rational(P.cell(best.p_cell).size());
  return best;
}

RefinementSizeReport check_refinement_size(const VertexPartition& Q, const VertexPartition& P) {
  require(P.equitable(), "refinement-size check requires an equitable P");
  if (!refines_beta(Q, P, rat(1, 2)).verdict) fail(ErrorCode::Usage, "refinement-size check requires Q ≺_{1/2} P");
  RefinementSizeReport r;
  r.q_cells = Q.size();
  r.p_cells = P.size();
  r.holds = 4 * Q.size() >= P.size();
  return r;
}

// ---- UniformSet ----
namespace {
void check_code_space(uint32_t n, uint32_t r) {
  unsigned __int128 p = 1;
  for (uint32_t i = 0; i < r; ++i) {
    p *= std::max<uint32_t>(n, 1);
    if (p > UINT64_MAX) fail(ErrorCode::Resource, "set family code space exceeds 64 bits");
  }
}
}  // namespace

UniformSet UniformSet::from_codes(uint32_t n, uint32_t r, std::vector<uint64_t> codes) {
  check_code_space(n, r);
  UniformSet u(n, r);
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  u.codes_ = std::move(codes);
  return u;
}

UniformSet UniformSet::from_sets(uint32_t n, uint32_t r, const std::vector<std::vector<uint32_t>>& sets) {
  check_code_space(n, r);
  UniformSet u(n, r);
  std::vector<uint64_t> codes;
  codes.reserve(sets.size());
  for (const auto& s : sets) codes.push_back(u.encode(s));
  return from_codes(n, r, std::move(codes));
}

uint64_t UniformSet::encode(std::vector<uint32_t> s) const {
  require(s.size() == r_, "set arity mismatch");
  std::sort(s.begin(), s.end());
  uint64_t c = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    require(s[i] < n_, "set element out of range");
    require(i == 0 || s[i] != s[i - 1], "set has repeated element");
    c = c * n_ + s[i];
  }
  return c;
}

std::vector<uint32_t> UniformSet::decode(uint64_t c) const {
  std::vector<uint32_t> s(r_);
  for (size_t i = r_; i-- > 0;) {
    s[i] = static_cast<uint32_t>(c % n_);
    c /= n_;
  }
  return s;
}

bool UniformSet::contains_code(uint64_t c) const { return std::binary_search(codes_.begin(), codes_.end(), c); }

bool UniformSet::contains(const std::vector<uint32_t>& s) const {
  if (s.size() != r_) return false;
  for (uint32_t v : s)
    if (v >= n_) return false;
  return contains_code(encode(s));
}

BigInt cross_count(const VertexPartition& P, uint32_t r) {
  // elementary symmetric polynomial of degree r in the cell sizes
  std::vector<BigInt> e(r + 1, 0);
  e[0] = 1;
  for (const auto& c : P.cells())
    for (uint32_t j = r; j >= 1; --j) e[j] += e[j - 1] * BigInt(c.size());
  return e[r];
}

UniformSet cross_k(const VertexPartition& P, uint32_t r) {
  require(r >= 2, "cross_k needs r >= 2");
  require(r <= P.size(), "r exceeds the number of cells");
  uint32_t n = static_cast<uint32_t>(P.ground_size());
  UniformSet probe(n, r);
  std::vector<uint64_t> codes;
  for_each_combination(static_cast<uint32_t>(P.size()), r, [&](const std::vector<uint32_t>& cs) {
    std::vector<size_t> idx(r, 0);
    std::vector<uint32_t> s(r);
    while (true) {
      for (uint32_t j = 0; j < r; ++j) s[j] = P.cell(cs[j])[idx[j]];
      codes.push_back(probe.encode(s));
      uint32_t j = r;
      while (j > 0) {
        --j;
        if (++idx[j] < P.cell(cs[j]).size()) break;
        idx[j] = 0;
        if (j == 0) return true;
      }
    }
  });
  return UniformSet::from_codes(n, r, std::move(codes));
}

// ---- polyads ----
namespace {
// cluster position of every vertex of a polyad (or -1)
std::unordered_map<uint32_t, uint32_t> cluster_index(const std::vector<std::vector<uint32_t>>& clusters) {
  std::unordered_map<uint32_t, uint32_t> m;
  for (uint32_t i = 0; i < clusters.size(); ++i)
    for (uint32_t v : clusters[i]) {
      require(!m.count(v), "polyad clusters overlap");
      m[v] = i;
    }
  return m;
}
}  // namespace

void Polyad::validate() const {
  size_t kk = clusters.size();
  require(kk >= 2, "a polyad needs k >= 2");
  require(parts.size() == kk, "polyad must have k parts");
  auto where = cluster_index(clusters);
  for (size_t i = 0; i < kk; ++i) {
    require(parts[i].arity() == kk - 1, "polyad part arity mismatch");
    for (uint64_t c : parts[i].codes()) {
      std::vector<bool> seen(kk, false);
      for (uint32_t v : parts[i].decode(c)) {
        auto it = where.find(v);
        require(it != where.end(), "polyad part uses a vertex outside the clusters");
        require(it->second != i && !seen[it->second], "polyad part edge is not transversal to the right clusters");
        seen[it->second] = true;
      }
    }
  }
}

UniformSet clique_set(const Polyad& P) {
  P.validate();
  size_t kk = P.k();
  uint32_t n = P.parts[0].ground();
  auto where = cluster_index(P.clusters);
  std::vector<uint64_t> out;
  UniformSet probe(n, static_cast<uint32_t>(kk));
  const UniformSet& last = P.parts[kk - 1];
  for (uint64_t c : last.codes()) {
    auto f = last.decode(c);
    for (uint32_t v : P.clusters[kk - 1]) {
      bool ok = true;
      for (size_t j = 0; j + 1 < kk && ok; ++j) {
        // face omitting the vertex of cluster j
        std::vector<uint32_t> face;
        for (uint32_t x : f)
          if (where[x] != j) face.push_back(x);
        face.push_back(v);
        ok = P.parts[j].contains(face);
      }
      if (ok) {
        auto t = f;
        t.push_back(v);
        out.push_back(probe.encode(t));
      }
    }
  }
  return UniformSet::from_codes(n, static_cast<uint32_t>(kk), std::move(out));
}

UniformSet compose(const UniformSet& F, const std::vector<uint32_t>& V) {
  std::vector<uint64_t> out;
  UniformSet probe(F.ground(), F.arity() + 1);
  for (uint64_t c : F.codes()) {
    auto f = F.decode(c);
    for (uint32_t v : V) {
      require(std::find(f.begin(), f.end(), v) == f.end(), "compose: V overlaps the vertex set of F");
      auto t = f;
      t.push_back(v);
      out.push_back(probe.encode(t));
    }
  }
  return UniformSet::from_codes(F.ground(), F.arity() + 1, std::move(out));
}

// ---- KPartition ----
KPartition::KPartition(VertexPartition p1, std::vector<std::vector<KCell>> upper)
    : p1_(std::move(p1)), upper_(std::move(upper)) {
  validate_and_index();
}

const std::vector<KCell>& KPartition::layer(uint32_t r) const {
  require(r >= 2 && r <= arity(), "layer index out of range");
  return upper_[r - 2];
}

int64_t KPartition::cell_of(uint32_t r, const std::vector<uint32_t>& set) const {
  if (r == 1) {
    require(set.size() == 1, "layer-1 lookup takes a single vertex");
    return p1_.cell_of(set[0]);
  }
  require(r >= 2 && r <= arity(), "layer index out of range");
  UniformSet probe(static_cast<uint32_t>(p1_.ground_size()), r);
  auto it = index_[r - 2].find(probe.encode(set));
  return it == index_[r - 2].end() ? int64_t(-1) : int64_t(it->second);
}

bool KPartition::operator==(const KPartition& o) const {
  if (!(p1_ == o.p1_) || upper_.size() != o.upper_.size()) return false;
  for (size_t l = 0; l < upper_.size(); ++l) {
    if (upper_[l].size() != o.upper_[l].size()) return false;
    for (size_t i = 0; i < upper_[l].size(); ++i)
      if (!(upper_[l][i].edges == o.upper_[l][i].edges) || upper_[l][i].under != o.upper_[l][i].under) return false;
  }
  return true;
}

void KPartition::validate_and_index() {
  uint32_t n = static_cast<uint32_t>(p1_.ground_size());
  index_.assign(upper_.size(), {});
  for (uint32_t r = 2; r <= arity(); ++r) {
    auto& cells = upper_[r - 2];
    auto& idx = index_[r - 2];
    BigInt total = 0;
    for (uint32_t ci = 0; ci < cells.size(); ++ci) {
      KCell& cell = cells[ci];
      require(cell.edges.arity() == r && cell.edges.ground() == n, "layer " + std::to_string(r) + " cell has wrong arity/ground");
      require(!cell.edges.empty(), "layer " + std::to_string(r) + " cell " + std::to_string(ci) + " is empty");
      require(cell.under.size() == r, "under-map of a layer-" + std::to_string(r) + " cell must have r entries");
      std::vector<uint32_t> clusters;
      for (uint64_t code : cell.edges.codes()) {
        auto e = cell.edges.decode(code);
        std::vector<uint32_t> cl;
        for (uint32_t v : e) cl.push_back(p1_.cell_of(v));
        auto sorted = cl;
        std::sort(sorted.begin(), sorted.end());
        require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                "layer " + std::to_string(r) + " edge is not in Cross_r");
        if (clusters.empty()) clusters = sorted;
        require(sorted == clusters, "layer " + std::to_string(r) + " cell spans inconsistent clusters");
        // faces must lie in the declared under cells
        for (uint32_t i = 0; i < r; ++i) {
          std::vector<uint32_t> face;
          for (uint32_t v : e)
            if (p1_.cell_of(v) != clusters[i]) face.push_back(v);
          int64_t host = cell_of(r - 1, face);
          require(host == static_cast<int64_t>(cell.under[i]),
                  "layer " + std::to_string(r) + " cell " + std::to_string(ci) + " is not inside the clique set of its under-polyad");
        }
        require(idx.emplace(code, ci).second, "layer " + std::to_string(r) + " cells overlap");
      }
      cell.clusters = clusters;
      total += cell.edges.size();
    }
    require(total == cross_count(p1_, r), "layer " + std::to_string(r) + " does not cover Cross_r(P1)");
  }
}

KPartition KPartition::complete(VertexPartition p1, uint32_t arity) {
  require(arity >= 1, "arity must be positive");
  uint32_t n = static_cast<uint32_t>(p1.ground_size());
  std::vector<std::vector<KCell>> upper;
  std::map<std::vector<uint32_t>, uint32_t> prev;  // cluster subset -> cell id of layer r-1
  for (uint32_t c = 0; c < p1.size(); ++c) prev[{c}] = c;
  for (uint32_t r = 2; r <= arity; ++r) {
    std::vector<KCell> cells;
    std::map<std::vector<uint32_t>, uint32_t> cur;
    for_each_combination(static_cast<uint32_t>(p1.size()), r, [&](const std::vector<uint32_t>& cs) {
      KCell cell;
      std::vector<std::vector<uint32_t>> members;
      std::vector<size_t> idx(r, 0);
      std::vector<uint32_t> s(r);
      while (true) {
        for (uint32_t j = 0; j < r; ++j) s[j] = p1.cell(cs[j])[idx[j]];
        members.push_back(s);
        uint32_t j = r;
        bool done = false;
        while (j > 0) {
          --j;
          if (++idx[j] < p1.cell(cs[j]).size()) break;
          idx[j] = 0;
          if (j == 0) done = true;
        }
        if (done) break;
      }
      cell.edges = UniformSet::from_sets(n, r, members);
      for (uint32_t i = 0; i < r; ++i) {
        std::vector<uint32_t> sub;
        for (uint32_t j = 0; j < r; ++j)
          if (j != i) sub.push_back(cs[j]);
        cell.under.push_back(prev.at(sub));
      }
      cur[cs] = static_cast<uint32_t>(cells.size());
      cells.push_back(std::move(cell));
      return true;
    });
    upper.push_back(std::move(cells));
    prev = std::move(cur);
  }
  return KPartition(std::move(p1), std::move(upper));
}

Polyad under_polyad(const KPartition& P, uint32_t r, size_t cell) {
  const KCell& F = P.layer(r).at(cell);
  Polyad out;
  uint32_t n = static_cast<uint32_t>(P.p1().ground_size());
  for (uint32_t c : F.clusters) out.clusters.push_back(P.p1().cell(c));
  for (uint32_t i = 0; i < r; ++i) {
    if (r == 2) {
      std::vector<std::vector<uint32_t>> singles;
      for (uint32_t v : P.p1().cell(F.under[i])) singles.push_back({v});
      out.parts.push_back(UniformSet::from_sets(n, 1, singles));
    } else {
      out.parts.push_back(P.layer(r - 1).at(F.under[i]).edges);
    }
  }
  return out;
}

std::vector<uint32_t> class_of_clusters(const KPartition& P, const VertexClassSet& classes) {
  require(classes.total() == P.p1().ground_size(), "partition ground set does not match the vertex classes");
  std::vector<uint32_t> out;
  for (const auto& c : P.p1().cells()) {
    auto cls = [&](uint32_t v) {
      uint64_t o = 0;
      for (uint32_t i = 0; i < classes.count(); ++i) {
        if (v < o + classes.sizes[i]) return i;
        o += classes.sizes[i];
      }
      return static_cast<uint32_t>(classes.count());
    };
    uint32_t k0 = cls(c.front());
    for (uint32_t v : c) require(cls(v) == k0, "P1 does not refine the class split");
    out.push_back(k0);
  }
  return out;
}

std::vector<size_t> V_i(const KPartition& P, const VertexClassSet& classes, size_t axis) {
  require(axis >= 1 && axis <= classes.count(), "axis out of range");
  auto cls = class_of_clusters(P, classes);
  std::vector<size_t> out;
  for (size_t c = 0; c < cls.size(); ++c)
    if (cls[c] == axis - 1) out.push_back(c);
  return out;
}

std::vector<size_t> E_i(const KPartition& P, const VertexClassSet& classes, size_t axis) {
  require(axis >= 1 && axis <= classes.count(), "axis out of range");
  require(P.arity() + 1 == classes.count(), "E_i needs a (k-1)-partition of a k-class ground set");
  auto cls = class_of_clusters(P, classes);
  std::vector<uint32_t> want;
  for (uint32_t i = 0; i < classes.count(); ++i)
    if (i != axis - 1) want.push_back(i);
  std::vector<size_t> out;
  if (P.arity() == 1) {
    for (size_t c = 0; c < cls.size(); ++c)
      if (cls[c] == want[0]) out.push_back(c);
    return out;
  }
  const auto& top = P.layer(P.arity());
  for (size_t ci = 0; ci < top.size(); ++ci) {
    std::vector<uint32_t> have;
    for (uint32_t c : top[ci].clusters) have.push_back(cls[c]);
    std::sort(have.begin(), have.end());
    if (have == want) out.push_back(ci);
  }
  return out;
}

std::vector<DecomposedPolyad> decompose_polyads(const KPartition& P, const VertexClassSet& classes, size_t F_cell,
                                                size_t V_cluster) {
  size_t kk = classes.count();
  uint32_t top = P.arity();
  require(top + 1 == kk, "decomposition needs a (k-1)-partition");
  auto E = E_i(P, classes, kk);
  auto V = V_i(P, classes, kk);
  require(std::find(E.begin(), E.end(), F_cell) != E.end(), "F is not a cell of E_k(P)");
  require(std::find(V.begin(), V.end(), V_cluster) != V.end(), "V is not a cluster of V_k(P)");
  uint32_t n = static_cast<uint32_t>(P.p1().ground_size());
  UniformSet F;
  if (top == 1) {
    std::vector<std::vector<uint32_t>> s;
    for (uint32_t v : P.p1().cell(F_cell)) s.push_back({v});
    F = UniformSet::from_sets(n, 1, s);
  } else {
    F = P.layer(top).at(F_cell).edges;
  }
  std::map<std::vector<uint32_t>, std::vector<uint64_t>> groups;
  UniformSet probe(n, static_cast<uint32_t>(kk));
  for (uint64_t c : F.codes()) {
    auto f = F.decode(c);
    for (uint32_t v : P.p1().cell(V_cluster)) {
      std::vector<uint32_t> key;
      for (size_t j = 0; j < f.size(); ++j) {
        std::vector<uint32_t> face;
        for (size_t x = 0; x < f.size(); ++x)
          if (x != j) face.push_back(f[x]);
        face.push_back(v);
        int64_t cell = P.cell_of(top, face);
        require(cell >= 0, "face outside the partition");
        key.push_back(static_cast<uint32_t>(cell));
      }
      key.push_back(static_cast<uint32_t>(F_cell));
      auto t = f;
      t.push_back(v);
      groups[key].push_back(probe.encode(t));
    }
  }
  std::vector<DecomposedPolyad> out;
  for (auto& [key, codes] : groups)
    out.push_back({key, UniformSet::from_codes(n, static_cast<uint32_t>(kk), std::move(codes))});
  return out;
}

RestrictedPartition restrict_kpartition(const KPartition& P, const std::vector<uint32_t>& keep_in) {
  auto keep = keep_in;
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  uint32_t n_old = static_cast<uint32_t>(P.p1().ground_size());
  std::vector<int64_t> newid(n_old, -1);
  for (uint32_t i = 0; i < keep.size(); ++i) {
    require(keep[i] < n_old, "kept vertex outside ground set");
    newid[keep[i]] = i;
  }
  std::vector<std::vector<uint32_t>> cells;
  std::vector<int64_t> cluster_map(P.p1().size(), -1);
  for (size_t c = 0; c < P.p1().size(); ++c) {
    const auto& cell = P.p1().cell(c);
    size_t kept = 0;
    for (uint32_t v : cell) kept += newid[v] >= 0 ? 1 : 0;
    require(kept == 0 || kept == cell.size(), "restriction cuts a cluster");
    if (kept) {
      std::vector<uint32_t> m;
      for (uint32_t v : cell) m.push_back(static_cast<uint32_t>(newid[v]));
      cells.push_back(m);
    }
  }
  require(!cells.empty(), "restriction keeps nothing");
  VertexPartition p1(keep.size(), cells);
  for (size_t c = 0; c < P.p1().size(); ++c)
    if (newid[P.p1().cell(c).front()] >= 0) cluster_map[c] = p1.cell_of(static_cast<uint32_t>(newid[P.p1().cell(c).front()]));
  uint32_t n = static_cast<uint32_t>(keep.size());
  std::vector<std::vector<KCell>> upper;
  std::vector<int64_t> prev_map = cluster_map;
  for (uint32_t r = 2; r <= P.arity(); ++r) {
    std::vector<KCell> layer;
    std::vector<int64_t> map(P.layer(r).size(), -1);
    for (size_t ci = 0; ci < P.layer(r).size(); ++ci) {
      const KCell& F = P.layer(r)[ci];
      bool ok = true;
      for (uint32_t c : F.clusters) ok = ok && cluster_map[c] >= 0;
      if (!ok) continue;
      KCell G;
      std::vector<std::vector<uint32_t>> sets;
      for (uint64_t code : F.edges.codes()) {
        auto e = F.edges.decode(code);
        for (auto& v : e) v = static_cast<uint32_t>(newid[v]);
        sets.push_back(e);
      }
      G.edges = UniformSet::from_sets(n, r, sets);
      for (uint32_t u : F.under) G.under.push_back(static_cast<uint32_t>(prev_map[u]));
      // under[i] omits the i-th cluster in sorted order; re-sort consistently with the new cluster ids
      std::vector<std::pair<uint32_t, uint32_t>> pairs;
      for (size_t i = 0; i < F.clusters.size(); ++i)
        pairs.push_back({static_cast<uint32_t>(cluster_map[F.clusters[i]]), G.under[i]});
      std::sort(pairs.begin(), pairs.end());
      for (size_t i = 0; i < pairs.size(); ++i) G.under[i] = pairs[i].second;
      map[ci] = static_cast<int64_t>(layer.size());
      layer.push_back(std::move(G));
    }
    if (layer.empty()) break;  // fewer than r kept clusters
    upper.push_back(std::move(layer));
    prev_map = map;
  }
  return {KPartition(std::move(p1), std::move(upper)), keep};
}

// ---- serialization ----
void write_partition(std::ostream& os, const VertexPartition& P) {
  os << "partition 1\nground " << P.ground_size() << "\ncells " << P.size() << '\n';
  for (const auto& c : P.cells()) os << format_ranges(c) << '\n';
}

VertexPartition read_partition(std::istream& is) {
  std::string line, w;
  int version = 0;
  uint64_t n = 0, m = 0;
  auto header = [&](const char* key, uint64_t& out) {
    if (!std::getline(is, line)) fail(ErrorCode::Usage, "truncated partition file");
    std::istringstream s(line);
    s >> w >> out;
    if (w != key) fail(ErrorCode::Usage, std::string("partition file: expected '") + key + "'");
  };
  {
    if (!std::getline(is, line)) fail(ErrorCode::Usage, "empty partition file");
    std::istringstream s(line);
    s >> w >> version;
    if (w != "partition" || version != 1) fail(ErrorCode::Usage, "not a partition v1 file");
  }
  header("ground", n);
  header("cells", m);
  std::vector<std::vector<uint32_t>> cells;
  for (uint64_t i = 0; i < m; ++i) {
    if (!std::getline(is, line)) fail(ErrorCode::Usage, "truncated partition file");
    cells.push_back(parse_ranges(line));
  }
  return VertexPartition(n, std::move(cells));
}

void write_kpartition(std::ostream& os, const KPartition& P) {
  os << "kpartition 1\narity " << P.arity() << '\n';
  write_partition(os, P.p1());
  for (uint32_t r = 2; r <= P.arity(); ++r) {
    os << "layer " << r << " cells " << P.layer(r).size() << '\n';
    for (size_t ci = 0; ci < P.layer(r).size(); ++ci) {
      const KCell& F = P.layer(r)[ci];
      os << "cell " << ci << " under";
      for (uint32_t i = 0; i < r; ++i) os << ' ' << i << ':' << F.under[i];
      os << " edges " << F.edges.size() << '\n';
      for (uint64_t c : F.edges.codes()) {
        auto e = F.edges.decode(c);
        for (size_t j = 0; j < e.size(); ++j) os << (j ? " " : "") << e[j];
        os << '\n';
      }
    }
  }
}

KPartition read_kpartition(std::istream& is) {
  std::string line, w;
  uint32_t arity = 0;
  int version = 0;
  if (!std::getline(is, line)) fail(ErrorCode::Usage, "empty kpartition file");
  {
    std::istringstream s(line);
    s >> w >> version;
    if (w != "kpartition" || version != 1) fail(ErrorCode::Usage, "not a kpartition v1 file");
  }
  if (!std::getline(is, line)) fail(ErrorCode::Usage, "truncated kpartition file");
  {
    std::istringstream s(line);
    s >> w >> arity;
    if (w != "arity" || arity < 1) fail(ErrorCode::Usage, "bad arity line");
  }
  VertexPartition p1 = read_partition(is);
  uint32_t n = static_cast<uint32_t>(p1.ground_size());
  std::vector<std::vector<KCell>> upper;
  for (uint32_t r = 2; r <= arity; ++r) {
    size_t count = 0;
    uint32_t rr = 0;
    if (!std::getline(is, line)) fail(ErrorCode::Usage, "truncated kpartition file");
    std::istringstream s(line);
    std::string w2;
    s >> w >> rr >> w2 >> count;
    if (w != "layer" || rr != r || w2 != "cells") fail(ErrorCode::Usage, "bad layer header");
    std::vector<KCell> cells;
    for (size_t ci = 0; ci < count; ++ci) {
      if (!std::getline(is, line)) fail(ErrorCode::Usage, "truncated kpartition file");
      std::istringstream cs(line);
      size_t idx = 0, m = 0;
      cs >> w >> idx >> w2;
      if (w != "cell" || idx != ci || w2 != "under") fail(ErrorCode::Usage, "bad cell header");
      KCell F;
      for (uint32_t i = 0; i < r; ++i) {
        std::string pair;
        cs >> pair;
        auto colon = pair.find(':');
        if (colon == std::string::npos || std::stoul(pair.substr(0, colon)) != i) fail(ErrorCode::Usage, "bad under pair");
        F.under.push_back(static_cast<uint32_t>(std::stoul(pair.substr(colon + 1))));
      }
      cs >> w >> m;
      if (w != "edges") fail(ErrorCode::Usage, "bad cell header");
      std::vector<std::vector<uint32_t>> sets;
      for (size_t e = 0; e < m; ++e) {
        if (!std::getline(is, line)) fail(ErrorCode::Usage, "truncated kpartition file");
        std::istringstream es(line);
        std::vector<uint32_t> t(r);
        for (auto& x : t)
          if (!(es >> x)) fail(ErrorCode::Usage, "short edge line");
        sets.push_back(t);
      }
      F.edges = UniformSet::from_sets(n, r, sets);
      cells.push_back(std::move(F));
    }
    upper.push_back(std::move(cells));
  }
  return KPartition(std::move(p1), std::move(upper));
}

}  // namespace regbound
