#include "regbound/regularity.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace regbound {

uint64_t default_cap() {
  if (const char* env = std::getenv("REGBOUND_CAP")) {
    try {
      uint64_t v = std::stoull(env);
      if (v > 0) return v;
    } catch (...) {
    }
  }
  return uint64_t(1) << 24;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Regular: return "regular";
    case Verdict::NotRegular: return "not-regular";
    default: return "undecided";
  }
}

BipartiteGraph induced(const BipartiteGraph& g, const std::vector<uint32_t>& S, const std::vector<uint32_t>& T) {
  BipartiteGraph out(static_cast<uint32_t>(S.size()), static_cast<uint32_t>(T.size()));
  for (uint32_t i = 0; i < S.size(); ++i) {
    const uint64_t* row = g.row(S[i]);
    for (uint32_t j = 0; j < T.size(); ++j)
      if (bits::test(row, T[j])) bits::set(out.row_mut(i), j);
  }
  return out;
}

SubsetSearchSpace subset_space(const BipartiteGraph& g, uint32_t a, uint32_t b) {
  SubsetSearchSpace s;
  s.a = a;
  s.b = b;
  s.left_combos = binomial(g.left_size(), a);
  s.right_combos = binomial(g.right_size(), b);
  s.enumerate = s.left_combos < s.right_combos ? Side::Left : Side::Right;
  return s;
}

namespace {
// Subsets must be non-empty; a zero threshold would otherwise admit the empty set.
uint32_t threshold_size(const Rational& delta, uint32_t side) {
  int64_t v = ceil_to_i64(delta * Rational(side));
  return static_cast<uint32_t>(std::clamp<int64_t>(v, std::min<int64_t>(1, side), side));
}

// Choose `a` left vertices with smallest (or largest) degree value; ties by index.
std::vector<uint32_t> pick_extreme(const std::vector<uint32_t>& deg, uint32_t a, bool smallest) {
  std::vector<uint32_t> idx(deg.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](uint32_t x, uint32_t y) {
    return smallest ? deg[x] < deg[y] : deg[x] > deg[y];
  });
  idx.resize(a);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct ExtremeSearch {
  uint64_t min_edges = UINT64_MAX, max_edges = 0;
  std::vector<uint32_t> min_B, max_B;  // enumerated-side subsets
  BigInt enumerated = 0;
};

// Enumerate right subsets of size b of G; for each compute the a smallest/largest left degree sums.
// stop_below: stop once a min sum strictly below this value is found (UINT64_MAX disables).
ExtremeSearch enumerate_right(const BipartiteGraph& G, uint32_t a, uint32_t b, bool want_max, uint64_t stop_below) {
  ExtremeSearch out;
  uint32_t nA = G.left_size();
  std::vector<uint64_t> mask(G.words());
  std::vector<uint32_t> cnt(b + 1);
  for_each_combination(G.right_size(), b, [&](const std::vector<uint32_t>& T) {
    std::fill(mask.begin(), mask.end(), 0);
    for (uint32_t v : T) bits::set(mask.data(), v);
    std::fill(cnt.begin(), cnt.end(), 0);
    for (uint32_t u = 0; u < nA; ++u) ++cnt[bits::and_count(G.row(u), mask.data(), G.words())];
    uint64_t lo = 0, hi = 0;
    uint32_t need = a;
    for (uint32_t d = 0; d <= b && need; ++d) {
      uint32_t take = std::min(need, cnt[d]);
      lo += uint64_t(take) * d;
      need -= take;
    }
    if (want_max) {
      need = a;
      for (uint32_t d = b + 1; d-- > 0 && need;) {
        uint32_t take = std::min(need, cnt[d]);
        hi += uint64_t(take) * d;
        need -= take;
      }
    }
    ++out.enumerated;
    if (lo < out.min_edges) {
      out.min_edges = lo;
      out.min_B = T;
    }
    if (want_max && (out.max_B.empty() || hi > out.max_edges)) {
      out.max_edges = hi;
      out.max_B = T;
    }
    return stop_below == UINT64_MAX || lo >= stop_below;
  });
  return out;
}

std::vector<uint32_t> degrees_into(const BipartiteGraph& G, const std::vector<uint32_t>& T) {
  Bits m = Bits::from_indices(G.right_size(), T);
  std::vector<uint32_t> deg(G.left_size());
  for (uint32_t u = 0; u < G.left_size(); ++u) deg[u] = static_cast<uint32_t>(bits::and_count(G.row(u), m.data(), G.words()));
  return deg;
}

// Alternating exact minimization (or maximization) from random starts.
void local_descent(const BipartiteGraph& G, const BipartiteGraph& Gt, uint32_t a, uint32_t b, bool maximize,
                   Rng& rng, uint32_t restarts, uint64_t& best, std::vector<uint32_t>& bestA, std::vector<uint32_t>& bestB) {
  for (uint32_t r = 0; r < restarts; ++r) {
    std::vector<uint32_t> B = rng.sample_subset(G.right_size(), b), A;
    uint64_t cur = maximize ? 0 : UINT64_MAX;
    for (int it = 0; it < 64; ++it) {
      A = pick_extreme(degrees_into(G, B), a, !maximize);
      B = pick_extreme(degrees_into(Gt, A), b, !maximize);
      uint64_t e = edges_between(G, A, B);
      bool improved = maximize ? e > cur : e < cur;
      if (!improved) break;
      cur = e;
    }
    bool better = bestA.empty() || (maximize ? cur > best : cur < best);
    if (better) {
      best = cur;
      bestA = A;
      bestB = B;
    }
  }
}
}  // namespace

SubsetSearchSpace minimal_subset_reduction(const BipartiteGraph& g, const Rational& delta) {
  return subset_space(g, threshold_size(delta, g.left_size()), threshold_size(delta, g.right_size()));
}

static DensityExtremes extremes_impl(const BipartiteGraph& g, uint32_t a, uint32_t b, const CheckOptions& opt,
                                     bool want_max, uint64_t stop_below) {
  DensityExtremes out;
  require(a <= g.left_size() && b <= g.right_size(), "subset size exceeds side");
  if (g.left_size() == 0 || g.right_size() == 0) return out;
  auto space = subset_space(g, a, b);
  if (opt.mode == Mode::Exact) {
    if (space.cost() > BigInt(opt.cap))
      fail(ErrorCode::Resource, "exact enumeration needs " + space.cost().str() + " subsets, cap is " + std::to_string(opt.cap));
    if (space.enumerate == Side::Right) {
      auto r = enumerate_right(g, a, b, want_max, stop_below);
      out.enumerated = r.enumerated;
      out.min_edges = r.min_edges;
      out.min_B = r.min_B;
      out.min_A = pick_extreme(degrees_into(g, r.min_B), a, true);
      if (want_max) {
        out.max_edges = r.max_edges;
        out.max_B = r.max_B;
        out.max_A = pick_extreme(degrees_into(g, r.max_B), a, false);
      }
    } else {
      BipartiteGraph t = g.transposed();
      auto r = enumerate_right(t, b, a, want_max, stop_below);
      out.enumerated = r.enumerated;
      out.min_edges = r.min_edges;
      out.min_A = r.min_B;
      out.min_B = pick_extreme(degrees_into(t, r.min_B), b, true);
      if (want_max) {
        out.max_edges = r.max_edges;
        out.max_A = r.max_B;
        out.max_B = pick_extreme(degrees_into(t, r.max_B), b, false);
      }
    }
    return out;
  }
  out.exact = false;
  Rng rng(opt.seed);
  BipartiteGraph t = g.transposed();
  uint64_t best = 0;
  local_descent(g, t, a, b, false, rng, opt.restarts, best, out.min_A, out.min_B);
  out.min_edges = best;
  if (want_max) {
    local_descent(g, t, a, b, true, rng, opt.restarts, best, out.max_A, out.max_B);
    out.max_edges = best;
  }
  out.enumerated = opt.restarts;
  return out;
}

DensityExtremes density_extremes(const BipartiteGraph& g, uint32_t a, uint32_t b, const CheckOptions& opt) {
  return extremes_impl(g, a, b, opt, true, UINT64_MAX);
}

PairVerdict is_delta_regular_pair_sizes(const BipartiteGraph& g, uint32_t a, uint32_t b, const CheckOptions& opt) {
  PairVerdict v;
  uint64_t e = g.edge_count();
  if (e == 0 || g.left_size() == 0 || g.right_size() == 0) {
    v.vacuous = true;
    return v;
  }
  uint64_t nA = g.left_size(), nB = g.right_size();
  // violation iff 2·x·|A||B| < e·a·b
  unsigned __int128 target_num = (unsigned __int128)e * a * b;
  unsigned __int128 denom = (unsigned __int128)2 * nA * nB;
  uint64_t stop_below = UINT64_MAX;
  if (opt.stop_at_first) stop_below = static_cast<uint64_t>((target_num + denom - 1) / denom);
  auto ex = extremes_impl(g, a, b, opt, false, stop_below);
  v.enumerated = ex.enumerated;
  bool violates = (unsigned __int128)ex.min_edges * denom < target_num;
  if (violates) {
    v.regular = false;
    DeltaWitness w;
    w.A = ex.min_A;
    w.B = ex.min_B;
    w.edges = ex.min_edges;
    w.ratio = (Rational(w.edges) / Rational(uint64_t(a) * b)) / (Rational(e) / Rational(nA * nB));
    v.witness = w;
  } else if (opt.mode == Mode::Sampled) {
    v.decided = false;
  }
  return v;
}

PairVerdict is_delta_regular_pair(const BipartiteGraph& g, const Rational& delta, const CheckOptions& opt) {
  require(delta >= 0 && delta <= 1, "delta must lie in [0,1]");
  auto s = minimal_subset_reduction(g, delta);
  return is_delta_regular_pair_sizes(g, s.a, s.b, opt);
}

EpsVerdict is_eps_regular_graph(const BipartiteGraph& g, const Radical& eps, const CheckOptions& opt) {
  EpsVerdict v;
  if (g.left_size() == 0 || g.right_size() == 0) return v;
  auto clampsz = [](int64_t x, uint32_t side) {
    return static_cast<uint32_t>(std::clamp<int64_t>(x, std::min<int64_t>(1, side), side));
  };
  v.a = clampsz(eps.ceil_mul(Rational(g.left_size())), g.left_size());
  v.b = clampsz(eps.ceil_mul(Rational(g.right_size())), g.right_size());
  Rational p = g.density();
  v.worst_density = p;
  if (p == 0) return v;
  auto ex = density_extremes(g, v.a, v.b, opt);
  Rational ab = Rational(uint64_t(v.a) * v.b);
  Rational dmin = Rational(ex.min_edges) / ab, dmax = Rational(ex.max_edges) / ab;
  Rational dev_min = (p - dmin) / p, dev_max = (dmax - p) / p;
  Rational worst = std::max(dev_min, dev_max);
  v.worst_density = dev_min >= dev_max ? dmin : dmax;
  v.regular = eps.compare(worst) >= 0;
  v.decided = ex.exact || !v.regular;
  return v;
}

// ---- partition edit interval ----
namespace {
BigInt witness_lower_bound(const DeltaWitness& w, uint64_t e_pair, uint64_t sp, uint64_t sq) {
  Rational rho = Rational(uint64_t(w.A.size()) * w.B.size()) / Rational(sp * sq);
  Rational e1 = w.edges, rest = Rational(e_pair - w.edges);
  Rational D = rho / 2 * rest - (1 - rho / 2) * e1;
  if (D <= 0) return 0;
  return ceil_big(D / (1 - rho / 2));
}

BipartiteGraph shuffled_block(uint32_t l, uint32_t r, uint64_t edges, uint64_t seed) {
  BipartiteGraph b(l, r);
  Rng rng(seed);
  std::vector<uint64_t> cells(uint64_t(l) * r);
  std::iota(cells.begin(), cells.end(), 0);
  for (uint64_t i = 0; i < edges; ++i) {
    std::swap(cells[i], cells[i + rng.below(cells.size() - i)]);
    b.set_edge(static_cast<uint32_t>(cells[i] / r), static_cast<uint32_t>(cells[i] % r));
  }
  return b;
}

uint64_t sym_diff(const BipartiteGraph& a, const BipartiteGraph& b) {
  uint64_t d = 0;
  for (uint32_t u = 0; u < a.left_size(); ++u)
    for (size_t w = 0; w < a.words(); ++w) d += static_cast<uint64_t>(__builtin_popcountll(a.row(u)[w] ^ b.row(u)[w]));
  return d;
}
}  // namespace

EditInterval partition_edit_interval_cells(const BipartiteGraph& g, const std::vector<std::vector<uint32_t>>& P,
                                           const std::vector<std::vector<uint32_t>>& Q, const Rational& delta,
                                           const CheckOptions& opt) {
  EditInterval out;
  out.budget = delta * Rational(g.edge_count());
  CheckOptions popt = opt;
  popt.stop_at_first = false;
  for (size_t i = 0; i < P.size(); ++i)
    for (size_t j = 0; j < Q.size(); ++j) {
      BipartiteGraph sub = induced(g, P[i], Q[j]);
      popt.seed = seed_for(opt.seed, "pair/" + std::to_string(i) + "/" + std::to_string(j));
      PairVerdict v = is_delta_regular_pair(sub, delta, popt);
      PairRecord rec;
      rec.p = i;
      rec.q = j;
      rec.edges = sub.edge_count();
      rec.regular = v.regular;
      rec.decided = v.decided;
      rec.vacuous = v.vacuous;
      if (v.vacuous) ++out.vacuous_pairs;
      if (v.regular && v.decided) {
        if (v.vacuous) out.pairs.push_back(rec);
        continue;
      }
      if (v.witness) rec.witness = v.witness;
      rec.lower = v.witness ? witness_lower_bound(*v.witness, rec.edges, P[i].size(), Q[j].size()) : BigInt(0);
      uint64_t full = uint64_t(P[i].size()) * Q[j].size();
      rec.upper = rec.edges;
      rec.repair = "empty";
      if (full - rec.edges < rec.upper) {
        rec.upper = full - rec.edges;
        rec.repair = "complete";
      }
      // density-matching block, used only when its regularity is proven exactly
      BipartiteGraph blk = shuffled_block(sub.left_size(), sub.right_size(), rec.edges, seed_for(popt.seed, "repair"));
      uint64_t cost = sym_diff(sub, blk);
      if (BigInt(cost) < rec.upper) {
        CheckOptions eo = opt;
        eo.mode = Mode::Exact;
        try {
          if (is_delta_regular_pair(blk, delta, eo).regular) {
            rec.upper = cost;
            rec.repair = "shuffle";
          }
        } catch (const Error&) {
        }
      }
      out.lower += rec.lower;
      out.upper += rec.upper;
      out.pairs.push_back(std::move(rec));
    }
  if (Rational(out.lower) > out.budget) out.verdict = Verdict::NotRegular;
  else if (Rational(out.upper) <= out.budget) out.verdict = Verdict::Regular;
  else out.verdict = Verdict::Undecided;
  return out;
}

EditInterval partition_edit_interval(const BipartiteGraph& g, const VertexPartition& P, const VertexPartition& Q,
                                     const Rational& delta, const CheckOptions& opt) {
  require(P.ground_size() == g.left_size() && Q.ground_size() == g.right_size(), "partitions do not match the graph sides");
  return partition_edit_interval_cells(g, P.cells(), Q.cells(), delta, opt);
}

// ---- k-partitions ----
BipartiteGraph cell_axis_graph(const KPartition& P, uint32_t r, size_t cell, uint32_t axis) {
  const KCell& F = P.layer(r).at(cell);
  require(axis >= 1 && axis <= r, "axis out of range");
  uint32_t cl = F.clusters[axis - 1];
  const auto& right = P.p1().cell(cl);
  std::vector<std::vector<uint32_t>> left;
  if (r == 2) {
    for (uint32_t v : P.p1().cell(F.under[axis - 1])) left.push_back({v});
  } else {
    const UniformSet& part = P.layer(r - 1).at(F.under[axis - 1]).edges;
    for (uint64_t c : part.codes()) left.push_back(part.decode(c));
  }
  BipartiteGraph g(static_cast<uint32_t>(left.size()), static_cast<uint32_t>(right.size()));
  for (uint32_t i = 0; i < left.size(); ++i)
    for (uint32_t j = 0; j < right.size(); ++j) {
      auto t = left[i];
      t.push_back(right[j]);
      if (F.edges.contains(t)) g.set_edge(i, j);
    }
  return g;
}

GoodReport is_delta_good(const KPartition& P, const Rational& delta, const CheckOptions& opt) {
  GoodReport rep;
  for (uint32_t r = 2; r <= P.arity(); ++r)
    for (size_t ci = 0; ci < P.layer(r).size(); ++ci)
      for (uint32_t axis = 1; axis <= r; ++axis) {
        CheckOptions o = opt;
        o.stop_at_first = true;
        o.seed = seed_for(opt.seed, "good/" + std::to_string(r) + "/" + std::to_string(ci) + "/" + std::to_string(axis));
        auto v = is_delta_regular_pair(cell_axis_graph(P, r, ci, axis), delta, o);
        ++rep.checked;
        if (!v.regular) {
          rep.good = false;
          rep.failures.push_back({r, ci, axis, v.witness});
        } else if (!v.decided) {
          rep.decided = false;
        }
      }
  if (rep.good && !rep.decided) rep.good = false;
  return rep;
}

KPartitionReport is_delta_regular_kpartition(const KPartiteKGraph& H, const KPartition& P, const Rational& delta,
                                             const CheckOptions& opt, bool require_good) {
  const auto& classes = H.classes();
  require(P.arity() + 1 == H.k(), "need an arity-(k-1) partition");
  require(P.p1().ground_size() == classes.total(), "partition ground set does not match H's classes");
  KPartitionReport rep;
  if (require_good) {
    rep.good = is_delta_good(P, delta, opt);
    if (!rep.good.good) fail(ErrorCode::Usage, "partition is not ⟨δ⟩-good");
  }
  std::vector<uint64_t> offs;
  for (size_t c = 0; c < H.k(); ++c) offs.push_back(classes.offset(c));
  auto class_of = [&](uint32_t v) {
    size_t c = 0;
    while (c + 1 < offs.size() && v >= offs[c + 1]) ++c;
    return c;
  };
  bool any_undecided = false, any_bad = false;
  for (size_t axis = 1; axis <= H.k(); ++axis) {
    AuxGraphView aux = aux_graph(H, axis);
    std::vector<std::vector<uint32_t>> left_cells, right_cells;
    auto to_aux = [&](const std::vector<uint32_t>& set) {
      std::vector<uint32_t> local;
      for (uint32_t v : set) local.push_back(static_cast<uint32_t>(v - offs[class_of(v)]));
      return static_cast<uint32_t>(aux.encode_left(local));
    };
    for (size_t ci : E_i(P, classes, axis)) {
      std::vector<uint32_t> cell;
      if (P.arity() == 1) {
        for (uint32_t v : P.p1().cell(ci)) cell.push_back(to_aux({v}));
      } else {
        const UniformSet& e = P.layer(P.arity()).at(ci).edges;
        for (uint64_t c : e.codes()) cell.push_back(to_aux(e.decode(c)));
      }
      std::sort(cell.begin(), cell.end());
      left_cells.push_back(cell);
    }
    for (size_t ci : V_i(P, classes, axis)) {
      std::vector<uint32_t> cell;
      for (uint32_t v : P.p1().cell(ci)) cell.push_back(static_cast<uint32_t>(v - offs[axis - 1]));
      right_cells.push_back(cell);
    }
    CheckOptions o = opt;
    o.seed = seed_for(opt.seed, "axis/" + std::to_string(axis));
    auto iv = partition_edit_interval_cells(aux.graph, left_cells, right_cells, delta, o);
    any_bad = any_bad || iv.verdict == Verdict::NotRegular;
    any_undecided = any_undecided || iv.verdict == Verdict::Undecided;
    rep.axes.push_back(std::move(iv));
  }
  rep.verdict = any_bad ? Verdict::NotRegular : (any_undecided ? Verdict::Undecided : Verdict::Regular);
  return rep;
}

StarUnionReport check_star_union(const std::vector<BipartiteGraph>& gs, const Rational& delta, const CheckOptions& opt) {
  require(!gs.empty(), "star union of nothing");
  StarUnionReport rep;
  BipartiteGraph u(gs[0].left_size(), gs[0].right_size());
  for (const auto& g : gs) {
    require(g.left_size() == u.left_size() && g.right_size() == u.right_size(), "star union graphs must share sides");
    for (uint32_t x = 0; x < u.left_size(); ++x)
      for (size_t w = 0; w < u.words(); ++w) {
        if (u.row(x)[w] & g.row(x)[w]) fail(ErrorCode::Usage, "star union graphs are not edge-disjoint");
        u.row_mut(x)[w] |= g.row(x)[w];
      }
    rep.parts_regular.push_back(is_delta_regular_pair(g, delta, opt).regular);
  }
  rep.union_regular = is_delta_regular_pair(u, delta, opt).regular;
  bool all = std::all_of(rep.parts_regular.begin(), rep.parts_regular.end(), [](bool b) { return b; });
  rep.property_holds = !all || rep.union_regular;
  return rep;
}

KPartition truncate_arity(const KPartition& P, uint32_t arity) {
  require(arity >= 1 && arity <= P.arity(), "bad truncation arity");
  std::vector<std::vector<KCell>> upper;
  for (uint32_t r = 2; r <= arity; ++r) upper.push_back(P.layer(r));
  return KPartition(P.p1(), std::move(upper));
}

UniformRefinementReport check_uniform_refinement(const KPartiteKGraph& H, const KPartition& P,
                                                 const std::vector<KPartiteKGraph>& family, const Rational& delta,
                                                 const CheckOptions& opt) {
  size_t k = H.k();
  require(P.arity() + 1 == k, "need an arity-(k-1) partition");
  require(!family.empty(), "empty family");
  std::vector<uint64_t> prefix(H.classes().sizes.begin(), H.classes().sizes.end() - 1);
  uint64_t N = 1;
  for (uint64_t s : prefix) N *= s;
  std::vector<uint32_t> label(N, UINT32_MAX);
  for (uint32_t f = 0; f < family.size(); ++f) {
    require(family[f].classes().sizes == prefix, "family member lives on the wrong classes");
    for (uint64_t c : family[f].codes()) {
      require(label[c] == UINT32_MAX, "family members overlap");
      label[c] = f;
    }
  }
  for (uint32_t l : label) require(l != UINT32_MAX, "family does not cover the product set");
  VertexPartition fam = VertexPartition::from_labels(label);
  // E_k(P) as a partition of the product set
  AuxGraphView probe;
  probe.left_sizes = prefix;
  std::vector<uint64_t> offs;
  for (size_t c = 0; c < k; ++c) offs.push_back(H.classes().offset(c));
  std::vector<std::vector<uint32_t>> ecells;
  for (size_t ci : E_i(P, H.classes(), k)) {
    std::vector<uint32_t> cell;
    auto add = [&](const std::vector<uint32_t>& set) {
      std::vector<uint32_t> local;
      for (size_t j = 0; j < set.size(); ++j) local.push_back(static_cast<uint32_t>(set[j] - offs[j]));
      cell.push_back(static_cast<uint32_t>(probe.encode_left(local)));
    };
    if (P.arity() == 1) {
      for (uint32_t v : P.p1().cell(ci)) add({v});
    } else {
      const UniformSet& e = P.layer(P.arity()).at(ci).edges;
      for (uint64_t c : e.codes()) add(e.decode(c));
    }
    ecells.push_back(cell);
  }
  VertexPartition E(N, ecells);
  auto ru = refinement_union(E, fam, delta);  // throws unless E ≺_δ 𝓕
  auto good = is_delta_good(P, delta, opt);
  if (!good.good) fail(ErrorCode::Usage, "uniform refinement check requires a ⟨δ⟩-good partition");
  UniformRefinementReport rep;
  // family labels were renumbered canonically; map back to the member index
  rep.family_member = label[fam.cell(ru.p_cell).front()];
  rep.symmetric_difference = ru.symmetric_difference;
  rep.union_bound = ru.within_bound;
  if (k == 2) {
    rep.passes = rep.union_bound;
    return rep;
  }
  std::vector<uint32_t> keep;
  for (uint64_t v = 0; v < offs[k - 1]; ++v) keep.push_back(static_cast<uint32_t>(v));
  auto restricted = restrict_kpartition(P, keep);
  KPartition Pp = truncate_arity(restricted.partition, static_cast<uint32_t>(k - 2));
  rep.restricted = is_delta_regular_kpartition(family[rep.family_member], Pp, 3 * delta, opt, true);
  rep.passes = rep.union_bound && rep.restricted.verdict == Verdict::Regular;
  return rep;
}

// ---- certificates ----
Rational gamma_prime(const Rational& gamma) { return gamma / 32; }

Rational ledger_value(const Rational& gamma, const Rational& p, uint32_t level, uint64_t P_size, uint64_t R_size,
                      uint64_t e_outside) {
  Rational main = Rational(BigInt(1) << level) * p * Rational(P_size) * Rational(R_size) / 4;
  Rational v = gamma_prime(gamma) * (main - Rational(e_outside));
  return v > 0 ? v : Rational(0);
}

std::vector<uint32_t> r_star(const VertexPartition& Q, const VertexPartition& R_i) {
  require(Q.ground_size() == R_i.ground_size(), "Q and R_i live on different ground sets");
  const Rational c = Rational(1) / 512;
  std::vector<uint32_t> out;
  for (const auto& q : Q.cells()) {
    int64_t h = beta_host(q, R_i, c);
    if (h < 0) continue;
    for (uint32_t v : q)
      if (R_i.cell_of(v) == static_cast<uint32_t>(h)) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CertificateCheck verify_certificate(const IrregularityCertificate& cert, const BipartiteGraph& g) {
  CertificateCheck chk;
  auto bad = [&](const std::string& m) {
    chk.ok = false;
    chk.failures.push_back(m);
  };
  if (hex64(content_hash(g)) != cert.graph_hash) bad("graph hash mismatch");
  if (g.left_size() != cert.left_size || g.right_size() != cert.right_size) bad("graph sides mismatch");
  if (g.edge_count() != cert.edges) bad("edge count mismatch");
  if (!chk.ok) return chk;
  if (cert.delta < 0 || cert.delta > rat(1, 2)) bad("delta outside [0,1/2]");
  if (cert.gamma <= 0 || cert.gamma > 32) bad("gamma outside (0,32]");
  if (cert.p != g.density()) bad("p differs from d(G)");
  if (cert.P.ground_size() != g.left_size()) bad("left partition does not cover the left side");
  if (cert.Q.ground_size() != g.right_size()) bad("right partition does not cover the right side");
  for (const auto& [lvl, R] : cert.R_levels)
    if (R.ground_size() != g.right_size()) bad("R_" + std::to_string(lvl) + " does not cover the right side");
  if (!chk.ok) return chk;
  std::map<uint32_t, std::vector<uint32_t>> rstar;
  for (const auto& [lvl, R] : cert.R_levels) rstar[lvl] = r_star(cert.Q, R);
  std::map<uint32_t, uint32_t> level_of_p;
  std::set<std::pair<uint32_t, uint32_t>> seen;
  Rational total = 0;
  for (size_t li = 0; li < cert.lines.size(); ++li) {
    const LedgerLine& L = cert.lines[li];
    std::string where = "line " + std::to_string(li) + ": ";
    if (L.p_cell >= cert.P.size()) { bad(where + "P index out of range"); continue; }
    auto rl = cert.R_levels.find(L.level);
    if (rl == cert.R_levels.end()) { bad(where + "unknown level"); continue; }
    const VertexPartition& Ri = rl->second;
    if (L.r_cell >= Ri.size()) { bad(where + "R index out of range"); continue; }
    auto [it, fresh] = level_of_p.emplace(L.p_cell, L.level);
    if (!fresh && it->second != L.level) bad(where + "P used with two levels");
    if (!seen.insert({L.p_cell, L.r_cell}).second) bad(where + "duplicate (P,R) pair");
    const auto& Pc = cert.P.cell(L.p_cell);
    const auto& Rc = Ri.cell(L.r_cell);
    for (uint32_t v : L.P1)
      if (!std::binary_search(Pc.begin(), Pc.end(), v)) { bad(where + "P1 not inside P"); break; }
    if (!std::is_sorted(L.P1.begin(), L.P1.end()) || std::adjacent_find(L.P1.begin(), L.P1.end()) != L.P1.end())
      bad(where + "P1 not a strictly increasing list");
    if (Rational(8 * L.P1.size()) < cert.gamma * Rational(Pc.size())) bad(where + "|P1| < (γ/8)|P|");
    if (Rational(L.P1.size()) < cert.delta * Rational(Pc.size())) bad(where + "|P1| < δ|P|");
    Bits Rm = Bits::from_indices(g.right_size(), Rc);
    if (edges_between(g, L.P1, Rm) != 0) bad(where + "e(P1,R) != 0");
    uint64_t ePR = edges_between(g, Pc, Rm);
    if (ePR != L.e_P_R) bad(where + "e(P,R) mismatch");
    Rational need = Rational(BigInt(1) << L.level) * cert.p * Rational(uint64_t(Pc.size()) * Rc.size()) / 4;
    if (Rational(ePR) < need) bad(where + "d(P,R) below (1/4)2^i p");
    std::vector<uint32_t> outside;
    const auto& rs = rstar[L.level];
    for (uint32_t v : Rc)
      if (!std::binary_search(rs.begin(), rs.end(), v)) outside.push_back(v);
    uint64_t eout = edges_between(g, Pc, outside);
    if (eout != L.e_P_R_outside) bad(where + "e(P, R \\ R*) mismatch");
    Rational val = ledger_value(cert.gamma, cert.p, L.level, Pc.size(), Rc.size(), eout);
    if (val != L.value) bad(where + "value mismatch");
    total += val;
  }
  chk.recomputed_total = total;
  if (total != cert.total) bad("total mismatch");
  if (cert.budget != cert.delta * Rational(cert.edges)) bad("budget mismatch");
  if (cert.refutes != (total > cert.budget)) bad("refutation flag inconsistent with total");
  return chk;
}

void write_certificate(std::ostream& os, const IrregularityCertificate& c) {
  os << "regbound-certificate 1\n";
  os << "graph " << c.graph_hash << ' ' << (c.graph_label.empty() ? "-" : c.graph_label) << '\n';
  os << "sides " << c.left_size << ' ' << c.right_size << " edges " << c.edges << '\n';
  os << "delta " << to_string(c.delta) << "\ngamma " << to_string(c.gamma) << "\np " << to_string(c.p) << '\n';
  os << "left-partition\n";
  write_partition(os, c.P);
  os << "right-partition\n";
  write_partition(os, c.Q);
  for (const auto& [lvl, R] : c.R_levels) {
    os << "level " << lvl << '\n';
    write_partition(os, R);
  }
  os << "lines " << c.lines.size() << '\n';
  for (const auto& L : c.lines)
    os << "line " << L.p_cell << ' ' << L.level << ' ' << L.r_cell << ' ' << L.e_P_R << ' ' << L.e_P_R_outside << ' '
       << to_string(L.value) << " | " << format_ranges(L.P1) << '\n';
  os << "total " << to_string(c.total) << "\nbudget " << to_string(c.budget) << "\nrefutes " << (c.refutes ? 1 : 0) << '\n';
  for (const auto& n : c.notes) os << "note " << n << '\n';
  os << "end\n";
}

IrregularityCertificate read_certificate(std::istream& is) {
  IrregularityCertificate c;
  std::string line, w;
  auto next = [&]() -> std::istringstream {
    if (!std::getline(is, line)) fail(ErrorCode::Usage, "truncated certificate");
    return std::istringstream(line);
  };
  auto expect = [&](std::istringstream& s, const char* key) {
    s >> w;
    if (w != key) fail(ErrorCode::Usage, std::string("certificate: expected '") + key + "', got '" + w + "'");
  };
  {
    auto s = next();
    int v = 0;
    expect(s, "regbound-certificate");
    s >> v;
    if (v != 1) fail(ErrorCode::Usage, "unsupported certificate version");
  }
  {
    auto s = next();
    expect(s, "graph");
    s >> c.graph_hash >> c.graph_label;
  }
  {
    auto s = next();
    expect(s, "sides");
    s >> c.left_size >> c.right_size;
    expect(s, "edges");
    s >> c.edges;
  }
  auto rational_line = [&](const char* key) {
    auto s = next();
    expect(s, key);
    s >> w;
    return parse_rational(w);
  };
  c.delta = rational_line("delta");
  c.gamma = rational_line("gamma");
  c.p = rational_line("p");
  {
    auto s = next();
    expect(s, "left-partition");
  }
  c.P = read_partition(is);
  {
    auto s = next();
    expect(s, "right-partition");
  }
  c.Q = read_partition(is);
  size_t nlines = 0;
  while (true) {
    auto s = next();
    s >> w;
    if (w == "level") {
      uint32_t lvl = 0;
      s >> lvl;
      c.R_levels[lvl] = read_partition(is);
    } else if (w == "lines") {
      s >> nlines;
      break;
    } else {
      fail(ErrorCode::Usage, "certificate: unexpected '" + w + "'");
    }
  }
  for (size_t i = 0; i < nlines; ++i) {
    auto s = next();
    expect(s, "line");
    LedgerLine L;
    std::string val, bar;
    if (!(s >> L.p_cell >> L.level >> L.r_cell >> L.e_P_R >> L.e_P_R_outside >> val >> bar) || bar != "|")
      fail(ErrorCode::Usage, "malformed ledger line");
    L.value = parse_rational(val);
    std::string rest;
    std::getline(s, rest);
    L.P1 = parse_ranges(rest);
    c.lines.push_back(std::move(L));
  }
  c.total = rational_line("total");
  c.budget = rational_line("budget");
  {
    auto s = next();
    expect(s, "refutes");
    int r = 0;
    s >> r;
    c.refutes = r != 0;
  }
  while (true) {
    auto s = next();
    s >> w;
    if (w == "end") break;
    if (w != "note") fail(ErrorCode::Usage, "certificate: unexpected '" + w + "'");
    std::string rest;
    std::getline(s, rest);
    if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
    c.notes.push_back(rest);
  }
  return c;
}

}  // namespace regbound
