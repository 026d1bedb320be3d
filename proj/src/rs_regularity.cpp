#include "regbound/rs_regularity.hpp"

#include <json.hpp>

#include <algorithm>
#include <future>
#include <map>
#include <thread>

namespace regbound {

using nlohmann::json;

Rational ToleranceFn::operator()(const Rational& x) const { return coef * pow(x / 2, static_cast<unsigned>(exponent)); }

std::string ToleranceFn::str() const {
  if (exponent == 0) return to_string(coef);
  return to_string(coef) + "*(x/2)^" + std::to_string(exponent);
}

ToleranceFn F_kgamma(uint32_t k, const Rational& gamma) {
  require(k >= 1 && k <= 30, "F_{k,γ} needs 1 <= k <= 30");
  return ToleranceFn{gamma * gamma * gamma / 12, uint64_t(1) << (k + 1)};
}

ToleranceFn reduction_tolerance(uint32_t k, const Rational& delta) {
  require(k >= 1 && k <= 28, "reduction tolerance needs 1 <= k <= 28");
  return ToleranceFn{pow(delta, 4), uint64_t(1) << (k + 3)};
}

// ---- relative density ----

namespace {

std::vector<std::vector<uint32_t>> class_lists(const VertexClassSet& cs) {
  std::vector<std::vector<uint32_t>> out(cs.count());
  for (size_t c = 0; c < cs.count(); ++c)
    for (uint64_t v = 0; v < cs.sizes[c]; ++v) out[c].push_back(static_cast<uint32_t>(cs.offset(c) + v));
  return out;
}

std::vector<int32_t> class_map(uint32_t ground, const std::vector<std::vector<uint32_t>>& classes) {
  std::vector<int32_t> where(ground, -1);
  for (size_t c = 0; c < classes.size(); ++c)
    for (uint32_t v : classes[c]) {
      require(v < ground, "class vertex outside the ground set");
      require(where[v] < 0, "classes overlap");
      where[v] = static_cast<int32_t>(c);
    }
  return where;
}

// Calls f(slots, edge_index) for every clique on the classes `C` of the (|C|-1)-sets `lower`,
// slots ordered as C. Only edges with codes in [from, to) of `lower` seed the search.
template <class F>
void for_each_clique(const std::vector<std::vector<uint32_t>>& classes, const std::vector<int32_t>& where,
                     const std::vector<uint32_t>& C, const UniformSet& lower, size_t from, size_t to, F&& f) {
  size_t r = C.size();
  require(r >= 2 && lower.arity() + 1 == r, "clique arity mismatch");
  std::vector<int32_t> pos(classes.size(), -1);
  for (size_t j = 0; j < r; ++j) pos[C[j]] = static_cast<int32_t>(j);
  std::vector<uint32_t> slots(r), face(r - 1);
  const auto& codes = lower.codes();
  for (size_t ei = from; ei < to; ++ei) {
    auto e = lower.decode(codes[ei]);
    bool ok = true;
    std::vector<bool> seen(r, false);
    for (uint32_t v : e) {
      int32_t c = v < where.size() ? where[v] : -1;
      int32_t p = c < 0 ? -1 : pos[c];
      if (p < 0 || p == static_cast<int32_t>(r - 1) || seen[p]) {
        ok = false;
        break;
      }
      seen[p] = true;
      slots[p] = v;
    }
    if (!ok) continue;
    for (uint32_t v : classes[C[r - 1]]) {
      slots[r - 1] = v;
      bool all = true;
      for (size_t i = 0; i + 1 < r && all; ++i) {
        size_t t = 0;
        for (size_t j = 0; j < r; ++j)
          if (j != i) face[t++] = slots[j];
        all = lower.contains(face);
      }
      if (all) f(slots, ei);
    }
  }
}

std::vector<uint32_t> all_classes(size_t k) {
  std::vector<uint32_t> C(k);
  for (size_t i = 0; i < k; ++i) C[i] = static_cast<uint32_t>(i);
  return C;
}

}  // namespace

UniformSet as_uniform(const KPartiteKGraph& H) {
  const auto& cs = H.classes();
  uint32_t n = static_cast<uint32_t>(cs.total());
  UniformSet probe(n, static_cast<uint32_t>(H.k()));
  std::vector<uint64_t> codes;
  codes.reserve(H.edge_count());
  for (uint64_t c : H.codes()) {
    auto t = H.decode(c);
    for (size_t i = 0; i < t.size(); ++i) t[i] = static_cast<uint32_t>(t[i] + cs.offset(i));
    codes.push_back(probe.encode(t));
  }
  return UniformSet::from_codes(n, static_cast<uint32_t>(H.k()), std::move(codes));
}

CliqueCount relative_density(const KPartiteKGraph& H, const UniformSet& S) {
  const auto& cs = H.classes();
  require(H.k() >= 2, "relative density needs k >= 2");
  require(S.arity() + 1 == H.k(), "S must be a (k-1)-graph");
  require(S.ground() == cs.total(), "S is not on H's classes");
  auto classes = class_lists(cs);
  auto where = class_map(S.ground(), classes);
  auto C = all_classes(H.k());
  auto count_range = [&](size_t from, size_t to) {
    std::pair<uint64_t, uint64_t> out{0, 0};
    std::vector<uint32_t> local(H.k());
    for_each_clique(classes, where, C, S, from, to, [&](const std::vector<uint32_t>& slots, size_t) {
      ++out.first;
      for (size_t i = 0; i < slots.size(); ++i) local[i] = static_cast<uint32_t>(slots[i] - cs.offset(i));
      if (H.contains(local)) ++out.second;
    });
    return out;
  };
  CliqueCount cc;
  size_t m = S.size();
  unsigned threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  if (m < 4096 || threads == 1) {
    auto r = count_range(0, m);
    cc.cliques = r.first;
    cc.in_H = r.second;
  } else {
    std::vector<std::future<std::pair<uint64_t, uint64_t>>> parts;
    for (unsigned t = 0; t < threads; ++t)
      parts.push_back(std::async(std::launch::async, count_range, m * t / threads, m * (t + 1) / threads));
    for (auto& p : parts) {
      auto r = p.get();
      cc.cliques += r.first;
      cc.in_H += r.second;
    }
  }
  cc.density = cc.cliques == 0 ? Rational(0) : Rational(cc.in_H) / cc.cliques;
  return cc;
}

// ---- sub-polyad enumeration ----

namespace {

constexpr uint64_t kNone = ~uint64_t(0);

struct PolyadIndex {
  size_t k = 0;
  std::vector<std::vector<uint64_t>> codes;  // per part
  std::vector<uint32_t> faces;               // clique c, part i -> faces[c * k + i]
  std::vector<uint8_t> in_H;
  uint64_t hits = 0;
  uint64_t cliques() const { return in_H.size(); }
};

PolyadIndex index_polyad(const UniformSet& H, const Polyad& P) {
  P.validate();
  PolyadIndex X;
  size_t k = X.k = P.k();
  uint32_t n = P.parts[0].ground();
  require(H.arity() == k && H.ground() == n, "H must be a family of k-sets over the polyad's ground set");
  auto where = class_map(n, P.clusters);
  for (const auto& part : P.parts) X.codes.push_back(part.codes());
  const UniformSet& last = P.parts[k - 1];
  std::vector<uint32_t> slots(k), face(k - 1), idx(k);
  for (size_t fi = 0; fi < X.codes[k - 1].size(); ++fi) {
    for (uint32_t v : last.decode(X.codes[k - 1][fi])) slots[where[v]] = v;
    idx[k - 1] = static_cast<uint32_t>(fi);
    for (uint32_t v : P.clusters[k - 1]) {
      slots[k - 1] = v;
      bool all = true;
      for (size_t i = 0; i + 1 < k && all; ++i) {
        size_t t = 0;
        for (size_t j = 0; j < k; ++j)
          if (j != i) face[t++] = slots[j];
        uint64_t c = P.parts[i].encode(face);
        auto it = std::lower_bound(X.codes[i].begin(), X.codes[i].end(), c);
        all = it != X.codes[i].end() && *it == c;
        if (all) idx[i] = static_cast<uint32_t>(it - X.codes[i].begin());
      }
      if (!all) continue;
      X.faces.insert(X.faces.end(), idx.begin(), idx.end());
      bool h = H.contains(slots);
      X.in_H.push_back(h ? 1 : 0);
      X.hits += h;
    }
  }
  return X;
}

// Current selection during a walk: exact mode keeps one mask per part, sampled mode keeps flags.
struct Selection {
  const PolyadIndex* X = nullptr;
  const std::vector<uint64_t>* masks = nullptr;
  const std::vector<std::vector<uint8_t>>* flags = nullptr;
  std::vector<std::vector<uint64_t>> chosen() const {
    std::vector<std::vector<uint64_t>> out(X->k);
    for (size_t i = 0; i < X->k; ++i)
      for (size_t e = 0; e < X->codes[i].size(); ++e) {
        bool on = masks ? ((*masks)[i] >> e) & 1u : (*flags)[i][e] != 0;
        if (on) out[i].push_back(X->codes[i][e]);
      }
    return out;
  }
};

// visit(a, h, sel) for every enumerated sub-polyad; returns false to stop. Returns the number visited.
template <class Visit>
BigInt walk(const PolyadIndex& X, const RSCheckOptions& opt, Visit&& visit) {
  size_t k = X.k;
  uint64_t K = X.cliques();
  BigInt visited = 0;
  if (opt.mode == Mode::Exact) {
    BigInt outer = 1;
    for (size_t i = 0; i < k; ++i) {
      size_t m = X.codes[i].size();
      if (m > opt.part_limit || m > 62)
        fail(ErrorCode::Resource, "polyad part has " + std::to_string(m) + " edges, exact limit is " +
                                      std::to_string(opt.part_limit));
      if (i + 1 < k) outer *= BigInt(1) << m;
    }
    size_t mlast = X.codes[k - 1].size();
    BigInt cost = outer * (BigInt(K) + (BigInt(1) << mlast));
    if (cost > BigInt(opt.cap))
      fail(ErrorCode::Resource, "sub-polyad enumeration costs " + cost.str() + ", cap is " + std::to_string(opt.cap));
    std::vector<uint64_t> masks(k, 0);
    std::vector<uint64_t> A(mlast), Hh(mlast);
    Selection sel{&X, &masks, nullptr};
    uint64_t inner = uint64_t(1) << mlast;
    while (true) {
      std::fill(A.begin(), A.end(), 0);
      std::fill(Hh.begin(), Hh.end(), 0);
      for (uint64_t c = 0; c < K; ++c) {
        const uint32_t* fc = &X.faces[c * k];
        bool on = true;
        for (size_t i = 0; i + 1 < k && on; ++i) on = (masks[i] >> fc[i]) & 1u;
        if (!on) continue;
        ++A[fc[k - 1]];
        Hh[fc[k - 1]] += X.in_H[c];
      }
      uint64_t a = 0, h = 0;
      masks[k - 1] = 0;
      ++visited;
      if (!visit(a, h, sel)) return visited;
      uint64_t gray = 0;
      for (uint64_t g = 1; g < inner; ++g) {
        unsigned bit = static_cast<unsigned>(__builtin_ctzll(g));
        gray ^= uint64_t(1) << bit;
        masks[k - 1] = gray;
        if ((gray >> bit) & 1u) {
          a += A[bit];
          h += Hh[bit];
        } else {
          a -= A[bit];
          h -= Hh[bit];
        }
        ++visited;
        if (!visit(a, h, sel)) return visited;
      }
      size_t i = 0;
      for (; i + 1 < k; ++i) {
        uint64_t lim = uint64_t(1) << X.codes[i].size();
        if (++masks[i] < lim) break;
        masks[i] = 0;
      }
      if (i + 1 >= k) break;
    }
    return visited;
  }
  Rng rng(seed_for(opt.seed, "rs/sampled"));
  std::vector<std::vector<uint8_t>> flags(k);
  for (size_t i = 0; i < k; ++i) flags[i].assign(X.codes[i].size(), 1);
  Selection sel{&X, nullptr, &flags};
  for (uint64_t s = 0; s < std::max<uint64_t>(opt.samples, 1); ++s) {
    if (s > 0)  // the first sample is P itself
      for (size_t i = 0; i < k; ++i) {
        uint32_t m = static_cast<uint32_t>(flags[i].size());
        std::fill(flags[i].begin(), flags[i].end(), 0);
        for (uint32_t e : rng.sample_subset(m, static_cast<uint32_t>(rng.below(uint64_t(m) + 1)))) flags[i][e] = 1;
      }
    uint64_t a = 0, h = 0;
    for (uint64_t c = 0; c < K; ++c) {
      bool on = true;
      for (size_t i = 0; i < k && on; ++i) on = flags[i][X.faces[c * k + i]] != 0;
      if (on) {
        ++a;
        h += X.in_H[c];
      }
    }
    ++visited;
    if (!visit(a, h, sel)) return visited;
  }
  return visited;
}

// Least and greatest H-count among visited sub-polyads with each clique count.
struct Profile {
  std::vector<uint64_t> hmin, hmax;
  BigInt enumerated = 0;
};

Profile profile(const PolyadIndex& X, const RSCheckOptions& opt) {
  Profile p;
  uint64_t K = X.cliques();
  p.hmin.assign(K + 1, kNone);
  p.hmax.assign(K + 1, 0);
  p.enumerated = walk(X, opt, [&](uint64_t a, uint64_t h, const Selection&) {
    if (p.hmin[a] == kNone || h < p.hmin[a]) p.hmin[a] = h;
    if (h > p.hmax[a]) p.hmax[a] = h;
    return true;
  });
  return p;
}

Rational ratio(uint64_t h, uint64_t a) { return a == 0 ? Rational(0) : Rational(h) / a; }

SubPolyad find_sub(const PolyadIndex& X, const Polyad& P, const RSCheckOptions& opt, uint64_t a, uint64_t h) {
  std::optional<std::vector<std::vector<uint64_t>>> hit;
  walk(X, opt, [&](uint64_t aa, uint64_t hh, const Selection& sel) {
    if (aa != a || hh != h) return true;
    hit = sel.chosen();
    return false;
  });
  if (!hit) fail(ErrorCode::Internal, "sub-polyad witness vanished on replay");
  SubPolyad w;
  w.S.clusters = P.clusters;
  for (size_t i = 0; i < X.k; ++i)
    w.S.parts.push_back(UniformSet::from_codes(P.parts[i].ground(), static_cast<uint32_t>(X.k - 1), (*hit)[i]));
  w.cliques = a;
  w.in_H = h;
  w.density = ratio(h, a);
  return w;
}

uint64_t threshold_count(const Rational& eps, uint64_t K) {
  BigInt t = ceil_big(eps * K);
  if (t < 0) return 0;
  if (t > BigInt(K)) return K + 1;
  return static_cast<uint64_t>(t);
}

PolyadVerdict start_verdict(const PolyadIndex& X) {
  PolyadVerdict v;
  v.cliques = X.cliques();
  v.in_H = X.hits;
  v.density = ratio(X.hits, X.cliques());
  v.vacuous = v.cliques == 0;
  return v;
}

}  // namespace

SubPolyad recount(const UniformSet& H, const Polyad& S) {
  UniformSet K = clique_set(S);
  SubPolyad out;
  out.S = S;
  out.cliques = K.size();
  for (uint64_t c : K.codes()) out.in_H += H.contains(K.decode(c));
  out.density = ratio(out.in_H, out.cliques);
  return out;
}

PolyadVerdict is_eps_d_regular(const UniformSet& H, const Polyad& P, const Rational& eps, const Rational& d,
                               const RSCheckOptions& opt) {
  require(eps >= 0, "ε must be nonnegative");
  auto X = index_polyad(H, P);
  PolyadVerdict v = start_verdict(X);
  if (v.vacuous) return v;
  uint64_t K = X.cliques();
  auto pr = profile(X, opt);
  v.enumerated = pr.enumerated;
  uint64_t T = threshold_count(eps, K);
  bool have = false;
  Rational worst_dev = -1;
  uint64_t wa = 0, wh = 0;
  for (uint64_t a = T; a <= K; ++a) {
    if (pr.hmin[a] == kNone) continue;
    for (uint64_t h : {pr.hmin[a], pr.hmax[a]}) {
      Rational r = ratio(h, a);
      if (!have || r < v.min_density) v.min_density = r;
      if (!have || r > v.max_density) v.max_density = r;
      have = true;
      Rational dev = r > d ? Rational(r - d) : Rational(d - r);
      if (dev > eps && dev > worst_dev) {
        worst_dev = dev;
        wa = a;
        wh = h;
      }
    }
  }
  if (worst_dev >= 0) {
    v.regular = false;
    v.witness = find_sub(X, P, opt, wa, wh);
  } else {
    v.decided = opt.mode == Mode::Exact;
  }
  return v;
}

PolyadVerdict is_eps_regular_polyad(const UniformSet& H, const Polyad& P, const Rational& eps,
                                    const RSCheckOptions& opt) {
  require(eps >= 0, "ε must be nonnegative");
  auto X = index_polyad(H, P);
  PolyadVerdict v = start_verdict(X);
  if (v.vacuous) return v;
  uint64_t K = X.cliques();
  auto pr = profile(X, opt);
  v.enumerated = pr.enumerated;
  uint64_t T = threshold_count(eps, K);
  bool have = false;
  uint64_t lo_a = 0, lo_h = 0, hi_a = 0, hi_h = 0;
  for (uint64_t a = T; a <= K; ++a) {
    if (pr.hmin[a] == kNone) continue;
    Rational lo = ratio(pr.hmin[a], a), hi = ratio(pr.hmax[a], a);
    if (!have || lo < v.min_density) {
      v.min_density = lo;
      lo_a = a;
      lo_h = pr.hmin[a];
    }
    if (!have || hi > v.max_density) {
      v.max_density = hi;
      hi_a = a;
      hi_h = pr.hmax[a];
    }
    have = true;
  }
  if (have && v.max_density - v.min_density > 2 * eps) {
    v.regular = false;
    v.witness = find_sub(X, P, opt, lo_a, lo_h);
    v.witness_high = find_sub(X, P, opt, hi_a, hi_h);
  } else {
    v.decided = opt.mode == Mode::Exact;
  }
  return v;
}

Rational measured_eps(const UniformSet& H, const Polyad& P, const Rational& d, const RSCheckOptions& opt) {
  require(opt.mode == Mode::Exact, "measured ε needs exact enumeration");
  auto X = index_polyad(H, P);
  uint64_t K = X.cliques();
  if (K == 0) return 0;
  auto pr = profile(X, opt);
  // M[a]: largest deviation from d among sub-polyads with at least a cliques
  std::vector<Rational> M(K + 2, Rational(-1));
  for (uint64_t a = K + 1; a-- > 0;) {
    M[a] = M[a + 1];
    if (pr.hmin[a] == kNone) continue;
    for (uint64_t h : {pr.hmin[a], pr.hmax[a]}) {
      Rational r = ratio(h, a);
      Rational dev = r > d ? Rational(r - d) : Rational(d - r);
      if (dev > M[a]) M[a] = dev;
    }
  }
  // ε with ceil(εK) = a lies in ((a-1)/K, a/K]; it works iff M[a] <= ε.
  Rational best = 1;
  if (M[0] <= 0) return 0;
  for (uint64_t a = 1; a <= K; ++a) {
    Rational hi = Rational(a) / K, lo = Rational(a - 1) / K;
    Rational need = M[a] < 0 ? Rational(0) : M[a];
    if (need > hi) continue;
    Rational cand = std::max(need, lo);
    if (cand < best) best = cand;
  }
  return best;
}

// ---- partitions ----

std::vector<PartitionPolyad> partition_polyads(const KPartiteKGraph& H, const KPartition& P) {
  const auto& cs = H.classes();
  size_t k = H.k();
  require(k >= 2, "need k >= 2");
  require(P.arity() + 1 == k, "need an arity-(k-1) partition");
  require(P.p1().ground_size() == cs.total(), "partition ground set does not match H's classes");
  uint32_t n = static_cast<uint32_t>(cs.total());
  struct Acc {
    uint64_t cliques = 0, in_H = 0;
    std::vector<uint32_t> clusters;
  };
  std::map<std::vector<uint32_t>, Acc> acc;
  std::vector<uint32_t> local(k, 0), glob(k), face(k - 1), key(k);
  uint64_t total = cs.product();
  uint32_t top = P.arity();
  for (uint64_t t = 0; t < total; ++t) {
    for (size_t c = 0; c < k; ++c) glob[c] = static_cast<uint32_t>(cs.offset(c) + local[c]);
    bool ok = true;
    for (size_t i = 0; i < k && ok; ++i) {
      size_t m = 0;
      for (size_t j = 0; j < k; ++j)
        if (j != i) face[m++] = glob[j];
      int64_t cell = P.cell_of(top, face);
      ok = cell >= 0;
      key[i] = static_cast<uint32_t>(cell);
    }
    if (ok) {
      auto& a = acc[key];
      if (a.cliques == 0)
        for (size_t c = 0; c < k; ++c) a.clusters.push_back(P.p1().cell_of(glob[c]));
      ++a.cliques;
      a.in_H += H.contains(local);
    }
    for (size_t c = k; c-- > 0;) {
      if (++local[c] < cs.sizes[c]) break;
      local[c] = 0;
    }
  }
  std::vector<PartitionPolyad> out;
  for (auto& [faces, a] : acc) {
    PartitionPolyad pp;
    pp.faces = faces;
    pp.cliques = a.cliques;
    pp.in_H = a.in_H;
    for (uint32_t c : a.clusters) pp.polyad.clusters.push_back(P.p1().cell(c));
    for (size_t i = 0; i < k; ++i) {
      if (top == 1) {
        std::vector<std::vector<uint32_t>> singles;
        for (uint32_t v : P.p1().cell(faces[i])) singles.push_back({v});
        pp.polyad.parts.push_back(UniformSet::from_sets(n, 1, singles));
      } else {
        pp.polyad.parts.push_back(P.layer(top).at(faces[i]).edges);
      }
    }
    out.push_back(std::move(pp));
  }
  return out;
}

PartitionVerdict is_eps_regular_partition(const KPartiteKGraph& H, const KPartition& P, const Rational& eps,
                                          const RSCheckOptions& opt) {
  require(eps >= 0, "ε must be nonnegative");
  PartitionVerdict out;
  BigInt vk = boost::multiprecision::pow(BigInt(H.classes().total()), static_cast<unsigned>(H.k()));
  out.budget = eps * Rational(vk);
  UniformSet Hu = as_uniform(H);
  auto polyads = partition_polyads(H, P);
  out.polyads = polyads.size();
  for (size_t idx = 0; idx < polyads.size(); ++idx) {
    auto& pp = polyads[idx];
    RSCheckOptions o = opt;
    o.seed = seed_for(opt.seed, "polyad/" + std::to_string(idx));
    auto v = is_eps_regular_polyad(Hu, pp.polyad, eps, o);
    if (!v.regular) {
      out.irregular_mass += pp.cliques;
      out.irregular.push_back(IrregularPolyad{pp.faces, pp.cliques, std::move(v)});
    } else if (!v.decided) {
      out.undecided_mass += pp.cliques;
    }
  }
  if (Rational(out.irregular_mass) > out.budget)
    out.verdict = Verdict::NotRegular;
  else if (Rational(out.irregular_mass + out.undecided_mass) > out.budget)
    out.verdict = Verdict::Undecided;
  else
    out.verdict = Verdict::Regular;
  return out;
}

Rational RSParams::d0() const {
  Rational d = 1;
  for (size_t i = 1; i < a.size(); ++i) d = std::min(d, rat(1, static_cast<int64_t>(a[i])));
  return d;
}

std::optional<std::vector<uint64_t>> layer_counts(const KPartition& P, std::string* why) {
  std::vector<uint64_t> out{P.p1().size()};
  for (uint32_t r = 2; r <= P.arity(); ++r) {
    std::map<std::vector<uint32_t>, uint64_t> per;
    for (const auto& cell : P.layer(r)) ++per[cell.under];
    uint64_t a = 0;
    for (const auto& [under, c] : per) {
      if (a == 0) a = c;
      if (c != a) {
        if (why) *why = "layer " + std::to_string(r) + " splits polyads into " + std::to_string(a) + " and " +
                        std::to_string(c) + " parts";
        return std::nullopt;
      }
    }
    out.push_back(a == 0 ? 1 : a);
  }
  return out;
}

EquitableReport is_f_equitable(const KPartition& P, const RSParams& params, const RSCheckOptions& opt) {
  EquitableReport rep;
  std::string why;
  auto counts = layer_counts(P, &why);
  if (!counts) {
    rep.equitable = false;
    rep.reason = why;
    return rep;
  }
  std::vector<uint64_t> a = params.a.empty() ? *counts : params.a;
  for (uint64_t x : a) require(x >= 1, "a_i must be at least 1");
  if (a != *counts) {
    rep.equitable = false;
    rep.reason = "layer part counts differ from a";
    return rep;
  }
  if (!P.p1().equitable()) {
    rep.equitable = false;
    rep.reason = "P1 is not equitable";
    return rep;
  }
  RSParams used = params;
  used.a = a;
  Rational eps = params.f(used.d0());
  for (uint32_t r = 2; r <= P.arity(); ++r) {
    const auto& cells = P.layer(r);
    for (size_t ci = 0; ci < cells.size(); ++ci) {
      RSCheckOptions o = opt;
      o.seed = seed_for(opt.seed, "equitable/" + std::to_string(r) + "/" + std::to_string(ci));
      auto v = is_eps_d_regular(cells[ci].edges, under_polyad(P, r, ci), eps, rat(1, static_cast<int64_t>(a[r - 1])), o);
      ++rep.cells_checked;
      if (!v.decided) rep.decided = false;
      if (!v.regular) {
        rep.equitable = false;
        rep.failures.push_back(EquitableFailure{r, ci, std::move(v)});
      }
    }
  }
  if (!rep.equitable && rep.reason.empty()) rep.reason = "some cell is not (f(d0), 1/a_r)-regular in its polyad";
  return rep;
}

// ---- complexes ----

const UniformSet& RankedHypergraph::rank(uint32_t r) const {
  require(r >= 1 && r + 1 <= k() && r < ranks.size(), "rank out of range");
  return ranks[r];
}

void RankedHypergraph::validate() const {
  require(k() >= 2, "a complex needs at least two classes");
  require(ranks.size() == k(), "a k-complex carries ranks 1..k-1");
  auto where = class_map(ground, classes);
  std::vector<uint32_t> all;
  for (const auto& c : classes) all.insert(all.end(), c.begin(), c.end());
  std::vector<std::vector<uint32_t>> singles;
  for (uint32_t v : all) singles.push_back({v});
  require(ranks[1] == UniformSet::from_sets(ground, 1, singles), "rank 1 must hold every class vertex");
  for (uint32_t r = 2; r < k(); ++r) {
    const UniformSet& L = ranks[r];
    require(L.arity() == r && L.ground() == ground, "rank arity or ground mismatch");
    for (uint64_t c : L.codes()) {
      auto e = L.decode(c);
      std::vector<bool> seen(k(), false);
      for (uint32_t v : e) {
        require(where[v] >= 0 && !seen[where[v]], "complex edge is not transversal");
        seen[where[v]] = true;
      }
      for (size_t i = 0; i < e.size() && r > 2; ++i) {
        std::vector<uint32_t> f;
        for (size_t j = 0; j < e.size(); ++j)
          if (j != i) f.push_back(e[j]);
        require(ranks[r - 1].contains(f), "P^(r) is not inside the cliques of P^(r-1)");
      }
    }
  }
}

namespace {

RankedHypergraph skeleton(const std::vector<std::vector<uint32_t>>& classes, uint32_t ground) {
  RankedHypergraph P;
  P.ground = ground;
  P.classes = classes;
  P.ranks.assign(classes.size(), UniformSet());
  std::vector<std::vector<uint32_t>> singles;
  for (const auto& c : classes)
    for (uint32_t v : c) singles.push_back({v});
  P.ranks[0] = UniformSet(ground, 0);
  P.ranks[1] = UniformSet::from_sets(ground, 1, singles);
  return P;
}

// Rank r of P from rank r-1: every clique on every r-set of classes, filtered by keep.
template <class Keep>
UniformSet grow_rank(const RankedHypergraph& P, uint32_t r, Keep&& keep) {
  auto where = class_map(P.ground, P.classes);
  UniformSet probe(P.ground, r);
  std::vector<uint64_t> codes;
  for_each_combination(P.k(), r, [&](const std::vector<uint32_t>& C) {
    const UniformSet& lower = P.ranks[r - 1];
    for_each_clique(P.classes, where, C, lower, 0, lower.size(), [&](const std::vector<uint32_t>& slots, size_t) {
      if (keep()) codes.push_back(probe.encode(slots));
    });
    return true;
  });
  return UniformSet::from_codes(P.ground, r, std::move(codes));
}

}  // namespace

RankedHypergraph complete_complex(const VertexClassSet& cs) {
  RankedHypergraph P = skeleton(class_lists(cs), static_cast<uint32_t>(cs.total()));
  for (uint32_t r = 2; r < P.k(); ++r) P.ranks[r] = grow_rank(P, r, [] { return true; });
  return P;
}

RankedHypergraph random_complex(const VertexClassSet& cs, const std::vector<Rational>& d, uint64_t seed) {
  RankedHypergraph P = skeleton(class_lists(cs), static_cast<uint32_t>(cs.total()));
  require(d.size() + 2 == P.k() || (P.k() == 2 && d.empty()), "need one density per rank 2..k-1");
  for (uint32_t r = 2; r < P.k(); ++r) {
    require(d[r - 2] >= 0 && d[r - 2] <= 1, "densities must lie in [0,1]");
    Rng rng(seed_for(seed, "complex/rank/" + std::to_string(r)));
    P.ranks[r] = grow_rank(P, r, [&] { return rng.coin(d[r - 2]); });
  }
  return P;
}

RankedHypergraph slice_complex(const RankedHypergraph& P, const std::vector<uint32_t>& Vk_subset) {
  P.validate();
  std::vector<uint32_t> keep = Vk_subset;
  std::sort(keep.begin(), keep.end());
  require(std::adjacent_find(keep.begin(), keep.end()) == keep.end(), "slice has repeated vertices");
  const auto& last = P.classes.back();
  for (uint32_t v : keep) require(std::binary_search(last.begin(), last.end(), v), "slice must lie inside V_k");
  std::vector<bool> drop(P.ground, false);
  for (uint32_t v : last) drop[v] = !std::binary_search(keep.begin(), keep.end(), v);
  auto classes = P.classes;
  classes.back() = keep;
  RankedHypergraph Q = skeleton(classes, P.ground);
  for (uint32_t r = 2; r < P.k(); ++r) {
    std::vector<uint64_t> codes;
    for (uint64_t c : P.ranks[r].codes()) {
      auto e = P.ranks[r].decode(c);
      if (std::none_of(e.begin(), e.end(), [&](uint32_t v) { return drop[v]; })) codes.push_back(c);
    }
    Q.ranks[r] = UniformSet::from_codes(P.ground, r, std::move(codes));
  }
  return Q;
}

uint64_t count_cliques(const RankedHypergraph& P, const std::vector<uint32_t>& C) {
  require(C.size() >= 2 && C.size() <= P.k(), "class subset size out of range");
  auto where = class_map(P.ground, P.classes);
  const UniformSet& lower = P.rank(static_cast<uint32_t>(C.size() - 1));
  uint64_t n = 0;
  for_each_clique(P.classes, where, C, lower, 0, lower.size(), [&](const std::vector<uint32_t>&, size_t) { ++n; });
  return n;
}

std::vector<Rational> measured_densities(const RankedHypergraph& P) {
  std::vector<Rational> d;
  for (uint32_t r = 2; r < P.k(); ++r) {
    uint64_t den = 0;
    for_each_combination(P.k(), r, [&](const std::vector<uint32_t>& C) {
      den += count_cliques(P, C);
      return true;
    });
    d.push_back(den == 0 ? Rational(0) : Rational(P.ranks[r].size()) / den);
  }
  return d;
}

DenseCountReport dense_counting_check(const RankedHypergraph& P, const Rational& gamma, const std::vector<Rational>& d) {
  P.validate();
  require(gamma >= 0, "γ must be nonnegative");
  uint32_t k = P.k();
  DenseCountReport rep;
  rep.k = k;
  rep.d = d.empty() ? measured_densities(P) : d;
  require(rep.d.size() + 2 == k, "need one density per rank 2..k-1");
  Rational pred = 1, per_edge = 1;
  for (uint32_t i = 2; i < k; ++i) {
    pred *= pow(rep.d[i - 2], static_cast<unsigned>(binomial(k, i)));
    per_edge *= pow(rep.d[i - 2], static_cast<unsigned>(binomial(k - 1, i - 1)));
  }
  for (const auto& c : P.classes) pred *= c.size();
  per_edge *= P.classes.back().size();
  rep.predicted = pred;
  rep.lower = (1 - gamma) * pred;
  rep.upper = (1 + gamma) * pred;
  rep.per_edge_predicted = per_edge;

  auto where = class_map(P.ground, P.classes);
  auto C = all_classes(k);
  const UniformSet& top = P.rank(k - 1);
  std::vector<uint64_t> per(top.size(), 0);
  for_each_clique(P.classes, where, C, top, 0, top.size(), [&](const std::vector<uint32_t>&, size_t e) { ++per[e]; });
  for (size_t e = 0; e < top.size(); ++e) {
    rep.cliques += per[e];
    // P_k: the top-rank edges avoiding class k
    auto verts = top.decode(top.codes()[e]);
    bool in_Pk = std::none_of(verts.begin(), verts.end(), [&](uint32_t v) { return where[v] == int32_t(k - 1); });
    if (!in_Pk) continue;
    ++rep.top_edges;
    Rational c = per[e];
    if (c < (1 - gamma) * per_edge || c > (1 + gamma) * per_edge) ++rep.exceptional_edges;
  }
  Rational cnt = rep.cliques;
  rep.within_band = rep.lower <= cnt && cnt <= rep.upper;
  if (pred == 0)
    rep.slack = rep.cliques == 0 ? Rational(0) : Rational(-1);
  else
    rep.slack = (cnt > pred ? Rational(cnt - pred) : Rational(pred - cnt)) / pred;
  rep.exceptional_fraction = rep.top_edges == 0 ? Rational(0) : Rational(rep.exceptional_edges) / rep.top_edges;
  rep.per_edge_within = Rational(rep.exceptional_edges) <= gamma * rep.top_edges;
  return rep;
}

namespace {

// The r-polyad P^(r-1)[C] of a complex, clusters in C's order.
Polyad complex_polyad(const RankedHypergraph& P, const std::vector<uint32_t>& C) {
  auto where = class_map(P.ground, P.classes);
  Polyad out;
  uint32_t r = static_cast<uint32_t>(C.size());
  for (uint32_t c : C) out.clusters.push_back(P.classes[c]);
  for (uint32_t i = 0; i < r; ++i) {
    std::vector<bool> want(P.k(), false);
    for (uint32_t j = 0; j < r; ++j)
      if (j != i) want[C[j]] = true;
    const UniformSet& lower = P.rank(r - 1);
    std::vector<uint64_t> codes;
    for (uint64_t c : lower.codes()) {
      auto e = lower.decode(c);
      if (std::all_of(e.begin(), e.end(), [&](uint32_t v) { return want[where[v]]; })) codes.push_back(c);
    }
    out.parts.push_back(UniformSet::from_codes(P.ground, r - 1, std::move(codes)));
  }
  return out;
}

}  // namespace

SlicingReport slicing_check(const RankedHypergraph& P, const std::vector<uint32_t>& Vk_subset, const ToleranceFn& f,
                            const Rational& delta, const std::vector<Rational>& d, const RSCheckOptions& opt) {
  require(delta > 0 && delta <= 1, "δ must lie in (0,1]");
  require(P.k() >= 2, "need k >= 2");
  require(Rational(Vk_subset.size()) >= delta * P.classes.back().size(), "|V_k'| must be at least δ|V_k|");
  RankedHypergraph Q = slice_complex(P, Vk_subset);
  SlicingReport rep;
  uint32_t k = P.k();
  rep.d = d.empty() ? measured_densities(P) : d;
  require(rep.d.size() + 2 == k, "need one density per rank 2..k-1");
  rep.d0 = rep.d.empty() ? Rational(1) : *std::min_element(rep.d.begin(), rep.d.end());
  rep.f_d0 = f(rep.d0);
  rep.fstar_d0 = 2 / delta * rep.f_d0;
  rep.f_bound = k >= 2 && rep.f_d0 <= delta / 2 * F_kgamma(k - 1, rat(1, 4))(rep.d0);
  rep.identity = Q.classes == P.classes && Q.ranks == P.ranks;
  rep.hypothesis = rep.conclusion = true;
  for (uint32_t r = 2; r < k; ++r) {
    for_each_combination(k, r, [&](const std::vector<uint32_t>& C) {
      SliceLayer L;
      L.rank = r;
      L.class_subset = C;
      Polyad pp = complex_polyad(P, C), qq = complex_polyad(Q, C);
      L.eps_P = measured_eps(P.ranks[r], pp, rep.d[r - 2], opt);
      L.eps_Q = measured_eps(Q.ranks[r], qq, rep.d[r - 2], opt);
      L.P_ok = is_eps_d_regular(P.ranks[r], pp, rep.f_d0, rep.d[r - 2], opt).regular;
      L.Q_ok = is_eps_d_regular(Q.ranks[r], qq, rep.fstar_d0, rep.d[r - 2], opt).regular;
      rep.hypothesis = rep.hypothesis && L.P_ok;
      rep.conclusion = rep.conclusion && L.Q_ok;
      rep.layers.push_back(std::move(L));
      return true;
    });
  }
  return rep;
}

// ---- reduction ----

ReductionReport reduction_check(const KPartiteKGraph& H, const KPartition& P, const Rational& delta,
                                const std::optional<ToleranceFn>& f, bool check_equitable, const RSCheckOptions& opt) {
  require(delta > 0 && delta <= 1, "δ must lie in (0,1]");
  const auto& cs = H.classes();
  size_t k = H.k();
  require(P.arity() + 1 == k, "need an arity-(k-1) partition");
  require(P.p1().ground_size() == cs.total(), "partition ground set does not match H's classes");
  ReductionReport rep;
  rep.threshold = Radical(2, delta, 2);

  if (check_equitable) {
    rep.equitable_checked = true;
    std::string why;
    auto counts = layer_counts(P, &why);
    if (!counts) {
      rep.equitable_detail = why;
    } else {
      RSParams params{*counts, f ? *f : reduction_tolerance(static_cast<uint32_t>(k), delta), 1};
      auto eq = is_f_equitable(P, params, opt);
      rep.equitable = eq.equitable && eq.decided;
      rep.equitable_detail = eq.equitable ? (eq.decided ? "f-equitable" : "no failure found by sampling") : eq.reason;
    }
  }

  // hypothesis: every S with |𝒦(S)| >= δ|𝒦(P)| has d_H(S) >= (2/3) d_H(P)
  UniformSet Hu = as_uniform(H);
  auto polyads = partition_polyads(H, P);
  rep.polyads = polyads.size();
  bool undecided = false;
  for (size_t idx = 0; idx < polyads.size(); ++idx) {
    const auto& pp = polyads[idx];
    if (pp.in_H == 0) continue;
    RSCheckOptions o = opt;
    o.seed = seed_for(opt.seed, "reduction/polyad/" + std::to_string(idx));
    auto X = index_polyad(Hu, pp.polyad);
    uint64_t K = X.cliques();
    auto pr = profile(X, o);
    uint64_t T = threshold_count(delta, K);
    std::optional<std::pair<uint64_t, uint64_t>> worst;
    for (uint64_t a = std::max<uint64_t>(T, 1); a <= K; ++a) {
      if (pr.hmin[a] == kNone) continue;
      uint64_t h = pr.hmin[a];
      // 3 h K < 2 hits a  ⇔  h/a < (2/3)(hits/K)
      bool bad = BigInt(3) * h * K < BigInt(2) * X.hits * a;
      if (bad && (!worst || Rational(h) / a < Rational(worst->second) / worst->first)) worst = std::make_pair(a, h);
    }
    if (worst) {
      rep.hypothesis_failures.push_back(
          HypothesisFailure{pp.faces, K, ratio(X.hits, K), find_sub(X, pp.polyad, o, worst->first, worst->second)});
    } else if (opt.mode != Mode::Exact) {
      undecided = true;
    }
  }
  rep.hypothesis = !rep.hypothesis_failures.empty() ? Verdict::NotRegular
                                                    : (undecided ? Verdict::Undecided : Verdict::Regular);

  // conclusion: E_k(P) ∪ V_k(P) perfectly ⟨2√δ⟩-regular on the axis-k auxiliary graph
  AuxGraphView aux = aux_graph(H, k);
  auto class_of = [&](uint32_t v) {
    size_t c = 0;
    while (c + 1 < k && v >= cs.offset(c + 1)) ++c;
    return c;
  };
  auto to_aux = [&](const std::vector<uint32_t>& set) {
    std::vector<uint32_t> local(set.size());
    for (size_t i = 0; i < set.size(); ++i) local[i] = static_cast<uint32_t>(set[i] - cs.offset(class_of(set[i])));
    return static_cast<uint32_t>(aux.encode_left(local));
  };
  std::vector<size_t> e_ids = E_i(P, cs, k), v_ids = V_i(P, cs, k);
  std::vector<std::vector<uint32_t>> left, right;
  for (size_t ci : e_ids) {
    std::vector<uint32_t> cell;
    if (P.arity() == 1) {
      for (uint32_t v : P.p1().cell(ci)) cell.push_back(to_aux({v}));
    } else {
      const UniformSet& e = P.layer(P.arity()).at(ci).edges;
      for (uint64_t c : e.codes()) cell.push_back(to_aux(e.decode(c)));
    }
    std::sort(cell.begin(), cell.end());
    left.push_back(std::move(cell));
  }
  for (size_t ci : v_ids) {
    std::vector<uint32_t> cell;
    for (uint32_t v : P.p1().cell(ci)) cell.push_back(static_cast<uint32_t>(v - cs.offset(k - 1)));
    right.push_back(std::move(cell));
  }
  bool c_undecided = false;
  for (size_t x = 0; x < left.size(); ++x)
    for (size_t y = 0; y < right.size(); ++y) {
      ++rep.pairs;
      BipartiteGraph g = induced(aux.graph, left[x], right[y]);
      int64_t a = rep.threshold.ceil_mul(Rational(left[x].size()));
      int64_t b = rep.threshold.ceil_mul(Rational(right[y].size()));
      if (a > int64_t(left[x].size()) || b > int64_t(right[y].size())) continue;  // no qualifying subsets
      CheckOptions o;
      o.mode = opt.mode;
      o.cap = opt.cap;
      o.seed = seed_for(opt.seed, "reduction/pair/" + std::to_string(x) + "/" + std::to_string(y));
      auto pv = is_delta_regular_pair_sizes(g, static_cast<uint32_t>(std::max<int64_t>(a, 1)),
                                            static_cast<uint32_t>(std::max<int64_t>(b, 1)), o);
      if (!pv.regular)
        rep.conclusion_failures.push_back(ConclusionFailure{e_ids[x], v_ids[y], std::move(pv)});
      else if (!pv.decided)
        c_undecided = true;
    }
  rep.conclusion = !rep.conclusion_failures.empty() ? Verdict::NotRegular
                                                    : (c_undecided ? Verdict::Undecided : Verdict::Regular);

  if (rep.hypothesis == Verdict::NotRegular)
    rep.outcome = "hypothesis-failed";
  else if (rep.equitable_checked && !rep.equitable)
    rep.outcome = "not-equitable";
  else if (rep.hypothesis == Verdict::Regular && rep.conclusion == Verdict::Regular)
    rep.outcome = "confirmed";
  else if (rep.hypothesis == Verdict::Regular && rep.conclusion == Verdict::NotRegular)
    rep.outcome = "violated";
  else
    rep.outcome = "undecided";
  return rep;
}

// ---- serialization ----

namespace {

json sub_json(const SubPolyad& s) {
  json parts = json::array();
  for (const auto& p : s.S.parts) {
    json edges = json::array();
    for (uint64_t c : p.codes()) edges.push_back(p.decode(c));
    parts.push_back(edges);
  }
  return json{{"cliques", s.cliques}, {"in_H", s.in_H}, {"density", to_string(s.density)}, {"parts", parts}};
}

json verdict_json(const PolyadVerdict& v) {
  json j{{"regular", v.regular},       {"decided", v.decided},
         {"vacuous", v.vacuous},       {"cliques", v.cliques},
         {"in_H", v.in_H},             {"density", to_string(v.density)},
         {"min_density", to_string(v.min_density)}, {"max_density", to_string(v.max_density)},
         {"enumerated", v.enumerated.str()}};
  if (v.witness) j["witness"] = sub_json(*v.witness);
  if (v.witness_high) j["witness_high"] = sub_json(*v.witness_high);
  return j;
}

json rationals(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

}  // namespace

std::string to_json(const PolyadVerdict& v) { return verdict_json(v).dump(2); }

std::string to_json(const PartitionVerdict& v) {
  json irr = json::array();
  for (const auto& p : v.irregular)
    irr.push_back(json{{"faces", p.faces}, {"cliques", p.cliques}, {"verdict", verdict_json(p.verdict)}});
  return json{{"verdict", to_string(v.verdict)},
              {"irregular_mass", v.irregular_mass.str()},
              {"undecided_mass", v.undecided_mass.str()},
              {"budget", to_string(v.budget)},
              {"polyads", v.polyads},
              {"irregular", irr}}
      .dump(2);
}

std::string to_json(const DenseCountReport& r) {
  return json{{"k", r.k},
              {"d", rationals(r.d)},
              {"cliques", r.cliques},
              {"predicted", to_string(r.predicted)},
              {"lower", to_string(r.lower)},
              {"upper", to_string(r.upper)},
              {"within_band", r.within_band},
              {"slack", to_string(r.slack)},
              {"top_edges", r.top_edges},
              {"exceptional_edges", r.exceptional_edges},
              {"per_edge_predicted", to_string(r.per_edge_predicted)},
              {"exceptional_fraction", to_string(r.exceptional_fraction)},
              {"per_edge_within", r.per_edge_within}}
      .dump(2);
}

std::string to_json(const SlicingReport& r) {
  json layers = json::array();
  for (const auto& L : r.layers)
    layers.push_back(json{{"rank", L.rank},
                          {"classes", L.class_subset},
                          {"eps_P", to_string(L.eps_P)},
                          {"eps_Q", to_string(L.eps_Q)},
                          {"P_ok", L.P_ok},
                          {"Q_ok", L.Q_ok}});
  return json{{"d", rationals(r.d)},          {"d0", to_string(r.d0)},
              {"f_d0", to_string(r.f_d0)},    {"fstar_d0", to_string(r.fstar_d0)},
              {"f_bound", r.f_bound},         {"hypothesis", r.hypothesis},
              {"conclusion", r.conclusion},   {"identity", r.identity},
              {"layers", layers}}
      .dump(2);
}

std::string to_json(const ReductionReport& r) {
  json hyp = json::array();
  for (const auto& h : r.hypothesis_failures)
    hyp.push_back(json{{"faces", h.faces}, {"cliques", h.cliques}, {"density", to_string(h.density)},
                       {"witness", sub_json(h.witness)}});
  json con = json::array();
  for (const auto& c : r.conclusion_failures) {
    json w;
    if (c.verdict.witness)
      w = json{{"A", c.verdict.witness->A}, {"B", c.verdict.witness->B}, {"edges", c.verdict.witness->edges},
               {"ratio", to_string(c.verdict.witness->ratio)}};
    con.push_back(json{{"e_cell", c.e_cell}, {"v_cluster", c.v_cluster}, {"witness", w}});
  }
  return json{{"equitable_checked", r.equitable_checked},
              {"equitable", r.equitable},
              {"equitable_detail", r.equitable_detail},
              {"hypothesis", to_string(r.hypothesis)},
              {"hypothesis_failures", hyp},
              {"conclusion", to_string(r.conclusion)},
              {"conclusion_failures", con},
              {"polyads", r.polyads},
              {"pairs", r.pairs},
              {"threshold", r.threshold.str()},
              {"outcome", r.outcome}}
      .dump(2);
}

}  // namespace regbound
