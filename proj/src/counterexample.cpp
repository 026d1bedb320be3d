#include "regbound/counterexample.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <thread>

namespace regbound {

using nlohmann::json;

// ---- convex decomposition ----

std::vector<ConvexTerm> convex_decompose(const std::vector<Rational>& x) {
  Rational norm = 0;
  for (const auto& v : x) {
    require(v >= 0 && v <= 1, "convex_decompose needs entries in [0,1]");
    norm += v;
  }
  require(denominator(norm) == 1, "convex_decompose needs an integral ℓ1 norm, got " + to_string(norm));
  // Lay the entries end to end on [0, ‖x‖₁); for θ ∈ [0,1) pick every entry whose interval holds a point of θ + ℤ.
  size_t n = x.size();
  std::vector<Rational> c(n + 1, Rational(0));
  for (size_t i = 0; i < n; ++i) c[i + 1] = c[i] + x[i];
  auto frac = [](const Rational& r) { return Rational(r - Rational(floor_big(r))); };
  std::vector<Rational> cuts{Rational(0), Rational(1)};
  for (const auto& ci : c) cuts.push_back(frac(ci));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<ConvexTerm> out;
  for (size_t l = 0; l + 1 < cuts.size(); ++l) {
    const Rational& theta = cuts[l];
    ConvexTerm t;
    t.weight = cuts[l + 1] - theta;
    t.y.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
      Rational j = Rational(ceil_big(c[i] - theta));
      t.y[i] = theta + j < c[i + 1] ? 1 : 0;
    }
    // merge identical vectors so the identity case yields one term
    auto same = std::find_if(out.begin(), out.end(), [&](const ConvexTerm& o) { return o.y == t.y; });
    if (same != out.end())
      same->weight += t.weight;
    else
      out.push_back(std::move(t));
  }
  return out;
}

// ---- parameters ----

Rational CounterexampleParams::k_lower() const { return 64 / (delta * delta * q()); }
Rational CounterexampleParams::k_upper() const { return pow(delta, 3) / (4 * q() * q()); }

std::vector<std::string> CounterexampleParams::violations() const {
  std::vector<std::string> v;
  if (p > pow(delta, 5) / 1000) v.push_back("p <= 10^-3 δ^5");
  if (k_lower() > k_upper()) v.push_back("the k-window [64δ^-2 q^-1, δ^3 q^-2 / 4] is empty");
  if (Rational(k) < k_lower()) v.push_back("k >= 64 δ^-2 q^-1");
  if (Rational(k) > k_upper()) v.push_back("k <= δ^3 q^-2 / 4");
  return v;
}

void CounterexampleParams::validate() const {
  require(delta > 0 && delta <= 1, "δ must lie in (0,1]");
  require(p > 0 && q() <= 1, "need 0 < p and q = 3p <= 1");
  require(k >= 1 && m >= 1, "k and m must be positive");
  require(max_attempts >= 1, "need at least one attempt");
  if (!relaxed) {
    auto v = violations();
    if (!v.empty()) {
      std::string msg = "parameters break the proven window:";
      for (const auto& s : v) msg += " [" + s + "]";
      fail(ErrorCode::Usage, msg + " (use relaxed mode)");
    }
  }
  if (k > max_class)
    fail(ErrorCode::Resource, "k = " + std::to_string(k) + " exceeds the materialization limit " + std::to_string(max_class));
  require(uint64_t(k) * m <= (uint64_t(1) << 20), "blown-up class too large");
}

std::string CounterexampleParams::to_json() const {
  return json{{"delta", regbound::to_string(delta)},
              {"p", regbound::to_string(p)},
              {"k", k},
              {"m", m},
              {"seed", seed},
              {"relaxed", relaxed},
              {"max_attempts", max_attempts},
              {"audit_samples", audit_samples},
              {"max_class", max_class}}
      .dump(2);
}

CounterexampleParams CounterexampleParams::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Usage, std::string("counterexample params: ") + e.what());
  }
  require(j.is_object(), "counterexample params must be a JSON object");
  CounterexampleParams p;
  auto rational_field = [&](const char* key, Rational& dst) {
    if (!j.contains(key)) return;
    const auto& v = j[key];
    if (v.is_string())
      dst = parse_rational(v.get<std::string>());
    else if (v.is_number_integer())
      dst = Rational(v.get<int64_t>());
    else
      fail(ErrorCode::Usage, std::string("field ") + key + " must be a rational string");
  };
  try {
    rational_field("delta", p.delta);
    rational_field("p", p.p);
    if (j.contains("k")) p.k = j["k"].get<uint32_t>();
    if (j.contains("m")) p.m = j["m"].get<uint32_t>();
    if (j.contains("seed")) p.seed = j["seed"].get<uint64_t>();
    if (j.contains("relaxed")) p.relaxed = j["relaxed"].get<bool>();
    if (j.contains("max_attempts")) p.max_attempts = j["max_attempts"].get<uint32_t>();
    if (j.contains("audit_samples")) p.audit_samples = j["audit_samples"].get<uint64_t>();
    if (j.contains("max_class")) p.max_class = j["max_class"].get<uint32_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Usage, std::string("counterexample params: ") + e.what());
  }
  return p;
}

// ---- triangles ----

namespace {

// Triangles through each middle vertex v ∈ V2: common neighbours in V3 of u ∈ N1(v) and v.
uint64_t triangles_through(const Tripartite& g, uint32_t v, const BipartiteGraph& g12t) {
  uint64_t n = 0;
  const uint64_t* nv = g[2].row(v);
  for (uint32_t u = 0; u < g[0].left_size(); ++u)
    if (bits::test(g12t.row(v), u)) n += bits::and_count(g[1].row(u), nv, g[1].words());
  return n;
}

void check_shapes(const Tripartite& g) {
  require(g[0].left_size() == g[1].left_size(), "V1 sizes differ");
  require(g[0].right_size() == g[2].left_size(), "V2 sizes differ");
  require(g[1].right_size() == g[2].right_size(), "V3 sizes differ");
}

}  // namespace

uint64_t count_triangles(const Tripartite& g) {
  check_shapes(g);
  BipartiteGraph g12t = g[0].transposed();
  uint32_t n2 = g[0].right_size();
  unsigned threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  if (n2 < 256 || threads == 1) {
    uint64_t total = 0;
    for (uint32_t v = 0; v < n2; ++v) total += triangles_through(g, v, g12t);
    return total;
  }
  std::vector<std::future<uint64_t>> parts;
  for (unsigned t = 0; t < threads; ++t)
    parts.push_back(std::async(std::launch::async, [&, t] {
      uint64_t s = 0;
      for (uint32_t v = n2 * t / threads; v < n2 * (t + 1) / threads; ++v) s += triangles_through(g, v, g12t);
      return s;
    }));
  uint64_t total = 0;
  for (auto& p : parts) total += p.get();
  return total;
}

std::vector<std::array<uint32_t, 3>> list_triangles(const Tripartite& g) {
  check_shapes(g);
  std::vector<std::array<uint32_t, 3>> out;
  for (uint32_t u = 0; u < g[0].left_size(); ++u)
    for (uint32_t v = 0; v < g[0].right_size(); ++v) {
      if (!g[0].has_edge(u, v)) continue;
      for (uint32_t w = 0; w < g[1].right_size(); ++w)
        if (g[1].has_edge(u, w) && g[2].has_edge(v, w)) out.push_back({u, v, w});
    }
  return out;
}

// ---- construction ----

namespace {

Rational worst_deviation(const BipartiteGraph& g, const CounterexampleParams& P, Rng& rng) {
  uint32_t k = g.left_size();
  uint32_t lo = static_cast<uint32_t>(std::clamp<int64_t>(ceil_to_i64(P.delta * k), 1, k));
  Rational q = P.q(), worst = 0;
  for (uint64_t s = 0; s < P.audit_samples; ++s) {
    uint32_t a = lo + static_cast<uint32_t>(rng.below(k - lo + 1));
    uint32_t b = lo + static_cast<uint32_t>(rng.below(k - lo + 1));
    auto S = rng.sample_subset(k, a);
    auto T = rng.sample_subset(g.right_size(), b);
    Rational d = density_between(g, S, T);
    Rational dev = d > q ? Rational((d - q) / q) : Rational((q - d) / q);
    worst = std::max(worst, dev);
  }
  return worst;
}

// d(S,T) ≥ (1-δ) d(V_a,V_b) at the exact threshold sizes on every pair, default cap.
bool pair_property(const BipartiteGraph& g, const Rational& delta, const CheckOptions& opt,
                   bool* decided = nullptr) {
  Rational d = g.density();
  if (decided) *decided = true;
  if (d == 0) return true;
  auto s = minimal_subset_reduction(g, delta);
  auto ex = density_extremes(g, s.a, s.b, opt);
  bool holds = Rational(ex.min_edges) >= (1 - delta) * d * s.a * s.b;
  if (decided) *decided = opt.mode == Mode::Exact || !holds;
  return holds;
}

bool base_property(const Tripartite& g, const Rational& delta) {
  for (const auto& gp : g)
    if (!pair_property(gp, delta, CheckOptions{})) return false;
  return true;
}

}  // namespace

CounterexampleInstance build_triangle_free(const CounterexampleParams& params) {
  params.validate();
  CounterexampleInstance inst;
  inst.params = params;
  inst.audit.guaranteed = params.violations().empty();
  uint32_t k = params.k;
  Rational q = params.q();
  Rational tri_bound = pow(params.delta, 3) * k * k * q;
  std::optional<CounterexampleInstance> fallback;
  for (uint32_t attempt = 0; attempt < params.max_attempts; ++attempt) {
    Rng rng(seed_for(params.seed, "counterexample/sample/" + std::to_string(attempt)));
    Tripartite g{BipartiteGraph(k, k), BipartiteGraph(k, k), BipartiteGraph(k, k)};
    for (auto& gp : g)
      for (uint32_t u = 0; u < k; ++u)
        for (uint32_t v = 0; v < k; ++v)
          if (rng.coin(q)) gp.set_edge(u, v);
    AttemptRecord rec;
    rec.triangles = count_triangles(g);
    rec.triangle_bound = Rational(rec.triangles) < tri_bound;
    Rng audit_rng(seed_for(params.seed, "counterexample/audit/" + std::to_string(attempt)));
    for (const auto& gp : g) rec.worst_deviation = std::max(rec.worst_deviation, worst_deviation(gp, params, audit_rng));
    rec.density_audit = rec.worst_deviation <= params.delta / 3;

    std::array<Rational, 3> before;
    for (size_t i = 0; i < 3; ++i) before[i] = g[i].density();
    std::vector<DeletionRecord> dels;
    std::array<uint64_t, 3> per{};
    for (const auto& t : list_triangles(g)) {
      std::array<std::array<uint32_t, 2>, 3> ends{{{t[0], t[1]}, {t[0], t[2]}, {t[1], t[2]}}};
      bool intact = true;
      for (size_t i = 0; i < 3; ++i) intact = intact && g[i].has_edge(ends[i][0], ends[i][1]);
      if (!intact) continue;
      uint32_t pick = 0;
      for (uint32_t i = 1; i < 3; ++i)
        if (per[i] < per[pick]) pick = i;
      g[pick].set_edge(ends[pick][0], ends[pick][1], false);
      ++per[pick];
      dels.push_back(DeletionRecord{t, pick});
    }
    rec.post_density = true;
    for (const auto& gp : g) rec.post_density = rec.post_density && gp.density() >= params.p;
    rec.accepted = params.relaxed ? rec.post_density : (rec.triangle_bound && rec.density_audit && rec.post_density);
    inst.audit.attempts.push_back(rec);
    if (!rec.accepted) continue;
    CounterexampleInstance cand = inst;
    cand.base = g;
    cand.audit.deletions = std::move(dels);
    cand.audit.deletions_per_pair = per;
    cand.audit.kept_attempt = attempt;
    cand.audit.density_before = before;
    for (size_t i = 0; i < 3; ++i) cand.audit.density_after[i] = g[i].density();
    // relaxed mode keeps sampling for an instance that also has the base property
    bool done = !params.relaxed;
    if (!done) {
      try {
        done = base_property(g, params.delta);
        cand.audit.property_found = done;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Resource) throw;
        done = true;  // too large to check exactly; keep the sample
      }
    }
    if (done || !fallback) fallback = std::move(cand);
    if (done) break;
  }
  if (fallback) {
    auto attempts = std::move(inst.audit.attempts);
    inst = std::move(*fallback);
    inst.audit.attempts = std::move(attempts);
    for (size_t i = 0; i < 3; ++i) inst.blown[i] = blowup(inst.base[i], params.m);
    return inst;
  }
  fail(ErrorCode::Resource, "no accepted sample within " + std::to_string(params.max_attempts) + " attempts");
}

// ---- verification ----

bool CounterexampleReport::ok() const {
  bool structural = triangle_free && density_at_least_p && blowup_density_equal &&
                    (!blowup_checked || (blowup_exact && blowup_bound));
  return structural && (!guaranteed || (property_all() && property_decided));
}

namespace {

// Σ_{u∈S', v∈T'} A[u][v] for binary indicator vectors
uint64_t bilinear(const BipartiteGraph& A, const std::vector<uint8_t>& s, const std::vector<uint8_t>& t) {
  uint64_t n = 0;
  for (uint32_t u = 0; u < A.left_size(); ++u)
    if (s[u])
      for (uint32_t v = 0; v < A.right_size(); ++v) n += t[v] && A.has_edge(u, v);
  return n;
}

}  // namespace

CounterexampleReport verify_counterexample(const CounterexampleInstance& inst, const CheckOptions& opt,
                                           uint32_t blowup_samples) {
  const auto& P = inst.params;
  CounterexampleReport rep;
  rep.base_triangles = count_triangles(inst.base);
  rep.blown_triangles = count_triangles(inst.blown);
  rep.triangle_free = rep.base_triangles == 0 && rep.blown_triangles == 0;
  rep.density_at_least_p = rep.blowup_density_equal = true;
  for (size_t i = 0; i < 3; ++i) {
    rep.base_density[i] = inst.base[i].density();
    rep.blown_density[i] = inst.blown[i].density();
    rep.density_at_least_p = rep.density_at_least_p && rep.base_density[i] >= P.p;
    rep.blowup_density_equal = rep.blowup_density_equal && rep.base_density[i] == rep.blown_density[i];
  }
  // base property at the exact threshold size; larger subsets average over these
  rep.guaranteed = P.violations().empty();
  for (size_t i = 0; i < 3; ++i) {
    CheckOptions o = opt;
    o.seed = seed_for(opt.seed, "counterexample/property/" + std::to_string(i));
    bool decided = true;
    rep.property[i] = pair_property(inst.base[i], P.delta, o, &decided);
    rep.property_decided = rep.property_decided && decided;
    rep.star_regular[i] = inst.base[i].density() == 0 || is_delta_regular_pair(inst.base[i], P.delta, o).regular;
  }
  // blowup: |S| = |T| = δmk needs δk integral
  Rational dk = P.delta * P.k;
  rep.blowup_checked = denominator(dk) == 1 && blowup_samples > 0;
  rep.blowup_exact = rep.blowup_bound = true;
  if (rep.blowup_checked) {
    uint32_t m = P.m, k = P.k;
    uint32_t size = static_cast<uint32_t>(to_i64(numerator(dk))) * m;
    Rng rng(seed_for(opt.seed, "counterexample/blowup"));
    for (uint32_t sidx = 0; sidx < blowup_samples; ++sidx) {
      uint32_t pair = sidx % 3;
      const auto& A = inst.base[pair];
      const auto& G = inst.blown[pair];
      auto S = rng.sample_subset(k * m, size);
      auto T = rng.sample_subset(k * m, size);
      std::vector<Rational> s(k, Rational(0)), t(k, Rational(0));
      for (uint32_t x : S) s[x / m] += Rational(1) / m;
      for (uint32_t y : T) t[y / m] += Rational(1) / m;
      auto sd = convex_decompose(s), td = convex_decompose(t);
      BlowupSample bs;
      bs.pair = pair;
      bs.direct = edges_between(G, S, T);
      bs.s_terms = sd.size();
      bs.t_terms = td.size();
      Rational d = A.density(), sum = 0;
      bs.terms_bound = true;
      for (const auto& a : sd)
        for (const auto& b : td) {
          uint64_t e = bilinear(A, a.y, b.y);
          sum += a.weight * b.weight * e;
          uint64_t na = std::count(a.y.begin(), a.y.end(), 1), nb = std::count(b.y.begin(), b.y.end(), 1);
          bs.terms_bound = bs.terms_bound && Rational(e) >= (1 - P.delta) * d * na * nb;
        }
      bs.via_decomposition = sum * m * m;
      bs.bound = Rational(bs.direct) >= (1 - P.delta) * G.density() * size * size;
      bs.implied = rep.property[pair];
      rep.blowup_exact = rep.blowup_exact && bs.via_decomposition == Rational(bs.direct);
      if (bs.implied) rep.blowup_bound = rep.blowup_bound && bs.bound && bs.terms_bound;
      rep.blowup.push_back(std::move(bs));
    }
  }
  return rep;
}

// ---- serialization ----

std::string audit_json(const CounterexampleInstance& inst) {
  json attempts = json::array();
  for (const auto& a : inst.audit.attempts)
    attempts.push_back(json{{"triangles", a.triangles},
                            {"triangle_bound", a.triangle_bound},
                            {"density_audit", a.density_audit},
                            {"worst_deviation", to_string(a.worst_deviation)},
                            {"post_density", a.post_density},
                            {"accepted", a.accepted}});
  json dels = json::array();
  for (const auto& d : inst.audit.deletions) dels.push_back(json{{"triangle", d.triangle}, {"pair", d.pair}});
  json table = json::array();
  for (size_t i = 0; i < 3; ++i)
    table.push_back(json{{"pair", kPairClasses[i]},
                         {"before", to_string(inst.audit.density_before[i])},
                         {"after", to_string(inst.audit.density_after[i])},
                         {"deletions", inst.audit.deletions_per_pair[i]}});
  return json{{"guaranteed", inst.audit.guaranteed},
              {"property_found", inst.audit.property_found},
              {"kept_attempt", inst.audit.kept_attempt},
              {"attempts", attempts},
              {"deletions", dels},
              {"densities", table}}
      .dump(2);
}

std::string to_json(const CounterexampleReport& r) {
  json dens = json::array();
  for (size_t i = 0; i < 3; ++i)
    dens.push_back(json{{"pair", kPairClasses[i]},
                        {"base", to_string(r.base_density[i])},
                        {"blown", to_string(r.blown_density[i])},
                        {"property", r.property[i]},
                        {"star_regular", r.star_regular[i]}});
  json samples = json::array();
  for (const auto& b : r.blowup)
    samples.push_back(json{{"pair", b.pair},
                           {"direct", b.direct},
                           {"via_decomposition", to_string(b.via_decomposition)},
                           {"terms_bound", b.terms_bound},
                           {"implied", b.implied},
                           {"bound", b.bound},
                           {"s_terms", b.s_terms},
                           {"t_terms", b.t_terms}});
  return json{{"ok", r.ok()},
              {"base_triangles", r.base_triangles},
              {"blown_triangles", r.blown_triangles},
              {"triangle_free", r.triangle_free},
              {"density_at_least_p", r.density_at_least_p},
              {"blowup_density_equal", r.blowup_density_equal},
              {"property_decided", r.property_decided},
              {"property_all", r.property_all()},
              {"guaranteed", r.guaranteed},
              {"pairs", dens},
              {"blowup_checked", r.blowup_checked},
              {"blowup_exact", r.blowup_exact},
              {"blowup_bound", r.blowup_bound},
              {"blowup_samples", samples}}
      .dump(2);
}

void save_counterexample(const CounterexampleInstance& inst, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  auto put = [&](const std::string& name, const std::string& body) {
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot write " + name);
    os << body;
  };
  static const char* names[3] = {"12", "13", "23"};
  for (size_t i = 0; i < 3; ++i) {
    std::ostringstream b, g;
    write_text(b, to_kgraph(inst.base[i]));
    write_text(g, to_kgraph(inst.blown[i]));
    put(std::string("base_") + names[i] + ".txt", b.str());
    put(std::string("blown_") + names[i] + ".txt", g.str());
  }
  put("params.json", inst.params.to_json() + "\n");
  put("audit.json", audit_json(inst) + "\n");
}

CounterexampleInstance load_counterexample(const std::string& dir) {
  namespace fs = std::filesystem;
  auto get = [&](const std::string& name) {
    std::ifstream is(fs::path(dir) / name, std::ios::binary);
    if (!is) fail(ErrorCode::Io, "cannot read " + (fs::path(dir) / name).string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  auto inst = build_triangle_free(CounterexampleParams::from_json(get("params.json")));
  static const char* names[3] = {"12", "13", "23"};
  for (size_t i = 0; i < 3; ++i) {
    for (bool base : {true, false}) {
      std::string name = std::string(base ? "base_" : "blown_") + names[i] + ".txt";
      std::istringstream is(get(name));
      if (!(read_text(is) == to_kgraph(base ? inst.base[i] : inst.blown[i])))
        fail(ErrorCode::Verification, name + " differs from the graph rebuilt from params.json");
    }
  }
  return inst;
}

}  // namespace regbound
