#include "regbound/core.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace regbound {

using nlohmann::json;
namespace fs = std::filesystem;

// ---- profile ----
std::vector<uint64_t> GrowthProfile::L_sizes() const {
  std::vector<uint64_t> out;
  for (uint32_t i = 0; i < s; ++i) {
    Rational ex = Rational(R_sizes.at(i)) / e.at(i);
    if (boost::multiprecision::denominator(ex) != 1) fail(ErrorCode::Usage, "|R_i|/e(i) must be an integer");
    int64_t x = to_i64(boost::multiprecision::numerator(ex));
    if (x < 1 || x > 31) fail(ErrorCode::Resource, "|L_" + std::to_string(i + 1) + "| = 2^" + std::to_string(x) + " is out of range");
    out.push_back(uint64_t(1) << x);
  }
  return out;
}

uint64_t GrowthProfile::L_ground() const { return L_sizes().back() * blowup_left; }
uint64_t GrowthProfile::R_ground() const { return R_sizes.back() * blowup_right; }

Radical GrowthProfile::alpha_at(uint32_t level) const {
  require(level >= 1 && level <= s, "alpha level out of range");
  if (level <= alpha.size() && alpha[level - 1]) return Radical::of(*alpha[level - 1]);
  return Radical(1, Rational(1) / Rational(L_sizes()[level - 1]), 6);
}

void GrowthProfile::validate() const {
  if (s < 1) fail(ErrorCode::Usage, "profile needs s >= 1");
  if (R_sizes.size() != s || e.size() != s) fail(ErrorCode::Usage, "profile lists must have s entries");
  if (!alpha.empty() && alpha.size() != s) fail(ErrorCode::Usage, "alpha list must be empty or have s entries");
  if (blowup_left < 1 || blowup_right < 1) fail(ErrorCode::Usage, "blowup factors must be positive");
  for (uint32_t i = 0; i < s; ++i) {
    if (!is_power_of_two(R_sizes[i]) || R_sizes[i] < 2) fail(ErrorCode::Usage, "|R_i| must be a power of two >= 2");
    if (e[i] <= 0) fail(ErrorCode::Usage, "e(i) must be positive");
    if (i && R_sizes[i] < 2 * R_sizes[i - 1]) fail(ErrorCode::Usage, "each R_i must strictly refine R_{i-1}");
    if (quadrupling && i && R_sizes[i] < 4 * R_sizes[i - 1]) fail(ErrorCode::Usage, "quadrupling requires |R_{i+1}| >= 4|R_i|");
  }
  auto L = L_sizes();
  for (uint32_t i = 0; i < s; ++i) {
    uint64_t prev = i ? L[i - 1] : 1;
    if (L[i] < 2 * prev) fail(ErrorCode::Usage, "each L_i must strictly refine L_{i-1}");
  }
  if (L_ground() * R_ground() > (uint64_t(1) << 34)) fail(ErrorCode::Resource, "vertex-level graphs exceed 2^34 cells");
  if (strict) {
    for (uint32_t i = 0; i < s; ++i)
      if (e[i] != Rational(BigInt(1) << (i + 11)))
        fail(ErrorCode::Usage, "strict mode requires e(i) = 2^(i+10)");
    fail(ErrorCode::Usage, "strict mode requires |R_1| >= 2^200, which is not representable at desk scale");
  }
  for (uint32_t i = 1; i <= s; ++i)
    if (alpha_at(i).compare(Rational(0)) <= 0) fail(ErrorCode::Usage, "alpha must be positive");
}

GrowthProfile GrowthProfile::desk() {
  GrowthProfile p;
  p.s = 3;
  p.R_sizes = {8, 32, 128};
  p.e = {2, 4, 8};
  p.alpha = {Rational(3, 4), Rational(3, 4), Rational(1, 2)};
  return p;
}

namespace {
Rational json_rational(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<int64_t>());
  if (j.is_number()) return parse_rational(j.dump());
  fail(ErrorCode::Usage, "expected a rational, got " + j.dump());
}

unsigned parse_mask(const json& j) {
  unsigned m = 0;
  for (const auto& c : j) {
    std::string s = c.get<std::string>();
    if (s == "i") m |= kEquitable;
    else if (s == "ii") m |= kBalanced;
    else if (s == "iii") m |= kPseudorandom;
    else if (s == "iv") m |= kComplementClosed;
    else fail(ErrorCode::Usage, "unknown condition '" + s + "'");
  }
  return m;
}

json mask_json(unsigned m) {
  json a = json::array();
  const char* names[] = {"i", "ii", "iii", "iv"};
  for (unsigned c = 0; c < 4; ++c)
    if ((m >> c) & 1u) a.push_back(names[c]);
  return a;
}

json profile_json(const GrowthProfile& p) {
  json j;
  j["s"] = p.s;
  j["R_sizes"] = p.R_sizes;
  j["e"] = json::array();
  for (const auto& x : p.e) j["e"].push_back(to_string(x));
  j["alpha"] = json::array();
  for (const auto& a : p.alpha) j["alpha"].push_back(a ? json(to_string(*a)) : json(nullptr));
  j["strict"] = p.strict;
  j["quadrupling"] = p.quadrupling;
  j["blowup_left"] = p.blowup_left;
  j["blowup_right"] = p.blowup_right;
  j["max_retries"] = p.max_retries;
  j["enforce"] = mask_json(p.enforce);
  j["telemetry_pair_cap"] = p.telemetry_pair_cap;
  return j;
}

GrowthProfile profile_from(const json& j) {
  GrowthProfile p;
  try {
    p.s = j.at("s").get<uint32_t>();
    p.R_sizes = j.at("R_sizes").get<std::vector<uint64_t>>();
    for (const auto& x : j.at("e")) p.e.push_back(json_rational(x));
    if (j.contains("alpha"))
      for (const auto& a : j["alpha"]) p.alpha.push_back(a.is_null() ? std::nullopt : std::optional<Rational>(json_rational(a)));
    p.strict = j.value("strict", false);
    p.quadrupling = j.value("quadrupling", false);
    p.blowup_left = j.value("blowup_left", 1u);
    p.blowup_right = j.value("blowup_right", 1u);
    p.max_retries = j.value("max_retries", 200u);
    if (j.contains("enforce")) p.enforce = parse_mask(j["enforce"]);
    p.telemetry_pair_cap = j.value("telemetry_pair_cap", uint64_t(1) << 16);
  } catch (const json::exception& ex) {
    fail(ErrorCode::Usage, std::string("bad profile: ") + ex.what());
  }
  p.validate();
  return p;
}

// Popcount of row bits in [lo, hi).
uint64_t count_range(const uint64_t* row, uint64_t lo, uint64_t hi) {
  uint64_t c = 0;
  while (lo < hi) {
    uint64_t w = lo >> 6, off = lo & 63;
    uint64_t span = std::min<uint64_t>(64 - off, hi - lo);
    uint64_t mask = span == 64 ? ~uint64_t(0) : ((uint64_t(1) << span) - 1) << off;
    c += static_cast<uint64_t>(__builtin_popcountll(row[w] & mask));
    lo += span;
  }
  return c;
}

uint64_t and_count_range(const uint64_t* a, const uint64_t* b, uint64_t lo, uint64_t hi) {
  uint64_t c = 0;
  while (lo < hi) {
    uint64_t w = lo >> 6, off = lo & 63;
    uint64_t span = std::min<uint64_t>(64 - off, hi - lo);
    uint64_t mask = span == 64 ? ~uint64_t(0) : ((uint64_t(1) << span) - 1) << off;
    c += static_cast<uint64_t>(__builtin_popcountll(a[w] & b[w] & mask));
    lo += span;
  }
  return c;
}

// Largest c with 4c <= (1+α)n.
uint64_t codegree_cap(const Radical& alpha, uint64_t n) {
  uint64_t c = 0;
  while (c < n && alpha.compare(Rational(4 * (c + 1), n) - 1) >= 0) ++c;
  return c;
}

void add_failure(std::vector<std::string>& v, const std::string& m) {
  if (v.size() < 16) v.push_back(m);
}
}  // namespace

GrowthProfile GrowthProfile::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    fail(ErrorCode::Usage, std::string("profile is not valid JSON: ") + ex.what());
  }
  return profile_from(j);
}

std::string GrowthProfile::to_json() const { return profile_json(*this).dump(2); }

// ---- sequence ----
uint32_t CoreSequence::L_ancestor(uint32_t j, uint32_t c, uint32_t i) const {
  return static_cast<uint32_t>(c / (L_count(j) / L_count(i)));
}
uint32_t CoreSequence::R_ancestor(uint32_t j, uint32_t c, uint32_t i) const {
  return static_cast<uint32_t>(c / (R_count(j) / R_count(i)));
}
std::vector<uint32_t> CoreSequence::L_children(uint32_t i, uint32_t c) const {
  uint64_t r = L_count(i + 1) / L_count(i);
  std::vector<uint32_t> out(r);
  for (uint64_t k = 0; k < r; ++k) out[k] = static_cast<uint32_t>(c * r + k);
  return out;
}
std::vector<uint32_t> CoreSequence::R_children(uint32_t i, uint32_t c) const {
  uint64_t r = R_count(i + 1) / R_count(i);
  std::vector<uint32_t> out(r);
  for (uint64_t k = 0; k < r; ++k) out[k] = static_cast<uint32_t>(c * r + k);
  return out;
}

BipartiteGraph CoreSequence::member_graph(uint32_t j, uint32_t member) const {
  return blowup(quotient(j, member), static_cast<uint32_t>(L_ground() / L_count(j)),
                static_cast<uint32_t>(R_ground() / R_count(j)));
}

std::vector<uint32_t> neighbor_family(const CoreSequence& seq, uint32_t i, uint32_t L, uint32_t member) {
  if (i < 1 || i > seq.s()) fail(ErrorCode::Usage, "neighbor_family: level out of range");
  const BipartiteGraph& prev = seq.quotient(i - 1, member);
  if (L >= prev.left_size()) fail(ErrorCode::Usage, "neighbor_family: L out of range");
  std::vector<uint32_t> out;
  for (uint32_t R = 0; R < prev.right_size(); ++R)
    if (prev.has_edge(L, R))
      for (uint32_t c : seq.R_children(i - 1, R)) out.push_back(c);
  return out;
}

CoreSequence build_core_sequence(const GrowthProfile& profile, uint64_t seed) {
  profile.validate();
  CoreSequence seq;
  seq.profile = profile;
  seq.seed = seed;
  CoreLevel base;
  base.quotients.emplace_back(1, 1);
  base.quotients[0].set_edge(0, 0);
  seq.levels.push_back(std::move(base));
  auto Ls = profile.L_sizes();
  for (uint32_t i = 1; i <= profile.s; ++i) {
    CoreLevel lv;
    lv.level = i;
    lv.L_count = Ls[i - 1];
    lv.R_count = profile.R_sizes[i - 1];
    lv.alpha = profile.alpha_at(i);
    const CoreLevel& prev = seq.levels.back();
    uint64_t rL = lv.L_count / prev.L_count, rR = lv.R_count / prev.R_count;
    BalanceSpec spec;
    spec.X = VertexPartition::blocks(lv.L_count, prev.L_count);
    spec.Y = VertexPartition::blocks(lv.R_count, prev.R_count);
    spec.alpha = lv.alpha;
    spec.beta = Rational(1, 16);
    for (uint32_t b = 0; b < prev.quotients.size(); ++b) {
      spec.F.clear();
      for (uint32_t L = 0; L < prev.L_count; ++L) spec.F.push_back(neighbor_family(seq, i, L, b));
      uint64_t gseed = seed_for(seed, "core/level/" + std::to_string(i) + "/member/" + std::to_string(b));
      BalanceCheckOptions chk;
      chk.mask = profile.enforce;
      BalancedGraph bg = sample_balanced(spec, gseed, profile.max_retries, profile.enforce, chk);
      if (profile.telemetry_pair_cap) {
        BalanceCheckOptions tel;
        tel.mask = kBalanced;
        tel.early_exit = false;
        tel.pair_cap = profile.telemetry_pair_cap;
        tel.seed = seed_for(gseed, "telemetry");
        lv.telemetry.push_back(verify_balanced(bg.graph, spec, tel));
      }
      const BipartiteGraph& pq = prev.quotients[b];
      BipartiteGraph in(static_cast<uint32_t>(lv.L_count), static_cast<uint32_t>(lv.R_count)), out = in;
      for (uint32_t Lp = 0; Lp < lv.L_count; ++Lp) {
        const uint64_t* prow = pq.row(static_cast<uint32_t>(Lp / rL));
        for (uint32_t Rp = 0; Rp < lv.R_count; ++Rp)
          if (bits::test(prow, Rp / rR)) (bg.graph.has_edge(Lp, Rp) ? in : out).set_edge(Lp, Rp);
      }
      lv.quotients.push_back(std::move(in));
      lv.quotients.push_back(std::move(out));
      lv.gammas.push_back(std::move(bg));
      lv.gamma_seeds.push_back(gseed);
    }
    seq.levels.push_back(std::move(lv));
  }
  return seq;
}

StructureReport verify_structure(const CoreSequence& seq) {
  StructureReport rep;
  const uint64_t nL = seq.L_ground(), nR = seq.R_ground();
  std::vector<BipartiteGraph> cur{seq.member_graph(0, 0)};
  for (uint32_t j = 0; j <= seq.s(); ++j) {
    uint64_t bl = nL / seq.L_count(j), br = nR / seq.R_count(j);
    for (uint32_t b = 0; b < cur.size(); ++b) {
      const BipartiteGraph& G = cur[b];
      if (G.edge_count() << j != nL * nR) {
        rep.equitable = false;
        add_failure(rep.failures, "level " + std::to_string(j) + " member " + std::to_string(b) + " has " +
                                      std::to_string(G.edge_count()) + " edges");
      }
      for (uint64_t Lc = 0; Lc < seq.L_count(j) && rep.blowup; ++Lc)
        for (uint64_t Rc = 0; Rc < seq.R_count(j); ++Rc) {
          uint64_t e = 0;
          for (uint64_t u = Lc * bl; u < (Lc + 1) * bl; ++u) e += count_range(G.row(static_cast<uint32_t>(u)), Rc * br, (Rc + 1) * br);
          if (e != 0 && e != bl * br) {
            rep.blowup = false;
            add_failure(rep.failures, "level " + std::to_string(j) + " member " + std::to_string(b) + ": d(L" +
                                          std::to_string(Lc) + ",R" + std::to_string(Rc) + ") not in {0,1}");
            break;
          }
        }
    }
    if (j == seq.s()) break;
    std::vector<BipartiteGraph> next;
    for (uint32_t b = 0; b < (2u << j); ++b) next.push_back(seq.member_graph(j + 1, b));
    for (uint32_t b = 0; b < cur.size(); ++b) {
      const BipartiteGraph &c1 = next[2 * b], &c2 = next[2 * b + 1], &G = cur[b];
      bool ok = true;
      for (uint32_t u = 0; u < nL && ok; ++u)
        for (size_t w = 0; w < G.words(); ++w)
          if ((c1.row(u)[w] & c2.row(u)[w]) || ((c1.row(u)[w] | c2.row(u)[w]) != G.row(u)[w])) {
            ok = false;
            break;
          }
      if (!ok) {
        rep.chain = false;
        add_failure(rep.failures, "level " + std::to_string(j) + " member " + std::to_string(b) +
                                      " is not the disjoint union of its two children");
      }
    }
    cur = std::move(next);
  }
  for (uint32_t i = 1; i <= seq.s(); ++i) {
    uint64_t want = seq.R_count(i) >> (i - 1);
    for (uint32_t b = 0; b < seq.levels[i - 1].quotients.size(); ++b)
      for (uint32_t L = 0; L < seq.L_count(i - 1); ++L) {
        auto fam = neighbor_family(seq, i, L, b);
        if (fam.size() != want) {
          rep.family_sizes = false;
          add_failure(rep.failures, "|N_" + std::to_string(i) + "(L" + std::to_string(L) + ")| = " +
                                        std::to_string(fam.size()) + ", expected " + std::to_string(want));
        }
      }
  }
  return rep;
}

CorePropertiesReport verify_core_properties(const CoreSequence& seq, uint32_t i, std::optional<uint32_t> only_L) {
  if (i < 1 || i > seq.s()) fail(ErrorCode::Usage, "verify_core_properties: level out of range");
  CorePropertiesReport rep;
  const uint64_t nL = seq.L_ground(), nR = seq.R_ground();
  const uint64_t blp = nL / seq.L_count(i - 1), brp = nR / seq.R_count(i - 1);
  const uint64_t lim_n = seq.L_count(i) / seq.L_count(i - 1);
  const uint64_t lim = codegree_cap(seq.levels[i].alpha, lim_n);
  for (uint32_t b = 0; b < seq.levels[i - 1].quotients.size(); ++b) {
    const BipartiteGraph& parent = seq.quotient(i - 1, b);
    for (uint32_t c : {2 * b, 2 * b + 1}) {
      BipartiteGraph G = seq.member_graph(i, c);
      BipartiteGraph Gt = G.transposed();
      BipartiteGraph Qt = seq.quotient(i, c).transposed();  // rows: ℛ_i cells over ℒ_i
      for (uint32_t u = 0; u < nL; ++u)
        if (G.degree(u) << i != nR) {
          rep.item1 = false;
          add_failure(rep.failures, "member " + std::to_string(c) + ": vertex u" + std::to_string(u) + " has degree " +
                                        std::to_string(G.degree(u)));
          break;
        }
      for (uint32_t v = 0; v < nR; ++v)
        if (Gt.degree(v) << i != nL) {
          rep.item1 = false;
          add_failure(rep.failures, "member " + std::to_string(c) + ": vertex v" + std::to_string(v) + " has degree " +
                                        std::to_string(Gt.degree(v)));
          break;
        }
      for (uint32_t L = 0; L < seq.L_count(i - 1); ++L) {
        if (only_L && *only_L != L) continue;
        for (uint32_t R = 0; R < seq.R_count(i - 1); ++R) {
          if (!parent.has_edge(L, R)) continue;
          ++rep.blocks_checked;
          bool ok = true;
          for (uint64_t u = L * blp; u < (L + 1) * blp && ok; ++u)
            ok = 2 * count_range(G.row(static_cast<uint32_t>(u)), R * brp, (R + 1) * brp) == brp;
          for (uint64_t v = R * brp; v < (R + 1) * brp && ok; ++v)
            ok = 2 * count_range(Gt.row(static_cast<uint32_t>(v)), L * blp, (L + 1) * blp) == blp;
          if (!ok) {
            rep.item1 = false;
            add_failure(rep.failures, "member " + std::to_string(c) + ": G_i[L" + std::to_string(L) + ",R" +
                                          std::to_string(R) + "] is not biregular of density 1/2");
          }
        }
        auto fam = neighbor_family(seq, i, L, b);
        uint64_t lo = L * lim_n, hi = lo + lim_n;
        for (size_t x = 0; x < fam.size(); ++x)
          for (size_t y = x + 1; y < fam.size(); ++y) {
            ++rep.pairs_checked;
            uint64_t cd = and_count_range(Qt.row(fam[x]), Qt.row(fam[y]), lo, hi);
            if (cd > lim) {
              rep.item2 = false;
              add_failure(rep.failures, "member " + std::to_string(c) + ": codegree of R'" + std::to_string(fam[x]) +
                                            ",R'" + std::to_string(fam[y]) + " inside L" + std::to_string(L) + " is " +
                                            std::to_string(cd) + " > " + std::to_string(lim));
            }
          }
      }
    }
  }
  return rep;
}

DegreeReport verify_degree_property(const CoreSequence& seq, uint32_t ell, uint32_t member, uint32_t i, uint32_t L,
                                    uint32_t R) {
  if (ell < 1 || ell > seq.s() || i < 1 || i > ell) fail(ErrorCode::Usage, "need 1 <= i <= ell <= s");
  DegreeReport rep;
  uint32_t anc = CoreSequence::member_ancestor(ell, member, i);
  rep.precondition = seq.quotient(i, anc).has_edge(L, R);
  if (!rep.precondition) return rep;
  uint64_t bl = seq.L_ground() / seq.L_count(i), br = seq.R_ground() / seq.R_count(i);
  // 2^i · 2^-ell · |R|
  uint64_t num = br << i;
  if (num % (uint64_t(1) << ell)) fail(ErrorCode::Usage, "2^i p |R| is not an integer for this profile");
  rep.expected = num >> ell;
  BipartiteGraph G = seq.member_graph(ell, member);
  rep.ok = true;
  for (uint64_t u = L * bl; u < (L + 1) * bl; ++u) {
    uint64_t d = count_range(G.row(static_cast<uint32_t>(u)), R * br, (R + 1) * br);
    if (d != rep.expected) {
      rep.ok = false;
      add_failure(rep.failures, "u" + std::to_string(u) + " has " + std::to_string(d) + " neighbors in R");
    }
  }
  return rep;
}

QuasirandomReport verify_quasirandomness(const CoreSequence& seq, uint32_t ell, uint32_t member,
                                         const CheckOptions& opt) {
  if (ell < 1 || ell > seq.s()) fail(ErrorCode::Usage, "ell out of range");
  QuasirandomReport rep;
  BipartiteGraph G = seq.member_graph(ell, member);
  BipartiteGraph T = G.transposed();
  const uint64_t nL = G.left_size(), nR = G.right_size();
  rep.p = Rational(1) / Rational(uint64_t(1) << ell);
  rep.biregular = true;
  for (uint32_t u = 0; u < nL; ++u) rep.biregular = rep.biregular && (uint64_t(G.degree(u)) << ell) == nR;
  for (uint32_t v = 0; v < nR; ++v) rep.biregular = rep.biregular && (uint64_t(T.degree(v)) << ell) == nL;
  // scaled by 4^ell so that p²|𝐋| becomes the integer |𝐋|
  const uint64_t scale = uint64_t(1) << (2 * ell);
  BigInt best = 0;
  for (uint32_t v = 0; v < nR; ++v) {
    BigInt sum = 0;
    for (uint32_t w = 0; w < nR; ++w) {
      uint64_t cd = bits::and_count(T.row(v), T.row(w), T.words());
      BigInt x = BigInt(cd) * scale - BigInt(nL);
      if (x > 0) sum += x;
    }
    best = std::max(best, sum);
  }
  rep.max_excess = Rational(best) / Rational(scale);
  rep.alpha_hat = rep.max_excess / (rep.p * rep.p * Rational(nL) * Rational(nR));
  rep.epsilon = Radical(2, rep.alpha_hat, 6);
  rep.full = is_eps_regular_graph(G, rep.epsilon, opt);
  rep.chain_ok = rep.biregular && rep.full.regular;
  return rep;
}

namespace {
struct WitnessContext {
  const CoreSequence& seq;
  uint32_t ell, member, i;
  const BipartiteGraph& G;     // member of 𝒢_ell, vertex level
  const BipartiteGraph& Gi;    // its ancestor in 𝒢_i, vertex level
  const VertexPartition& Lprev;  // ℒ_{i-1}
  const VertexPartition& Li;     // ℒ_i
};

WitnessReport witnesses_impl(const WitnessContext& cx, const std::vector<uint32_t>& P, const Rational& gamma) {
  const CoreSequence& seq = cx.seq;
  const uint32_t i = cx.i;
  if (P.empty()) fail(ErrorCode::Usage, "P is empty");
  require(std::is_sorted(P.begin(), P.end()) && std::adjacent_find(P.begin(), P.end()) == P.end(),
          "P must be strictly increasing");
  if (P.back() >= seq.L_ground()) fail(ErrorCode::Usage, "P leaves 𝐋");
  int64_t host = beta_host(P, cx.Lprev, Rational(1, 4));
  if (host < 0) fail(ErrorCode::Usage, "precondition fails: P is not 1/4-inside a cell of L_{i-1}");
  if (beta_host(P, cx.Li, gamma) >= 0) fail(ErrorCode::Usage, "precondition fails: P is gamma-inside a cell of L_i");
  WitnessReport rep;
  rep.L = static_cast<uint32_t>(host);
  const uint64_t nLi = seq.L_count(i), bl = seq.L_ground() / nLi, br = seq.R_ground() / seq.R_count(i);
  const uint64_t blp = seq.L_ground() / seq.L_count(i - 1);
  std::vector<uint64_t> cnt(nLi, 0);
  uint64_t outside = 0;
  for (uint32_t u : P) {
    ++cnt[u / bl];
    if (u / blp != rep.L) ++outside;
  }
  uint64_t maxcnt = *std::max_element(cnt.begin(), cnt.end());
  for (uint64_t c : cnt) rep.lambda.push_back(Rational(c) / Rational(P.size()));
  const BipartiteGraph& Qi = seq.quotient(i, CoreSequence::member_ancestor(cx.ell, cx.member, i));
  auto fam = neighbor_family(seq, i, rep.L, CoreSequence::member_ancestor(cx.ell, cx.member, i - 1));
  std::vector<char> in_fam(seq.R_count(i), 0);
  for (uint32_t r : fam) in_fam[r] = 1;
  const uint64_t Psz = P.size();
  for (uint32_t R = 0; R < seq.R_count(i); ++R) {
    uint64_t lo = R * br, hi = lo + br;
    uint64_t ePR = 0;
    for (uint32_t u : P) ePR += count_range(cx.G.row(u), lo, hi);
    // 4·e(P,R) >= 2^i · 2^-ell · |P||R|
    bool prop1 = (BigInt(4 * ePR) << cx.ell) >= (BigInt(Psz) * br << i);
    std::vector<uint32_t> P1;
    for (uint32_t u : P)
      if (!Qi.has_edge(static_cast<uint32_t>(u / bl), R)) P1.push_back(u);
    bool prop2 = Rational(8 * P1.size()) >= gamma * Rational(Psz);
    if (prop2)
      for (uint32_t u : P1)
        if (count_range(cx.G.row(u), lo, hi)) {
          prop2 = false;
          break;
        }
    if (prop1 && prop2) rep.witnesses.push_back({R, std::move(P1), ePR, in_fam[R] != 0});
  }
  // The proof's route: set sizes from vertex-level G_i adjacency, only over 𝔑_i(L).
  std::vector<uint32_t> touched;
  for (uint32_t c = 0; c < nLi; ++c)
    if (cnt[c]) touched.push_back(c);
  for (uint32_t R : fam) {
    uint64_t lo = R * br, hi = lo + br, p1 = 0, p2 = 0;
    for (uint32_t cell : touched) {
      uint64_t e = 0;
      for (uint64_t w = uint64_t(cell) * bl; w < (uint64_t(cell) + 1) * bl && !e; ++w)
        e = count_range(cx.Gi.row(static_cast<uint32_t>(w)), lo, hi);
      if (!e) p1 += cnt[cell];
      else if (uint64_t(cell) * bl / blp == rep.L) p2 += cnt[cell];
    }
    // |P1| >= (1 - ‖λ‖∞)/8 · |P|  and  |P2| >= (1/2 - λ(outside L)) · |P|
    if (8 * p1 >= Psz - maxcnt && 2 * p2 + 2 * outside >= Psz) rep.claim_clusters.push_back(R);
  }
  rep.count_bound = BigInt(6) * (BigInt(1) << i) * rep.claim_clusters.size() >= BigInt(seq.R_count(i));
  return rep;
}
}  // namespace

WitnessReport find_irregularity_witnesses(const CoreSequence& seq, uint32_t ell, uint32_t member, uint32_t i,
                                          const std::vector<uint32_t>& P, const Rational& gamma) {
  if (ell < 1 || ell > seq.s() || i < 1 || i > ell) fail(ErrorCode::Usage, "need 1 <= i <= ell <= s");
  BipartiteGraph G = seq.member_graph(ell, member);
  BipartiteGraph Gi = seq.member_graph(i, CoreSequence::member_ancestor(ell, member, i));
  VertexPartition Lprev = seq.L_partition(i - 1), Li = seq.L_partition(i);
  return witnesses_impl({seq, ell, member, i, G, Gi, Lprev, Li}, P, gamma);
}

Rational default_gamma(const Rational& delta, uint64_t R1) {
  Radical a(32, delta, 2), b(32, Rational(1) / Rational(R1), 6);
  const Radical& m = a.compare(b) >= 0 ? a : b;
  if (m.is_rational()) return m.rational_value();
  const int64_t grid = int64_t(1) << 30;
  int64_t n = m.ceil_mul(Rational(grid));
  return Rational(n - 1, grid);
}

IrregularityCertificate refute_partition(const CoreSequence& seq, uint32_t ell, uint32_t member,
                                         const VertexPartition& P, const VertexPartition& Q, const Rational& delta,
                                         uint32_t t, const RefuteOptions& opt) {
  if (ell < 1 || ell > seq.s() || t < 1 || t > ell) fail(ErrorCode::Usage, "need 1 <= t <= ell <= s");
  if (delta < 0 || delta > Rational(1, 2)) fail(ErrorCode::Usage, "delta must lie in [0, 1/2]");
  if (P.ground_size() != seq.L_ground() || Q.ground_size() != seq.R_ground())
    fail(ErrorCode::Usage, "partitions do not match the ground sets");
  Rational gdef = default_gamma(delta, seq.R_count(1));
  Rational gamma = opt.gamma.value_or(gdef);
  if (gamma <= 0 || gamma > Rational(1, 2)) fail(ErrorCode::Usage, "gamma must lie in (0, 1/2]; the default is " + to_string(gdef));
  if (!refines_beta(Q, seq.R_partition(t), Rational(1, 512)).verdict)
    fail(ErrorCode::Usage, "precondition fails: Q does not 2^-9-refine R_t");
  if (refines_beta(P, VertexPartition::blocks(seq.L_ground(), seq.L_count(t)), gamma).verdict)
    fail(ErrorCode::Usage, "precondition fails: P gamma-refines L_t, nothing to refute");

  BipartiteGraph G = seq.member_graph(ell, member);
  std::vector<VertexPartition> Lp;
  for (uint32_t i = 0; i <= t; ++i) Lp.push_back(seq.L_partition(i));
  IrregularityCertificate cert;
  cert.graph_hash = hex64(content_hash(G));
  cert.graph_label = "core:ell=" + std::to_string(ell) + ",member=" + std::to_string(member);
  cert.left_size = G.left_size();
  cert.right_size = G.right_size();
  cert.edges = G.edge_count();
  cert.delta = delta;
  cert.gamma = gamma;
  cert.p = G.density();
  cert.P = P;
  cert.Q = Q;

  std::map<uint32_t, BipartiteGraph> Gi;
  std::map<uint32_t, std::vector<uint32_t>> rstar;
  std::vector<uint64_t> class_sizes(t + 1, 0);
  uint64_t skipped = 0, thin = 0;
  Rational total = 0;
  for (uint32_t pc = 0; pc < P.size(); ++pc) {
    const auto& cell = P.cell(pc);
    uint32_t level = 0;
    for (uint32_t i = 1; i <= t && !level; ++i) {
      bool in_prev = i == 1 || beta_host(cell, Lp[i - 1], gamma) >= 0;
      if (in_prev && beta_host(cell, Lp[i], gamma) < 0) level = i;
    }
    if (!level) continue;
    ++class_sizes[level];
    if (!Gi.count(level)) {
      Gi.emplace(level, seq.member_graph(level, CoreSequence::member_ancestor(ell, member, level)));
      cert.R_levels[level] = seq.R_partition(level);
      rstar[level] = r_star(Q, cert.R_levels[level]);
    }
    WitnessReport wr;
    try {
      wr = witnesses_impl({seq, ell, member, level, G, Gi.at(level), Lp[level - 1], Lp[level]}, cell, gamma);
    } catch (const Error&) {
      ++skipped;
      continue;
    }
    const auto& rs = rstar[level];
    for (auto& w : wr.witnesses) {
      if (Rational(w.P1.size()) < delta * Rational(cell.size())) {
        ++thin;
        continue;
      }
      const auto& Rc = cert.R_levels[level].cell(w.R);
      std::vector<uint32_t> outside;
      for (uint32_t v : Rc)
        if (!std::binary_search(rs.begin(), rs.end(), v)) outside.push_back(v);
      LedgerLine line;
      line.p_cell = pc;
      line.level = level;
      line.r_cell = w.R;
      line.e_P_R = w.e_P_R;
      line.e_P_R_outside = edges_between(G, cell, outside);
      line.value = ledger_value(gamma, cert.p, level, cell.size(), Rc.size(), line.e_P_R_outside);
      line.P1 = std::move(w.P1);
      if (opt.drop_zero_lines && line.value == 0) continue;
      total += line.value;
      cert.lines.push_back(std::move(line));
    }
  }
  cert.total = total;
  cert.budget = delta * Rational(cert.edges);
  cert.refutes = cert.total > cert.budget;
  cert.notes.push_back("gamma " + to_string(gamma) + (opt.gamma ? " (override; default " + to_string(gdef) + ")" : " (default)"));
  std::string classes = "classes";
  for (uint32_t i = 1; i <= t; ++i) classes += " D" + std::to_string(i) + "=" + std::to_string(class_sizes[i]);
  cert.notes.push_back(classes);
  if (skipped) cert.notes.push_back("cells skipped (not 1/4-inside L_{i-1}): " + std::to_string(skipped));
  if (thin) cert.notes.push_back("witnesses dropped (|P1| < delta|P|): " + std::to_string(thin));
  cert.notes.push_back(std::string("slack ") + to_string(cert.total - cert.budget));
  return cert;
}

// ---- directory layout ----
namespace {
void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream os(p, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot write " + p.string());
  os << bytes;
  if (!os) fail(ErrorCode::Io, "write failed for " + p.string());
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}
}  // namespace

void CoreSequence::save(const std::string& dir) const {
  fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "partitions", ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  json man;
  man["format"] = "regbound-core 1";
  man["seed"] = seed;
  man["profile"] = profile_json(profile);
  man["levels"] = json::array();
  for (const auto& lv : levels) {
    fs::path ld = root / ("level-" + std::to_string(lv.level));
    fs::create_directories(ld, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + ld.string());
    json jl;
    jl["level"] = lv.level;
    jl["L_count"] = lv.L_count;
    jl["R_count"] = lv.R_count;
    jl["alpha"] = lv.level ? lv.alpha.str() : "";
    jl["quotients"] = json::array();
    for (size_t b = 0; b < lv.quotients.size(); ++b) {
      std::string name = "level-" + std::to_string(lv.level) + "/quotient-" + std::to_string(b) + ".rbkg";
      std::ostringstream os;
      write_binary(os, lv.quotients[b]);
      write_file(root / name, os.str());
      jl["quotients"].push_back({{"file", name}, {"hash", hex64(content_hash(lv.quotients[b]))}});
    }
    jl["gammas"] = json::array();
    for (size_t b = 0; b < lv.gammas.size(); ++b) {
      std::string base = "level-" + std::to_string(lv.level) + "/gamma-" + std::to_string(b);
      std::ostringstream os, ps;
      write_binary(os, lv.gammas[b].graph);
      write_file(root / (base + ".rbkg"), os.str());
      write_phi(ps, lv.gammas[b].phi);
      write_file(root / (base + ".phi"), ps.str());
      json jg = {{"file", base + ".rbkg"},
                 {"phi", base + ".phi"},
                 {"seed", lv.gamma_seeds[b]},
                 {"attempts", lv.gammas[b].attempts},
                 {"hash", hex64(content_hash(lv.gammas[b].graph))}};
      if (b < lv.telemetry.size()) jg["telemetry_ii"] = lv.telemetry[b].summary();
      jl["gammas"].push_back(jg);
    }
    for (const char* side : {"L", "R"}) {
      std::ostringstream os;
      write_partition(os, side[0] == 'L' ? L_partition(lv.level) : R_partition(lv.level));
      write_file(root / "partitions" / (std::string(side) + "-" + std::to_string(lv.level) + ".txt"), os.str());
    }
    man["levels"].push_back(jl);
  }
  write_file(root / "manifest.json", man.dump(2) + "\n");
}

CoreSequence CoreSequence::load(const std::string& dir) {
  fs::path root(dir);
  json man;
  try {
    man = json::parse(read_file(root / "manifest.json"));
  } catch (const json::exception& ex) {
    fail(ErrorCode::Usage, std::string("bad core manifest: ") + ex.what());
  }
  if (man.value("format", "") != "regbound-core 1") fail(ErrorCode::Usage, "not a core sequence directory");
  CoreSequence seq;
  seq.profile = profile_from(man.at("profile"));
  seq.seed = man.at("seed").get<uint64_t>();
  for (const auto& jl : man.at("levels")) {
    CoreLevel lv;
    lv.level = jl.at("level").get<uint32_t>();
    lv.L_count = jl.at("L_count").get<uint64_t>();
    lv.R_count = jl.at("R_count").get<uint64_t>();
    if (lv.level) lv.alpha = seq.profile.alpha_at(lv.level);
    for (const auto& q : jl.at("quotients")) {
      std::istringstream is(read_file(root / q.at("file").get<std::string>()));
      BipartiteGraph g = read_binary_bipartite(is);
      if (hex64(content_hash(g)) != q.at("hash").get<std::string>())
        fail(ErrorCode::Verification, "hash mismatch for " + q.at("file").get<std::string>());
      lv.quotients.push_back(std::move(g));
    }
    for (const auto& jg : jl.at("gammas")) {
      BalancedGraph bg;
      std::istringstream is(read_file(root / jg.at("file").get<std::string>()));
      bg.graph = read_binary_bipartite(is);
      if (hex64(content_hash(bg.graph)) != jg.at("hash").get<std::string>())
        fail(ErrorCode::Verification, "hash mismatch for " + jg.at("file").get<std::string>());
      std::istringstream ps(read_file(root / jg.at("phi").get<std::string>()));
      bg.phi = read_phi(ps);
      bg.attempts = jg.value("attempts", 0u);
      lv.gamma_seeds.push_back(jg.at("seed").get<uint64_t>());
      lv.gammas.push_back(std::move(bg));
    }
    if (lv.quotients.size() != (size_t(1) << lv.level)) fail(ErrorCode::Usage, "level has the wrong member count");
    seq.levels.push_back(std::move(lv));
  }
  if (seq.levels.size() != seq.profile.s + 1) fail(ErrorCode::Usage, "manifest level count does not match the profile");
  return seq;
}

}  // namespace regbound
