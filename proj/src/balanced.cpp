#include "regbound/balanced.hpp"

#include <algorithm>
#include <boost/integer/common_factor_rt.hpp>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace regbound {

void BalanceSpec::validate(bool uniform) const {
  for (const auto& c : X.cells())
    if (c.size() % 2) fail(ErrorCode::Usage, "X-cells must have even size");
  for (const auto& c : Y.cells())
    if (c.size() % 2) fail(ErrorCode::Usage, "Y-cells must have even size");
  for (size_t f = 0; f < F.size(); ++f) {
    const auto& m = F[f];
    require(std::is_sorted(m.begin(), m.end()), "F-members must be sorted");
    std::vector<uint32_t> covered;
    for (uint32_t y : m) {
      if (y >= Y.ground_size()) fail(ErrorCode::Usage, "F-member leaves 𝐘");
      const auto& cell = Y.cell(Y.cell_of(y));
      if (cell.front() == y) covered.insert(covered.end(), cell.begin(), cell.end());
    }
    std::sort(covered.begin(), covered.end());
    if (covered != m) fail(ErrorCode::Usage, "F-member " + std::to_string(f) + " is not a union of Y-cells");
  }
  if (!uniform) return;
  for (const auto& c : X.cells())
    if (c.size() != X.cell(0).size()) fail(ErrorCode::Usage, "X-cells differ in size");
  for (const auto& m : F)
    if (m.size() != F.front().size()) fail(ErrorCode::Usage, "F-members differ in size");
}

std::string condition_name(unsigned index) {
  static const char* names[] = {"(i) equitable", "(ii) beta-balanced", "(iii) pseudorandom", "(iv) complement-closed"};
  return index < 4 ? names[index] : "?";
}

bool BalanceReport::passed(unsigned mask) const {
  for (unsigned c = 0; c < 4; ++c)
    if ((mask >> c) & 1u)
      if (!cond[c].checked || !cond[c].passed) return false;
  return true;
}

int BalanceReport::first_violated() const {
  for (unsigned c = 0; c < 4; ++c)
    if (cond[c].checked && !cond[c].passed) return static_cast<int>(c + 1);
  return 0;
}

std::string BalanceReport::summary() const {
  std::ostringstream os;
  for (unsigned c = 0; c < 4; ++c) {
    if (c) os << "; ";
    os << condition_name(c) << ": ";
    if (!cond[c].checked) os << "skipped";
    else os << (cond[c].passed ? "pass" : "FAIL") << (cond[c].exact ? "" : " (sampled)");
    if (!cond[c].detail.empty()) os << " [" << cond[c].detail << "]";
  }
  return os.str();
}

namespace {
// Rows of 𝐘 restricted to one X-cell, packed over the cell's positions.
struct CellRows {
  size_t words = 0;
  std::vector<uint64_t> data;
  const uint64_t* row(uint32_t y) const { return data.data() + size_t(y) * words; }
};

CellRows project(const BipartiteGraph& g, const std::vector<uint32_t>& cell) {
  CellRows cr;
  cr.words = bits::words_for(cell.size());
  cr.data.assign(size_t(g.right_size()) * cr.words, 0);
  for (uint32_t pos = 0; pos < cell.size(); ++pos) {
    const uint64_t* r = g.row(cell[pos]);
    for (uint32_t y = 0; y < g.right_size(); ++y)
      if (bits::test(r, y)) bits::set(cr.data.data() + size_t(y) * cr.words, pos);
  }
  return cr;
}

// Largest c with c ≤ (1+α)|X|/4.
uint64_t codegree_limit(const Radical& alpha, uint64_t xsize) {
  uint64_t c = 0;
  while (c < xsize && alpha.compare(Rational(4 * (c + 1), xsize) - 1) >= 0) ++c;
  return c;
}

void note(ConditionStatus& st, const std::string& what) {
  st.passed = false;
  ++st.violations;
  if (st.detail.empty()) st.detail = what;
}
}  // namespace

BalanceReport verify_balanced(const BipartiteGraph& g, const BalanceSpec& spec, const BalanceCheckOptions& opt) {
  if (spec.X.ground_size() != g.left_size() || spec.Y.ground_size() != g.right_size())
    fail(ErrorCode::Usage, "balance spec does not match the graph sides");
  spec.validate(false);
  BalanceReport rep;
  const uint32_t nY = g.right_size();
  bool need_cells = (opt.mask & (kEquitable | kPseudorandom)) != 0;

  if (need_cells) {
    auto& ci = rep.cond[0];
    auto& ciii = rep.cond[2];
    ci.checked = (opt.mask & kEquitable) != 0;
    ciii.checked = (opt.mask & kPseudorandom) != 0;
    std::map<uint64_t, uint64_t> limits;
    // (iii) depends only on (X, y, y'): test each pair covered by some F once, remembering one such F
    std::vector<std::tuple<uint32_t, uint32_t, uint32_t>> pairs;
    if (ciii.checked) {
      std::vector<char> seen(size_t(nY) * nY, 0);
      for (uint32_t f = 0; f < spec.F.size(); ++f) {
        const auto& m = spec.F[f];
        for (size_t a = 0; a < m.size(); ++a)
          for (size_t b = a + 1; b < m.size(); ++b) {
            char& s = seen[size_t(m[a]) * nY + m[b]];
            if (!s) {
              s = 1;
              pairs.emplace_back(m[a], m[b], f);
            }
          }
      }
    }
    for (size_t xc = 0; xc < spec.X.size(); ++xc) {
      const auto& cell = spec.X.cell(xc);
      CellRows cr = project(g, cell);
      if (ci.checked && !(opt.early_exit && !ci.passed)) {
        for (uint32_t y = 0; y < nY; ++y) {
          ++ci.tested;
          uint64_t d = bits::count(cr.row(y), cr.words);
          if (2 * d != cell.size()) {
            note(ci, "y=" + std::to_string(y) + " has " + std::to_string(d) + " neighbors in X-cell " +
                         std::to_string(xc) + " of size " + std::to_string(cell.size()));
            if (opt.early_exit) break;
          }
        }
      }
      if (ciii.checked && !(opt.early_exit && !ciii.passed)) {
        auto li = limits.find(cell.size());
        if (li == limits.end()) li = limits.emplace(cell.size(), codegree_limit(spec.alpha, cell.size())).first;
        const uint64_t lim = li->second;
        for (const auto& [a, b, f] : pairs) {
          ++ciii.tested;
          uint64_t c = bits::and_count(cr.row(a), cr.row(b), cr.words);
          if (c > lim) {
            note(ciii, "codegree " + std::to_string(c) + " > " + std::to_string(lim) + " for y=" + std::to_string(a) +
                           ",y'=" + std::to_string(b) + " in X-cell " + std::to_string(xc) + ", F " + std::to_string(f));
            if (opt.early_exit) break;
          }
        }
      }
    }
  }

  if (opt.mask & kBalanced) {
    auto& st = rep.cond[1];
    st.checked = true;
    const uint32_t nX = g.left_size();
    uint64_t pairs = nX < 2 ? 0 : uint64_t(nX) * (nX - 1) / 2;
    for (size_t f = 0; f < spec.F.size() && !(opt.early_exit && !st.passed); ++f) {
      const auto& m = spec.F[f];
      Bits mask = Bits::from_indices(nY, m);
      uint64_t lim = static_cast<uint64_t>(floor_to_i64((Rational(1, 2) + spec.beta) * Rational(m.size())));
      auto test = [&](uint32_t x, uint32_t x2) {
        ++st.tested;
        uint64_t diff = 0;
        const uint64_t *r1 = g.row(x), *r2 = g.row(x2);
        for (size_t w = 0; w < g.words(); ++w)
          diff += static_cast<uint64_t>(__builtin_popcountll((r1[w] ^ r2[w]) & mask.data()[w]));
        uint64_t agree = m.size() - diff;
        if (agree > lim) {
          note(st, "x=" + std::to_string(x) + ",x'=" + std::to_string(x2) + " agree on " + std::to_string(agree) +
                       " > " + std::to_string(lim) + " vertices of F " + std::to_string(f));
          return false;
        }
        return true;
      };
      if (pairs * m.size() <= opt.pair_cap) {
        for (uint32_t x = 0; x < nX && !(opt.early_exit && !st.passed); ++x)
          for (uint32_t x2 = x + 1; x2 < nX; ++x2)
            if (!test(x, x2) && opt.early_exit) break;
      } else {
        st.exact = false;
        Rng rng(seed_for(opt.seed, "balanced/ii/" + std::to_string(f)));
        uint64_t draws = std::max<uint64_t>(1, opt.pair_cap / std::max<size_t>(1, m.size()));
        for (uint64_t d = 0; d < draws; ++d) {
          uint32_t x = static_cast<uint32_t>(rng.below(nX)), x2 = static_cast<uint32_t>(rng.below(nX - 1));
          if (x2 >= x) ++x2;
          if (!test(std::min(x, x2), std::max(x, x2)) && opt.early_exit) break;
        }
      }
    }
  }

  if (opt.mask & kComplementClosed) {
    auto& st = rep.cond[3];
    st.checked = true;
    BipartiteGraph t = g.transposed();  // rows: y -> N(y) ⊆ 𝐗
    const size_t W = t.words();
    const uint32_t nX = g.left_size();
    uint64_t tail = nX % 64 ? (uint64_t(1) << (nX % 64)) - 1 : ~uint64_t(0);
    std::vector<uint32_t> phi(nY, UINT32_MAX);
    std::vector<uint64_t> comp(W);
    for (size_t yc = 0; yc < spec.Y.size() && !(opt.early_exit && !st.passed); ++yc) {
      const auto& cell = spec.Y.cell(yc);
      std::unordered_map<uint64_t, std::vector<uint32_t>> by_hash;
      for (uint32_t y : cell) by_hash[fnv1a64(t.row(y), W * 8)].push_back(y);
      for (uint32_t y : cell) {
        if (phi[y] != UINT32_MAX) continue;
        ++st.tested;
        for (size_t w = 0; w < W; ++w) comp[w] = ~t.row(y)[w];
        if (W) comp[W - 1] &= tail;
        uint32_t partner = UINT32_MAX;
        auto it = by_hash.find(fnv1a64(comp.data(), W * 8));
        if (it != by_hash.end())
          for (uint32_t c : it->second)
            if (c != y && phi[c] == UINT32_MAX && std::equal(comp.begin(), comp.end(), t.row(c))) {
              partner = c;
              break;
            }
        if (partner == UINT32_MAX) {
          note(st, "y=" + std::to_string(y) + " has no complementary partner in Y-cell " + std::to_string(yc));
          if (opt.early_exit) break;
          continue;
        }
        phi[y] = partner;
        phi[partner] = y;
      }
    }
    if (st.passed) rep.phi = std::move(phi);
  }
  return rep;
}

BalancedGraph sample_candidate(const BalanceSpec& spec, uint64_t seed) {
  spec.validate(false);
  const uint32_t nX = static_cast<uint32_t>(spec.X.ground_size()), nY = static_cast<uint32_t>(spec.Y.ground_size());
  BalancedGraph out;
  out.graph = BipartiteGraph(nX, nY);
  out.phi.assign(nY, UINT32_MAX);
  Rng rng(seed);
  std::vector<uint32_t> scratch;
  for (const auto& cell : spec.Y.cells()) {
    size_t half = cell.size() / 2;
    for (size_t j = 0; j < half; ++j) {
      uint32_t y = cell[j], y2 = cell[half + j];
      out.phi[y] = y2;
      out.phi[y2] = y;
      for (const auto& xc : spec.X.cells()) {
        scratch = xc;
        size_t take = scratch.size() / 2;
        for (size_t i = 0; i < take; ++i) std::swap(scratch[i], scratch[i + rng.below(scratch.size() - i)]);
        for (size_t i = 0; i < take; ++i) out.graph.set_edge(scratch[i], y);
      }
      for (uint32_t x = 0; x < nX; ++x) out.graph.set_edge(x, y2, !out.graph.has_edge(x, y));
    }
  }
  out.attempts = 1;
  return out;
}

BalancedGraph sample_balanced(const BalanceSpec& spec, uint64_t seed, uint32_t max_retries, unsigned enforce,
                              const BalanceCheckOptions& check) {
  require(max_retries >= 1, "max_retries must be at least 1");
  std::array<uint32_t, 4> failures{};
  BalanceCheckOptions opt = check;
  opt.mask = check.mask | enforce;
  for (uint32_t a = 0; a < max_retries; ++a) {
    BalancedGraph cand = sample_candidate(spec, seed_for(seed, "attempt/" + std::to_string(a)));
    opt.seed = seed_for(seed, "check/" + std::to_string(a));
    cand.report = verify_balanced(cand.graph, spec, opt);
    for (unsigned c = 0; c < 4; ++c)
      if (cand.report.cond[c].checked && !cand.report.cond[c].passed) ++failures[c];
    if (cand.report.passed(enforce)) {
      cand.attempts = a + 1;
      cand.failures = failures;
      return cand;
    }
  }
  unsigned worst = 0;
  for (unsigned c = 1; c < 4; ++c)
    if (failures[c] > failures[worst]) worst = c;
  fail(ErrorCode::Verification, "balanced sampler exhausted " + std::to_string(max_retries) +
                                    " attempts; most frequent failure: " + condition_name(worst) + " (" +
                                    std::to_string(failures[worst]) + " times)");
}

namespace {
struct CommonWeights {
  std::vector<int64_t> num;
  int64_t den = 1, max_num = 0;
};

CommonWeights common_weights(const std::vector<Rational>& lambda) {
  BigInt den = 1;
  Rational sum = 0;
  for (const auto& l : lambda) {
    if (l < 0) fail(ErrorCode::Usage, "λ has a negative entry");
    den = boost::integer::lcm(den, BigInt(boost::multiprecision::denominator(l)));
    sum += l;
  }
  if (sum != 1) fail(ErrorCode::Usage, "λ does not sum to 1");
  if (den > BigInt(int64_t(1) << 40)) fail(ErrorCode::Usage, "λ denominators too large");
  CommonWeights cw;
  cw.den = to_i64(den);
  for (const auto& l : lambda) {
    cw.num.push_back(to_i64(boost::multiprecision::numerator(l) * (den / BigInt(boost::multiprecision::denominator(l)))));
    cw.max_num = std::max(cw.max_num, cw.num.back());
  }
  return cw;
}
}  // namespace

OneSixResult check_one_six(const BipartiteGraph& g, const std::vector<Rational>& lambda) {
  if (lambda.size() != g.left_size()) fail(ErrorCode::Usage, "λ length differs from |𝐗|");
  CommonWeights cw = common_weights(lambda);
  OneSixResult res;
  res.threshold = (1 - Rational(cw.max_num, cw.den)) / 8;
  std::vector<uint32_t> support;
  for (uint32_t x = 0; x < lambda.size(); ++x)
    if (cw.num[x]) support.push_back(x);
  // min(in, den-in) >= (den - max)/8  <=>  8·min >= den - max
  for (uint32_t y = 0; y < g.right_size(); ++y) {
    int64_t in = 0;
    for (uint32_t x : support)
      if (g.has_edge(x, y)) in += cw.num[x];
    if (8 * std::min(in, cw.den - in) >= cw.den - cw.max_num) res.qualifying.push_back(y);
  }
  res.bound_holds = 6 * res.qualifying.size() >= g.right_size();
  return res;
}

OneTwelveResult check_one_twelve(const BipartiteGraph& quotient, const std::vector<uint32_t>& family,
                                 const std::vector<uint32_t>& inside, const std::vector<Rational>& lambda,
                                 uint32_t level) {
  if (lambda.size() != quotient.left_size()) fail(ErrorCode::Usage, "λ length differs from |ℒ_i|");
  CommonWeights cw = common_weights(lambda);
  std::vector<char> is_inside(quotient.left_size(), 0);
  int64_t inside_mass = 0;
  for (uint32_t l : inside) {
    if (l >= quotient.left_size()) fail(ErrorCode::Usage, "inside index out of range");
    is_inside[l] = 1;
    inside_mass += cw.num[l];
  }
  int64_t outside_mass = cw.den - inside_mass;
  OneTwelveResult res;
  res.threshold_outside = (1 - Rational(cw.max_num, cw.den)) / 8;
  res.threshold_inside = Rational(1, 2) - Rational(outside_mass, cw.den);
  std::vector<uint32_t> support;
  for (uint32_t x = 0; x < lambda.size(); ++x)
    if (cw.num[x]) support.push_back(x);
  for (uint32_t r : family) {
    if (r >= quotient.right_size()) fail(ErrorCode::Usage, "family index out of range");
    int64_t non_nbr = 0, in_nbr = 0;
    for (uint32_t x : support) {
      if (!quotient.has_edge(x, r)) non_nbr += cw.num[x];
      else if (is_inside[x]) in_nbr += cw.num[x];
    }
    bool first = 8 * non_nbr >= cw.den - cw.max_num;
    bool second = 2 * in_nbr >= cw.den - 2 * outside_mass;
    if (first && second) res.qualifying.push_back(r);
  }
  res.bound_holds = BigInt(6) * (BigInt(1) << level) * res.qualifying.size() >= BigInt(quotient.right_size());
  return res;
}

void write_phi(std::ostream& os, const std::vector<uint32_t>& phi) {
  os << "phi " << phi.size() << '\n';
  for (size_t i = 0; i < phi.size(); ++i) os << phi[i] << (i + 1 == phi.size() || i % 16 == 15 ? '\n' : ' ');
}

std::vector<uint32_t> read_phi(std::istream& is) {
  std::string w;
  size_t n = 0;
  if (!(is >> w >> n) || w != "phi") fail(ErrorCode::Usage, "expected a phi table");
  std::vector<uint32_t> phi(n);
  for (auto& v : phi)
    if (!(is >> v)) fail(ErrorCode::Usage, "truncated phi table");
  for (size_t i = 0; i < n; ++i)
    if (phi[i] >= n || phi[phi[i]] != i) fail(ErrorCode::Usage, "phi table is not an involution");
  return phi;
}

}  // namespace regbound
