// Independent brute-force oracles shared by the unit and acceptance tests.
#pragma once

#include "regbound/graphs.hpp"

#include <cstdint>
#include <vector>

namespace oracle {

inline regbound::BipartiteGraph random_graph(uint32_t l, uint32_t r, const regbound::Rational& p, uint64_t seed) {
  regbound::BipartiteGraph g(l, r);
  regbound::Rng rng(seed);
  for (uint32_t u = 0; u < l; ++u)
    for (uint32_t v = 0; v < r; ++v)
      if (rng.coin(p)) g.set_edge(u, v);
  return g;
}

inline std::vector<std::vector<uint32_t>> subsets_of_size(uint32_t n, uint32_t k) {
  std::vector<std::vector<uint32_t>> out;
  for (uint32_t mask = 0; mask < (1u << n); ++mask)
    if (static_cast<uint32_t>(__builtin_popcount(mask)) == k) {
      std::vector<uint32_t> s;
      for (uint32_t i = 0; i < n; ++i)
        if (mask >> i & 1) s.push_back(i);
      out.push_back(s);
    }
  return out;
}

inline uint64_t count_edges(const regbound::BipartiteGraph& g, uint32_t smask, uint32_t tmask) {
  uint64_t e = 0;
  for (uint32_t u = 0; u < g.left_size(); ++u)
    if (smask >> u & 1)
      for (uint32_t v = 0; v < g.right_size(); ++v)
        if ((tmask >> v & 1) && g.has_edge(u, v)) ++e;
  return e;
}

// Smallest admissible subset size: ceil(δn), at least 1.
inline uint32_t min_size(const regbound::Rational& delta, uint32_t n) {
  uint32_t k = 0;
  while (regbound::Rational(k) < delta * n) ++k;
  return k == 0 && n > 0 ? 1 : k;
}

// ⟨δ⟩-regular iff every A' ⊆ A, B' ⊆ B of all sizes ≥ δ|A|, δ|B| has d(A',B') ≥ d(A,B)/2.
// Walks every mask pair, no size reduction. Sides ≤ 10.
inline bool naive_delta_regular(const regbound::BipartiteGraph& g, const regbound::Rational& delta) {
  uint32_t L = g.left_size(), R = g.right_size();
  uint64_t e = 0;
  for (uint32_t u = 0; u < L; ++u)
    for (uint32_t v = 0; v < R; ++v) e += g.has_edge(u, v);
  if (e == 0) return true;
  uint32_t a = min_size(delta, L), b = min_size(delta, R);
  for (uint32_t s = 1; s < (1u << L); ++s) {
    uint32_t sa = __builtin_popcount(s);
    if (sa < a) continue;
    for (uint32_t t = 1; t < (1u << R); ++t) {
      uint32_t tb = __builtin_popcount(t);
      if (tb < b) continue;
      // d(S,T) < d/2  ⇔  2·e(S,T)·|A||B| < e·|S||T|
      if (2 * count_edges(g, s, t) * L * R < e * sa * tb) return false;
    }
  }
  return true;
}

// min and max e(S,T) over |S| = a, |T| = b.
inline std::pair<uint64_t, uint64_t> naive_extremes(const regbound::BipartiteGraph& g, uint32_t a, uint32_t b) {
  uint64_t lo = UINT64_MAX, hi = 0;
  for (uint32_t s = 0; s < (1u << g.left_size()); ++s) {
    if (static_cast<uint32_t>(__builtin_popcount(s)) != a) continue;
    for (uint32_t t = 0; t < (1u << g.right_size()); ++t) {
      if (static_cast<uint32_t>(__builtin_popcount(t)) != b) continue;
      uint64_t e = count_edges(g, s, t);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
  }
  return {lo, hi};
}

// Triangles of a tripartite graph given as three pair adjacencies.
inline uint64_t naive_triangles(const regbound::BipartiteGraph& g12, const regbound::BipartiteGraph& g13,
                                const regbound::BipartiteGraph& g23) {
  uint64_t t = 0;
  for (uint32_t a = 0; a < g12.left_size(); ++a)
    for (uint32_t b = 0; b < g12.right_size(); ++b)
      if (g12.has_edge(a, b))
        for (uint32_t c = 0; c < g13.right_size(); ++c) t += g13.has_edge(a, c) && g23.has_edge(b, c);
  return t;
}

}  // namespace oracle
