// A triangle-free tripartite graph whose class pairs are all ⟨δ⟩-regular: random graph, triangle deletion, blowup.
#pragma once

#include "regbound/common.hpp"
#include "regbound/graphs.hpp"
#include "regbound/regularity.hpp"

#include <array>
#include <string>
#include <vector>

namespace regbound {

struct ConvexTerm {
  Rational weight;
  std::vector<uint8_t> y;  // binary, same ℓ1 norm as x
};
// x ∈ [0,1]^n with integral ℓ1 norm as a convex combination of binary vectors; Usage otherwise.
std::vector<ConvexTerm> convex_decompose(const std::vector<Rational>& x);

struct CounterexampleParams {
  Rational delta = rat(1, 2);
  Rational p = rat(1, 15);
  uint32_t k = 12;  // vertices per class of the base graph
  uint32_t m = 1;   // blowup factor
  uint64_t seed = 0;
  bool relaxed = false;          // allow parameters outside the proven window
  uint32_t max_attempts = 64;    // resampling budget
  uint64_t audit_samples = 256;  // random (S,T) per pair for the density-deviation audit
  uint32_t max_class = 4096;     // largest base class materialized

  Rational q() const { return 3 * p; }
  Rational k_lower() const;  // 64 δ^-2 q^-1
  Rational k_upper() const;  // (1/4) δ^3 q^-2
  std::vector<std::string> violations() const;  // broken conditions of the proven window
  void validate() const;     // Usage when broken and not relaxed; Resource when k exceeds max_class
  std::string to_json() const;
  static CounterexampleParams from_json(const std::string& text);
};

// Pair-classes in order (1,2), (1,3), (2,3); graphs indexed as [0] = V1×V2, [1] = V1×V3, [2] = V2×V3.
using Tripartite = std::array<BipartiteGraph, 3>;
constexpr std::array<std::array<uint32_t, 2>, 3> kPairClasses{{{0, 1}, {0, 2}, {1, 2}}};

uint64_t count_triangles(const Tripartite& g);
std::vector<std::array<uint32_t, 3>> list_triangles(const Tripartite& g);  // lexicographic

struct AttemptRecord {
  uint64_t triangles = 0;
  bool triangle_bound = false;  // triangles < δ³k²q
  bool density_audit = false;   // sampled d(S,T) = (1 ± δ/3) q
  Rational worst_deviation;     // max |d(S,T)/q - 1| seen
  bool post_density = false;    // every pair keeps density ≥ p after deletion
  bool accepted = false;
};

struct DeletionRecord {
  std::array<uint32_t, 3> triangle{};
  uint32_t pair = 0;
};

struct CounterexampleAudit {
  std::vector<AttemptRecord> attempts;
  std::vector<DeletionRecord> deletions;
  std::array<uint64_t, 3> deletions_per_pair{};
  std::array<Rational, 3> density_before, density_after;
  bool guaranteed = false;  // parameters inside the proven window
  bool property_found = false;  // relaxed mode: the accepted sample also passed the exact base property
  uint32_t kept_attempt = 0;    // index into attempts of the sample returned
};

struct CounterexampleInstance {
  CounterexampleParams params;
  Tripartite base;
  Tripartite blown;
  CounterexampleAudit audit;
};

CounterexampleInstance build_triangle_free(const CounterexampleParams& params);

struct BlowupSample {
  uint32_t pair = 0;
  uint64_t direct = 0;        // e(S,T) counted in the blowup
  Rational via_decomposition; // m² Σ α_i β_j s_iᵀ A t_j
  bool terms_bound = false;   // every s_iᵀ A t_j ≥ (1-δ) d ‖s_i‖‖t_j‖
  bool bound = false;         // e(S,T) ≥ (1-δ) d |S||T|
  bool implied = false;       // the base property of this pair implies both bounds; false when it fails
  size_t s_terms = 0, t_terms = 0;
};

struct CounterexampleReport {
  uint64_t base_triangles = 0, blown_triangles = 0;
  bool triangle_free = false;
  std::array<Rational, 3> base_density, blown_density;
  bool density_at_least_p = false;
  bool blowup_density_equal = false;
  // d(S,T) ≥ (1-δ) d(V_a,V_b) for |S|,|T| ≥ δk on the base graph
  std::array<bool, 3> property{};
  bool property_decided = true;
  std::array<bool, 3> star_regular{};  // regularity module's ⟨δ⟩ pair check on the base pairs
  bool blowup_checked = false;
  std::vector<BlowupSample> blowup;
  bool blowup_exact = false;  // decomposition equals direct count on every sample
  bool blowup_bound = false;  // bounds hold on every sample whose pair has the base property
  bool guaranteed = false;    // parameters inside the proven window, so the property is required
  bool property_all() const { return property[0] && property[1] && property[2]; }
  bool ok() const;
};

// mode selects exact or sampled subset search for the base property.
CounterexampleReport verify_counterexample(const CounterexampleInstance& inst, const CheckOptions& opt = {},
                                           uint32_t blowup_samples = 50);

std::string audit_json(const CounterexampleInstance& inst);
std::string to_json(const CounterexampleReport& r);
// Base and blown pair graphs in the k-graph text format, audit.json and params.json.
void save_counterexample(const CounterexampleInstance& inst, const std::string& dir);
// Rebuilds from params.json; Verification when a stored graph differs from the rebuild.
CounterexampleInstance load_counterexample(const std::string& dir);

}  // namespace regbound
