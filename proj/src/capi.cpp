#include "regbound/regbound.h"

#include "regbound/core.hpp"
#include "regbound/counterexample.hpp"
#include "regbound/hypergraph.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace regbound;

struct rb_core {
  CoreSequence seq;
};
struct rb_hypergraph {
  PastedInstance inst;
};
struct rb_counterexample {
  CounterexampleInstance inst;
};
struct rb_certificate {
  IrregularityCertificate cert;
};

namespace {

thread_local std::string g_error;

template <class F>
rb_status guarded(F&& f) {
  g_error.clear();
  try {
    f();
    return RB_OK;
  } catch (const Error& e) {
    g_error = e.what();
    return static_cast<rb_status>(static_cast<int>(e.code()));
  } catch (const json::exception& e) {
    g_error = std::string("json: ") + e.what();
    return RB_USAGE;
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return RB_RESOURCE;
  } catch (const std::exception& e) {
    g_error = e.what();
    return RB_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::Usage, std::string(what) + " must not be null");
}

CheckOptions check_options(const rb_check_options* o) {
  CheckOptions c;
  if (!o) return c;
  c.mode = o->mode == RB_MODE_SAMPLED ? Mode::Sampled : Mode::Exact;
  if (o->cap) c.cap = o->cap;
  c.seed = o->seed;
  return c;
}

std::string read_all(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct SuiteReport {
  json claims = json::array();
  bool passed = true;
  void add(const std::string& name, bool ok, const std::vector<std::string>& failures = {}) {
    json c = {{"claim", name}, {"passed", ok}};
    if (!failures.empty()) c["failures"] = failures;
    claims.push_back(c);
    passed = passed && ok;
  }
  void finish(const std::string& suite, int* passed_out, char** out, json extra = json::object()) {
    json j = {{"suite", suite}, {"passed", passed}, {"claims", claims}};
    for (auto& [k, v] : extra.items()) j[k] = v;
    if (passed_out) *passed_out = passed ? 1 : 0;
    if (out) *out = dup(j.dump(2));
  }
};

void check_suite(const char* suite, std::initializer_list<const char*> known) {
  need(suite, "suite");
  for (const char* k : known)
    if (std::strcmp(suite, k) == 0) return;
  std::string list;
  for (const char* k : known) list += std::string(list.empty() ? "" : ", ") + k;
  fail(ErrorCode::Usage, std::string("unknown suite '") + suite + "' (known: " + list + ")");
}

// "core:ell=3,member=0"
std::pair<uint32_t, uint32_t> parse_label(const std::string& label) {
  unsigned ell = 0, member = 0;
  if (std::sscanf(label.c_str(), "core:ell=%u,member=%u", &ell, &member) != 2)
    fail(ErrorCode::Usage, "certificate label does not name a core member: " + label);
  return {ell, member};
}

}  // namespace

extern "C" {

const char* rb_version(void) { return "0.1.0"; }
const char* rb_last_error(void) { return g_error.c_str(); }
void rb_string_free(char* s) { std::free(s); }

void rb_check_options_init(rb_check_options* opt) {
  if (!opt) return;
  opt->mode = RB_MODE_EXACT;
  opt->cap = 0;
  opt->seed = 1;
}

rb_status rb_ackermann(uint32_t k, uint64_t n, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(ackermann(k, n).str());
  });
}

rb_status rb_hash_file(const char* path, char** hex) {
  return guarded([&] {
    need(path, "path");
    need(hex, "hex");
    std::string body = read_all(path);
    *hex = dup(hex64(fnv1a64(body.data(), body.size())));
  });
}

rb_status rb_write_run_manifest(const char* dir, const char* command, const char* inputs_json, uint64_t seed,
                                double seconds) {
  return guarded([&] {
    need(dir, "dir");
    need(command, "command");
    json inputs = inputs_json ? json::parse(inputs_json) : json::object();
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file()) {
        std::string rel = fs::relative(e.path(), dir).generic_string();
        if (rel != "run.json") files.push_back(rel);
      }
    std::sort(files.begin(), files.end());
    json hashes = json::object();
    for (const auto& f : files) {
      std::string body = read_all(fs::path(dir) / f);
      hashes[f] = hex64(fnv1a64(body.data(), body.size()));
    }
    json man = {{"command", command},       {"inputs", inputs},       {"seed", seed},
                {"artifacts", hashes},      {"tool_version", rb_version()},
                {"timing_seconds", seconds}};
    std::ofstream os(fs::path(dir) / "run.json");
    if (!os) fail(ErrorCode::Io, std::string("cannot write run.json in ") + dir);
    os << man.dump(2) << "\n";
  });
}

rb_status rb_artifact_kind(const char* dir, char** kind) {
  return guarded([&] {
    need(dir, "dir");
    need(kind, "kind");
    fs::path root(dir);
    if (!fs::is_directory(root)) fail(ErrorCode::Io, std::string("not a directory: ") + dir);
    if (fs::exists(root / "manifest.json")) {
      json m;
      try {
        m = json::parse(read_all(root / "manifest.json"));
      } catch (const json::exception& e) {
        fail(ErrorCode::Usage, std::string("malformed manifest.json: ") + e.what());
      }
      std::string f = m.value("format", "");
      if (f == "regbound-core 1") return void(*kind = dup("core"));
      if (f == "regbound-pasted 1") return void(*kind = dup("hypergraph"));
      fail(ErrorCode::Usage, "unrecognized manifest format '" + f + "'");
    }
    if (fs::exists(root / "params.json") && fs::exists(root / "base_12.txt")) return void(*kind = dup("counterexample"));
    fail(ErrorCode::Usage, std::string("no artifact found in ") + dir);
  });
}

rb_status rb_default_config(const char* which, char** out) {
  return guarded([&] {
    need(which, "which");
    need(out, "out");
    std::string w = which;
    if (w == "core-profile")
      *out = dup(GrowthProfile::desk().to_json());
    else if (w == "schedule")
      *out = dup(ParamSchedule::desk().to_json());
    else if (w == "counterexample")
      *out = dup(CounterexampleParams{}.to_json());
    else
      fail(ErrorCode::Usage, "unknown configuration '" + w + "'");
  });
}

// ---- core ----

rb_status rb_core_build(const char* profile_json, uint64_t seed, rb_core** out) {
  return guarded([&] {
    need(out, "out");
    GrowthProfile p = profile_json ? GrowthProfile::from_json(profile_json) : GrowthProfile::desk();
    *out = new rb_core{build_core_sequence(p, seed)};
  });
}

rb_status rb_core_load(const char* dir, rb_core** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new rb_core{CoreSequence::load(dir)};
  });
}

rb_status rb_core_save(const rb_core* core, const char* dir) {
  return guarded([&] {
    need(core, "core");
    need(dir, "dir");
    core->seq.save(dir);
  });
}

void rb_core_free(rb_core* core) { delete core; }

uint32_t rb_core_levels(const rb_core* core) { return core ? core->seq.s() : 0; }

rb_status rb_core_verify(const rb_core* core, const char* suite, const rb_check_options*, int* passed,
                         char** report_json) {
  return guarded([&] {
    need(core, "core");
    check_suite(suite, {"structure", "core-properties", "all"});
    std::string s = suite;
    SuiteReport rep;
    if (s == "structure" || s == "all") {
      auto r = verify_structure(core->seq);
      std::vector<std::string> f = r.failures;
      rep.add("core.equitable", r.equitable, r.equitable ? std::vector<std::string>{} : f);
      rep.add("core.chain-refinement", r.chain, r.chain ? std::vector<std::string>{} : f);
      rep.add("core.blowup-property", r.blowup, r.blowup ? std::vector<std::string>{} : f);
      rep.add("core.family-sizes", r.family_sizes, r.family_sizes ? std::vector<std::string>{} : f);
    }
    if (s == "core-properties" || s == "all") {
      for (uint32_t i = 1; i <= core->seq.s(); ++i) {
        auto r = verify_core_properties(core->seq, i);
        std::string lvl = ".level-" + std::to_string(i);
        rep.add("core-properties.item1" + lvl, r.item1, r.item1 ? std::vector<std::string>{} : r.failures);
        rep.add("core-properties.item2" + lvl, r.item2, r.item2 ? std::vector<std::string>{} : r.failures);
      }
    }
    rep.finish(s, passed, report_json, {{"seed", core->seq.seed}, {"levels", core->seq.s()}});
  });
}

rb_status rb_core_partition(const rb_core* core, char side, uint32_t level, char** text) {
  return guarded([&] {
    need(core, "core");
    need(text, "text");
    require(side == 'L' || side == 'R', "side must be L or R");
    require(level <= core->seq.s(), "level exceeds s");
    std::ostringstream os;
    write_partition(os, side == 'L' ? core->seq.L_partition(level) : core->seq.R_partition(level));
    *text = dup(os.str());
  });
}

// ---- certificates ----

rb_status rb_certify(const rb_core* core, uint32_t ell, uint32_t member, const char* P_text, const char* Q_text,
                     const char* delta, uint32_t t, const char* gamma, rb_certificate** out) {
  return guarded([&] {
    need(core, "core");
    need(P_text, "P");
    need(Q_text, "Q");
    need(delta, "delta");
    need(out, "out");
    require(ell >= 1 && ell <= core->seq.s(), "ell must lie in 1..s");
    require(member < (uint32_t(1) << ell), "member out of range");
    std::istringstream ps(P_text), qs(Q_text);
    VertexPartition P = read_partition(ps), Q = read_partition(qs);
    RefuteOptions o;
    if (gamma) o.gamma = parse_rational(gamma);
    *out = new rb_certificate{refute_partition(core->seq, ell, member, P, Q, parse_rational(delta), t, o)};
  });
}

rb_status rb_certificate_parse(const char* text, rb_certificate** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    std::istringstream is(text);
    *out = new rb_certificate{read_certificate(is)};
  });
}

rb_status rb_certificate_text(const rb_certificate* cert, char** text) {
  return guarded([&] {
    need(cert, "cert");
    need(text, "text");
    std::ostringstream os;
    write_certificate(os, cert->cert);
    *text = dup(os.str());
  });
}

int rb_certificate_refutes(const rb_certificate* cert) { return cert && cert->cert.refutes ? 1 : 0; }
size_t rb_certificate_lines(const rb_certificate* cert) { return cert ? cert->cert.lines.size() : 0; }

rb_status rb_certificate_verify(const rb_certificate* cert, const rb_core* core, int* passed, char** report_json) {
  return guarded([&] {
    need(cert, "cert");
    need(core, "core");
    auto [ell, member] = parse_label(cert->cert.graph_label);
    require(ell >= 1 && ell <= core->seq.s() && member < (uint32_t(1) << ell), "certificate names a missing member");
    auto chk = verify_certificate(cert->cert, core->seq.member_graph(ell, member));
    SuiteReport rep;
    rep.add("certificate.ledger", chk.ok, chk.failures);
    bool refutes = chk.ok && cert->cert.refutes;
    rep.add("certificate.refutes", refutes,
            refutes ? std::vector<std::string>{}
                    : std::vector<std::string>{"total " + to_string(chk.recomputed_total) + " vs budget " +
                                               to_string(cert->cert.budget)});
    rep.finish("certificate", passed, report_json,
               {{"lines", cert->cert.lines.size()},
                {"total", to_string(chk.recomputed_total)},
                {"budget", to_string(cert->cert.budget)},
                {"graph", cert->cert.graph_label}});
  });
}

void rb_certificate_free(rb_certificate* cert) { delete cert; }

// ---- hypergraphs ----

rb_status rb_hypergraph_build(uint32_t k, uint32_t s, uint64_t n, const char* schedule_json, uint64_t seed,
                              rb_hypergraph** out) {
  return guarded([&] {
    need(out, "out");
    require(k >= 2, "k must be at least 2");
    require(s >= 1, "s must be at least 1");
    ParamSchedule sched = schedule_json ? ParamSchedule::from_json(schedule_json) : ParamSchedule::desk();
    if (!n) n = minimal_class_size(k, s, sched);
    *out = new rb_hypergraph{build_pasted_instance(k, s, n, sched, seed)};
  });
}

rb_status rb_hypergraph_load(const char* dir, rb_hypergraph** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new rb_hypergraph{load_pasted_instance(dir)};
  });
}

rb_status rb_hypergraph_save(const rb_hypergraph* h, const char* dir) {
  return guarded([&] {
    need(h, "hypergraph");
    need(dir, "dir");
    save_pasted_instance(h->inst, dir);
  });
}

void rb_hypergraph_free(rb_hypergraph* h) { delete h; }

rb_status rb_hypergraph_verify(const rb_hypergraph* h, const char* suite, const rb_check_options*, int* passed,
                               char** report_json) {
  return guarded([&] {
    need(h, "hypergraph");
    check_suite(suite, {"family", "pasted", "all"});
    std::string s = suite;
    SuiteReport rep;
    if (s == "family" || s == "all") {
      std::vector<const InductiveFamily*> seen;
      for (size_t x = 0; x < h->inst.families.size(); ++x) {
        const InductiveFamily* f = h->inst.families[x].get();
        if (std::find(seen.begin(), seen.end(), f) != seen.end()) continue;
        seen.push_back(f);
        auto r = verify_family(*f);
        std::string tag = ".edge-" + std::to_string(x);
        rep.add("family.equitable" + tag, r.equitable, r.equitable ? std::vector<std::string>{} : r.failures);
        rep.add("family.densities" + tag, r.densities, r.densities ? std::vector<std::string>{} : r.failures);
        rep.add("family.chain" + tag, r.chain, r.chain ? std::vector<std::string>{} : r.failures);
        rep.add("family.lift" + tag, r.lift, r.lift ? std::vector<std::string>{} : r.failures);
        rep.add("family.bookkeeping" + tag, r.bookkeeping, r.bookkeeping ? std::vector<std::string>{} : r.failures);
        rep.add("family.core-structure" + tag, r.core_structure,
                r.core_structure ? std::vector<std::string>{} : r.failures);
      }
    }
    json extra = {{"k", h->inst.k}, {"s", h->inst.s}, {"n", h->inst.n}, {"seed", h->inst.seed}};
    if (s == "pasted" || s == "all") {
      auto r = verify_pasted_instance(h->inst);
      rep.add("pasted.piece-density", r.pieces_density, r.pieces_density ? std::vector<std::string>{} : r.failures);
      rep.add("pasted.union-density", r.union_density, r.union_density ? std::vector<std::string>{} : r.failures);
      rep.add("pasted.edge-disjoint", r.edge_disjoint, r.edge_disjoint ? std::vector<std::string>{} : r.failures);
      rep.add("pasted.equal-classes", r.equal_classes, r.equal_classes ? std::vector<std::string>{} : r.failures);
      rep.add("pasted.v0-size", r.v0_size, r.v0_size ? std::vector<std::string>{} : r.failures);
      extra["density"] = to_string(r.density);
    }
    rep.finish(s, passed, report_json, extra);
  });
}

rb_status rb_hypergraph_partition(const rb_hypergraph* h, uint64_t level, char** text) {
  return guarded([&] {
    need(h, "hypergraph");
    need(text, "text");
    std::ostringstream os;
    write_partition(os, h->inst.chain(level));
    *text = dup(os.str());
  });
}

// ---- counterexample ----

rb_status rb_counterexample_build(const char* params_json, uint64_t seed, int relaxed, rb_counterexample** out) {
  return guarded([&] {
    need(out, "out");
    CounterexampleParams p = params_json ? CounterexampleParams::from_json(params_json) : CounterexampleParams{};
    p.seed = seed;
    if (relaxed >= 0) p.relaxed = relaxed != 0;
    *out = new rb_counterexample{build_triangle_free(p)};
  });
}

rb_status rb_counterexample_load(const char* dir, rb_counterexample** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new rb_counterexample{load_counterexample(dir)};
  });
}

rb_status rb_counterexample_save(const rb_counterexample* c, const char* dir) {
  return guarded([&] {
    need(c, "counterexample");
    need(dir, "dir");
    save_counterexample(c->inst, dir);
  });
}

void rb_counterexample_free(rb_counterexample* c) { delete c; }

rb_status rb_counterexample_verify(const rb_counterexample* c, const char* suite, const rb_check_options* opt,
                                   uint32_t blowup_samples, int* passed, char** report_json) {
  return guarded([&] {
    need(c, "counterexample");
    check_suite(suite, {"counterexample", "all"});
    auto r = verify_counterexample(c->inst, check_options(opt), blowup_samples);
    SuiteReport rep;
    rep.add("counterexample.triangle-free", r.triangle_free);
    rep.add("counterexample.density-at-least-p", r.density_at_least_p);
    rep.add("counterexample.blowup-density", r.blowup_density_equal);
    if (r.blowup_checked) {
      rep.add("counterexample.blowup-decomposition", r.blowup_exact);
      rep.add("counterexample.blowup-bound", r.blowup_bound);
    }
    // Required only inside the proven parameter window; reported either way.
    bool prop = r.property_all() && r.property_decided;
    if (r.guaranteed) rep.add("counterexample.pair-property", prop);
    json extra = json::parse(to_json(r));
    json out = {{"guaranteed", r.guaranteed}, {"pair_property_measured", prop}, {"report", extra}};
    rep.finish(suite, passed, report_json, out);
  });
}

}  // extern "C"
