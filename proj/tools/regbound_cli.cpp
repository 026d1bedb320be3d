// Command-line front end. Talks to the library only through the C interface.
#include "regbound/regbound.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Exit codes: 0 pass, 1 verification failure, 2 usage/config, 3 resource, 4 internal.
int exit_code(rb_status s) {
  switch (s) {
    case RB_OK: return 0;
    case RB_VERIFICATION: return 1;
    case RB_USAGE:
    case RB_IO: return 2;
    case RB_RESOURCE: return 3;
    default: return 4;
  }
}

struct Failure {
  rb_status status;
};

void check(rb_status s, const char* what) {
  if (s == RB_OK) return;
  std::cerr << "error: " << what << ": " << rb_last_error() << "\n";
  throw Failure{s};
}

// Owns a string returned by the library.
struct CStr {
  char* p = nullptr;
  ~CStr() { rb_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() { Free(p); }
};
using Core = Handle<rb_core, rb_core_free>;
using Hyper = Handle<rb_hypergraph, rb_hypergraph_free>;
using Counter = Handle<rb_counterexample, rb_counterexample_free>;
using Cert = Handle<rb_certificate, rb_certificate_free>;

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    std::cerr << "error: cannot read " << path << "\n";
    throw Failure{RB_USAGE};
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    std::cerr << "error: cannot write " << path << "\n";
    throw Failure{RB_IO};
  }
  os << body;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    std::cerr << "error: malformed " << what << ": " << e.what() << "\n";
    throw Failure{RB_USAGE};
  }
}

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct CheckFlags {
  std::string mode = "exact";
  uint64_t cap = 0;
  uint64_t seed = 1;
  rb_check_options get() const {
    rb_check_options o;
    rb_check_options_init(&o);
    o.mode = mode == "sampled" ? RB_MODE_SAMPLED : RB_MODE_EXACT;
    o.cap = cap;
    o.seed = seed;
    return o;
  }
  void attach(CLI::App* app) {
    app->add_option("--mode", mode, "Subset search: exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));
    app->add_option("--cap", cap, "Enumeration cap (default: REGBOUND_CAP or 2^24)");
    app->add_option("--check-seed", seed, "Seed for sampled checks");
  }
};

// Human lines on stdout, the JSON report optionally to a file.
int emit_report(const std::string& report, int passed, const std::string& report_path, bool print_json) {
  json r = parse_json(report, "report");
  if (print_json) {
    std::cout << r.dump(2) << "\n";
  } else {
    for (const auto& c : r["claims"]) {
      std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["claim"].get<std::string>() << "\n";
      if (c.contains("failures"))
        for (const auto& f : c["failures"]) std::cout << "     " << f.get<std::string>() << "\n";
    }
    std::cout << (passed ? "suite passed" : "suite FAILED") << "\n";
  }
  if (!report_path.empty()) write_file(report_path, r.dump(2) + "\n");
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularity lower-bound constructions and checkers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rb_version()));

  // build-core
  auto* bc = app.add_subcommand("build-core", "Build an iterated core sequence");
  std::string bc_profile, bc_out;
  uint64_t bc_seed = 1;
  bool bc_strict = false;
  bc->add_option("--profile", bc_profile, "Growth profile JSON (default: built-in desk profile)");
  bc->add_option("--seed", bc_seed, "Master seed");
  bc->add_option("--out", bc_out, "Output directory")->required();
  bc->add_flag("--strict", bc_strict, "Enforce the asymptotic profile assumptions");

  // build-hypergraph
  auto* bh = app.add_subcommand("build-hypergraph", "Build the pasted k-graph instance");
  uint32_t bh_k = 3, bh_s = 2;
  uint64_t bh_n = 0, bh_seed = 1;
  std::string bh_schedule, bh_out;
  bool bh_strict = false;
  bh->add_option("--k", bh_k, "Uniformity k >= 2");
  bh->add_option("--s", bh_s, "Depth s >= 1");
  bh->add_option("--n", bh_n, "Class size (default: smallest admissible)");
  bh->add_option("--schedule", bh_schedule, "Parameter schedule JSON (default: desk schedule)");
  bh->add_option("--seed", bh_seed, "Master seed");
  bh->add_option("--out", bh_out, "Output directory")->required();
  bh->add_flag("--strict", bh_strict, "Use the strict schedule semantics");

  // verify
  auto* vf = app.add_subcommand("verify", "Run a verification suite on an artifact directory");
  std::string vf_dir, vf_suite = "all", vf_report;
  bool vf_json = false;
  uint32_t vf_samples = 50;
  CheckFlags vf_check;
  vf->add_option("dir", vf_dir, "Artifact directory")->required();
  vf->add_option("--suite", vf_suite, "Suite name (core: structure, core-properties; hypergraph: family, pasted; "
                                      "counterexample: counterexample; all)");
  vf->add_option("--report", vf_report, "Write the JSON report here");
  vf->add_option("--blowup-samples", vf_samples, "Random (S,T) pairs for the blowup check");
  vf->add_flag("--json", vf_json, "Print the JSON report instead of text");
  vf_check.attach(vf);

  // certify
  auto* cf = app.add_subcommand("certify", "Refute a partition pair and write an irregularity certificate");
  std::string cf_dir, cf_P, cf_Q, cf_delta, cf_out, cf_gamma;
  std::optional<uint32_t> cf_ell, cf_t;
  uint32_t cf_member = 0;
  cf->add_option("dir", cf_dir, "Core directory")->required();
  cf->add_option("--P", cf_P, "Partition of the left side")->required();
  cf->add_option("--Q", cf_Q, "Partition of the right side")->required();
  cf->add_option("--delta", cf_delta, "delta, rational")->required();
  cf->add_option("--ell", cf_ell, "Level of the member graph (default: s)");
  cf->add_option("--member", cf_member, "Member index within the level");
  cf->add_option("--t", cf_t, "Refinement level of the precondition (default: ell)");
  cf->add_option("--gamma", cf_gamma, "gamma override, rational");
  cf->add_option("--out", cf_out, "Certificate file")->required();

  // verify-cert
  auto* vc = app.add_subcommand("verify-cert", "Re-verify a certificate against its core directory");
  std::string vc_dir, vc_cert, vc_report;
  bool vc_json = false;
  vc->add_option("dir", vc_dir, "Core directory")->required();
  vc->add_option("cert", vc_cert, "Certificate file")->required();
  vc->add_option("--report", vc_report, "Write the JSON report here");
  vc->add_flag("--json", vc_json, "Print the JSON report instead of text");

  // counterexample
  auto* ce = app.add_subcommand("counterexample", "Build and check the triangle-free tripartite instance");
  std::string ce_params, ce_out;
  uint64_t ce_seed = 0;
  bool ce_strict = false, ce_relaxed = false, ce_no_verify = false;
  uint32_t ce_samples = 50;
  CheckFlags ce_check;
  ce->add_option("--params", ce_params, "Parameter JSON (default: built-in parameters)");
  ce->add_option("--seed", ce_seed, "Master seed");
  ce->add_option("--out", ce_out, "Output directory")->required();
  auto* strict_flag = ce->add_flag("--strict", ce_strict, "Require the proven parameter window");
  ce->add_flag("--relaxed", ce_relaxed, "Allow desk parameters outside the window")->excludes(strict_flag);
  ce->add_flag("--no-verify", ce_no_verify, "Skip the verification pass");
  ce->add_option("--blowup-samples", ce_samples, "Random (S,T) pairs for the blowup check");
  ce_check.attach(ce);

  // export-partition
  auto* ep = app.add_subcommand("export-partition", "Write a chain partition of an artifact");
  std::string ep_dir, ep_side = "L", ep_out;
  uint32_t ep_level = 1;
  ep->add_option("dir", ep_dir, "Core or hypergraph directory")->required();
  ep->add_option("--side", ep_side, "L or R (core only)")->check(CLI::IsMember({"L", "R"}));
  ep->add_option("--level", ep_level, "Partition level");
  ep->add_option("--out", ep_out, "Output file (default: stdout)");

  // defaults
  auto* df = app.add_subcommand("defaults", "Print a built-in configuration");
  std::string df_which;
  df->add_option("which", df_which, "core-profile, schedule or counterexample")->required();

  // ackermann
  auto* ak = app.add_subcommand("ackermann", "Evaluate Ack_k(n)");
  uint32_t ak_k = 1;
  uint64_t ak_n = 1;
  ak->add_option("k", ak_k)->required();
  ak->add_option("n", ak_n)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    auto t0 = Clock::now();
    if (*bc) {
      std::string profile;
      if (bc_profile.empty()) {
        CStr d;
        check(rb_default_config("core-profile", &d.p), "default profile");
        profile = d.str();
      } else {
        profile = read_file(bc_profile);
      }
      json pj = parse_json(profile, "profile");
      if (bc_strict) pj["strict"] = true;
      Core core;
      check(rb_core_build(pj.dump().c_str(), bc_seed, &core.p), "build-core");
      check(rb_core_save(core.p, bc_out.c_str()), "save");
      json inputs = {{"profile", pj}};
      check(rb_write_run_manifest(bc_out.c_str(), "build-core", inputs.dump().c_str(), bc_seed, since(t0)),
            "manifest");
      std::cout << "core sequence with " << rb_core_levels(core.p) << " levels written to " << bc_out << "\n";
      return 0;
    }
    if (*bh) {
      std::string sched;
      if (bh_schedule.empty()) {
        CStr d;
        check(rb_default_config("schedule", &d.p), "default schedule");
        sched = d.str();
      } else {
        sched = read_file(bh_schedule);
      }
      json sj = parse_json(sched, "schedule");
      if (bh_strict) sj["strict"] = true;
      Hyper h;
      check(rb_hypergraph_build(bh_k, bh_s, bh_n, sj.dump().c_str(), bh_seed, &h.p), "build-hypergraph");
      check(rb_hypergraph_save(h.p, bh_out.c_str()), "save");
      json inputs = {{"k", bh_k}, {"s", bh_s}, {"n", bh_n}, {"schedule", sj}};
      check(rb_write_run_manifest(bh_out.c_str(), "build-hypergraph", inputs.dump().c_str(), bh_seed, since(t0)),
            "manifest");
      std::cout << "k=" << bh_k << " instance written to " << bh_out << "\n";
      return 0;
    }
    if (*vf) {
      CStr kind;
      check(rb_artifact_kind(vf_dir.c_str(), &kind.p), "verify");
      rb_check_options opt = vf_check.get();
      int passed = 0;
      CStr report;
      std::string k = kind.str();
      if (k == "core") {
        Core core;
        check(rb_core_load(vf_dir.c_str(), &core.p), "load");
        check(rb_core_verify(core.p, vf_suite.c_str(), &opt, &passed, &report.p), "verify");
      } else if (k == "hypergraph") {
        Hyper h;
        check(rb_hypergraph_load(vf_dir.c_str(), &h.p), "load");
        check(rb_hypergraph_verify(h.p, vf_suite.c_str(), &opt, &passed, &report.p), "verify");
      } else {
        Counter c;
        check(rb_counterexample_load(vf_dir.c_str(), &c.p), "load");
        check(rb_counterexample_verify(c.p, vf_suite.c_str(), &opt, vf_samples, &passed, &report.p), "verify");
      }
      return emit_report(report.str(), passed, vf_report, vf_json);
    }
    if (*cf) {
      Core core;
      check(rb_core_load(cf_dir.c_str(), &core.p), "load");
      uint32_t ell = cf_ell.value_or(rb_core_levels(core.p));
      uint32_t t = cf_t.value_or(ell);
      std::string P = read_file(cf_P), Q = read_file(cf_Q);
      {
        Cert cert;
        check(rb_certify(core.p, ell, cf_member, P.c_str(), Q.c_str(), cf_delta.c_str(), t,
                         cf_gamma.empty() ? nullptr : cf_gamma.c_str(), &cert.p),
              "certify");
        CStr text;
        check(rb_certificate_text(cert.p, &text.p), "serialize");
        write_file(cf_out, text.str());
        std::cout << "certificate with " << rb_certificate_lines(cert.p) << " ledger lines written to " << cf_out
                  << (rb_certificate_refutes(cert.p) ? " (refutes)" : " (does not refute)") << "\n";
      }
      // Fresh pass: everything re-read from disk.
      Core fresh;
      check(rb_core_load(cf_dir.c_str(), &fresh.p), "reload");
      std::string text = read_file(cf_out);
      Cert back;
      check(rb_certificate_parse(text.c_str(), &back.p), "parse certificate");
      int passed = 0;
      CStr report;
      check(rb_certificate_verify(back.p, fresh.p, &passed, &report.p), "re-verify");
      return emit_report(report.str(), passed, "", false);
    }
    if (*vc) {
      Core core;
      check(rb_core_load(vc_dir.c_str(), &core.p), "load");
      std::string text = read_file(vc_cert);
      Cert cert;
      rb_status s = rb_certificate_parse(text.c_str(), &cert.p);
      if (s != RB_OK) {
        // A certificate that no longer parses has failed verification.
        std::cerr << "certificate rejected: " << rb_last_error() << "\n";
        return 1;
      }
      int passed = 0;
      CStr report;
      check(rb_certificate_verify(cert.p, core.p, &passed, &report.p), "verify-cert");
      return emit_report(report.str(), passed, vc_report, vc_json);
    }
    if (*ce) {
      std::string params;
      if (!ce_params.empty()) params = read_file(ce_params);
      int relaxed = ce_strict ? 0 : ce_relaxed ? 1 : -1;
      Counter c;
      check(rb_counterexample_build(params.empty() ? nullptr : params.c_str(), ce_seed, relaxed, &c.p),
            "counterexample");
      check(rb_counterexample_save(c.p, ce_out.c_str()), "save");
      int code = 0;
      if (!ce_no_verify) {
        rb_check_options opt = ce_check.get();
        int passed = 0;
        CStr report;
        check(rb_counterexample_verify(c.p, "counterexample", &opt, ce_samples, &passed, &report.p), "verify");
        write_file((fs::path(ce_out) / "report.json").string(), report.str() + "\n");
        code = emit_report(report.str(), passed, "", false);
      }
      json inputs = {{"params", params.empty() ? json(nullptr) : parse_json(params, "params")},
                     {"strict", ce_strict},
                     {"relaxed", ce_relaxed}};
      check(rb_write_run_manifest(ce_out.c_str(), "counterexample", inputs.dump().c_str(), ce_seed, since(t0)),
            "manifest");
      return code;
    }
    if (*ep) {
      CStr kind;
      check(rb_artifact_kind(ep_dir.c_str(), &kind.p), "export-partition");
      CStr text;
      if (kind.str() == "core") {
        Core core;
        check(rb_core_load(ep_dir.c_str(), &core.p), "load");
        check(rb_core_partition(core.p, ep_side[0], ep_level, &text.p), "export-partition");
      } else if (kind.str() == "hypergraph") {
        Hyper h;
        check(rb_hypergraph_load(ep_dir.c_str(), &h.p), "load");
        check(rb_hypergraph_partition(h.p, ep_level, &text.p), "export-partition");
      } else {
        std::cerr << "error: export-partition needs a core or hypergraph directory\n";
        return 2;
      }
      if (ep_out.empty())
        std::cout << text.str();
      else
        write_file(ep_out, text.str());
      return 0;
    }
    if (*df) {
      CStr text;
      check(rb_default_config(df_which.c_str(), &text.p), "defaults");
      std::cout << text.str() << "\n";
      return 0;
    }
    if (*ak) {
      CStr v;
      check(rb_ackermann(ak_k, ak_n, &v.p), "ackermann");
      std::cout << v.str() << "\n";
      return 0;
    }
  } catch (const Failure& f) {
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
