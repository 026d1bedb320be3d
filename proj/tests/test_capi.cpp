#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "regbound/regbound.h"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

namespace {
std::string take(char* s) {
  std::string out = s ? s : "";
  rb_string_free(s);
  return out;
}
}  // namespace

TEST_CASE("version and ackermann") {
  CHECK(std::strlen(rb_version()) > 0);
  char* v = nullptr;
  REQUIRE(rb_ackermann(2, 3, &v) == RB_OK);
  CHECK(take(v) == "16");
}

TEST_CASE("null arguments are usage errors") {
  CHECK(rb_ackermann(1, 1, nullptr) == RB_USAGE);
  CHECK(std::string(rb_last_error()).find("null") != std::string::npos);
  CHECK(rb_core_save(nullptr, "/tmp/x") == RB_USAGE);
  int passed = 0;
  CHECK(rb_core_verify(nullptr, "all", nullptr, &passed, nullptr) == RB_USAGE);
  rb_core_free(nullptr);
}

TEST_CASE("malformed configuration maps to usage") {
  rb_core* c = nullptr;
  CHECK(rb_core_build("{", 1, &c) == RB_USAGE);
  CHECK(c == nullptr);
  rb_hypergraph* h = nullptr;
  CHECK(rb_hypergraph_build(1, 2, 0, nullptr, 1, &h) == RB_USAGE);
  char* s = nullptr;
  CHECK(rb_default_config("nothing", &s) == RB_USAGE);
}

TEST_CASE("strict counterexample parameters are rejected") {
  rb_counterexample* c = nullptr;
  CHECK(rb_counterexample_build(nullptr, 1, 0, &c) == RB_USAGE);
  CHECK(std::string(rb_last_error()).find("window") != std::string::npos);
}

TEST_CASE("counterexample through the C interface") {
  const char* params = R"({"delta":"1/2","p":"1/15","k":12,"m":3,"relaxed":true})";
  rb_counterexample* c = nullptr;
  REQUIRE(rb_counterexample_build(params, 3, -1, &c) == RB_OK);
  int passed = 0;
  char* rep = nullptr;
  rb_check_options opt;
  rb_check_options_init(&opt);
  REQUIRE(rb_counterexample_verify(c, "counterexample", &opt, 20, &passed, &rep) == RB_OK);
  CHECK(passed == 1);
  CHECK(take(rep).find("\"triangle_free\": true") != std::string::npos);
  CHECK(rb_counterexample_verify(c, "nope", &opt, 20, &passed, &rep) == RB_USAGE);
  auto dir = (std::filesystem::temp_directory_path() / "regbound-capi-ce").string();
  std::filesystem::remove_all(dir);
  REQUIRE(rb_counterexample_save(c, dir.c_str()) == RB_OK);
  char* kind = nullptr;
  REQUIRE(rb_artifact_kind(dir.c_str(), &kind) == RB_OK);
  CHECK(take(kind) == "counterexample");
  REQUIRE(rb_write_run_manifest(dir.c_str(), "test", "{}", 3, 0.5) == RB_OK);
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "run.json"));
  rb_counterexample* back = nullptr;
  CHECK(rb_counterexample_load(dir.c_str(), &back) == RB_OK);
  rb_counterexample_free(back);
  rb_counterexample_free(c);
  std::filesystem::remove_all(dir);
}

TEST_CASE("hypergraph through the C interface") {
  rb_hypergraph* h = nullptr;
  REQUIRE(rb_hypergraph_build(3, 2, 0, nullptr, 2, &h) == RB_OK);
  int passed = 0;
  char* rep = nullptr;
  REQUIRE(rb_hypergraph_verify(h, "all", nullptr, &passed, &rep) == RB_OK);
  CHECK(passed == 1);
  CHECK(take(rep).find("\"density\": \"3/16\"") != std::string::npos);
  char* part = nullptr;
  REQUIRE(rb_hypergraph_partition(h, 1, &part) == RB_OK);
  CHECK(take(part).rfind("partition 1", 0) == 0);
  rb_hypergraph_free(h);
}

TEST_CASE("certificates through the C interface") {
  const char* profile =
      R"({"s":2,"R_sizes":[8,32],"e":["2","4"],"alpha":["3/4","3/4"]})";
  rb_core* core = nullptr;
  REQUIRE(rb_core_build(profile, 5, &core) == RB_OK);
  CHECK(rb_core_levels(core) == 2);
  char *P = nullptr, *Q = nullptr;
  REQUIRE(rb_core_partition(core, 'L', 1, &P) == RB_OK);
  REQUIRE(rb_core_partition(core, 'R', 2, &Q) == RB_OK);
  std::string Ps = take(P), Qs = take(Q);
  rb_certificate* cert = nullptr;
  REQUIRE(rb_certify(core, 2, 0, Ps.c_str(), Qs.c_str(), "1/1048576", 2, "1/4", &cert) == RB_OK);
  CHECK(rb_certificate_refutes(cert) == 1);
  char* text = nullptr;
  REQUIRE(rb_certificate_text(cert, &text) == RB_OK);
  std::string t = take(text);
  rb_certificate* back = nullptr;
  REQUIRE(rb_certificate_parse(t.c_str(), &back) == RB_OK);
  int passed = 0;
  char* rep = nullptr;
  REQUIRE(rb_certificate_verify(back, core, &passed, &rep) == RB_OK);
  take(rep);
  CHECK(passed == 1);
  CHECK(rb_certificate_lines(back) == rb_certificate_lines(cert));
  // P = L_t violates the precondition
  char* L2 = nullptr;
  REQUIRE(rb_core_partition(core, 'L', 2, &L2) == RB_OK);
  std::string L2s = take(L2);
  rb_certificate* none = nullptr;
  CHECK(rb_certify(core, 2, 0, L2s.c_str(), Qs.c_str(), "1/1048576", 2, "1/4", &none) == RB_USAGE);
  rb_certificate_free(back);
  rb_certificate_free(cert);
  rb_core_free(core);
}
