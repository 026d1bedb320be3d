#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {
const fs::path kWork = fs::temp_directory_path() / "regbound-cli-tests";

int run(const std::string& args) {
  std::string cmd = std::string(REGBOUND_CLI) + " " + args + " >/dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Workdir() { fs::remove_all(kWork); }
};

std::string small_profile() {
  auto p = kWork / "small.json";
  write(p, R"({"s":2,"R_sizes":[8,32],"e":["2","4"],"alpha":["3/4","3/4"]})");
  return p.string();
}
}  // namespace

TEST_CASE("usage errors exit 2") {
  Workdir w;
  CHECK(run("") == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("build-core") == 2);  // --out missing
  write(kWork / "bad.json", "{");
  CHECK(run("build-core --profile " + (kWork / "bad.json").string() + " --out " + (kWork / "c").string()) == 2);
  CHECK(run("build-hypergraph --k 1 --s 2 --out " + (kWork / "h").string()) == 2);
  CHECK(run("counterexample --strict --out " + (kWork / "x").string()) == 2);
  CHECK(run("verify " + (kWork / "missing").string()) == 2);
}

TEST_CASE("ackermann and defaults") {
  CHECK(run("ackermann 2 3") == 0);
  CHECK(run("defaults schedule") == 0);
  CHECK(run("defaults nothing") == 2);
}

TEST_CASE("core build, verify, export and certify") {
  Workdir w;
  auto core = (kWork / "core").string();
  REQUIRE(run("build-core --profile " + small_profile() + " --seed 7 --out " + core) == 0);
  CHECK(fs::exists(fs::path(core) / "run.json"));
  CHECK(run("verify " + core + " --suite structure") == 0);
  CHECK(run("verify " + core + " --suite core-properties") == 0);
  CHECK(run("verify " + core + " --suite pasted") == 2);
  auto rep = kWork / "rep.json";
  CHECK(run("verify " + core + " --report " + rep.string()) == 0);
  CHECK(slurp(rep).find("\"passed\": true") != std::string::npos);

  auto P = kWork / "P.txt";
  auto Q = kWork / "Q.txt";
  REQUIRE(run("export-partition " + core + " --side L --level 1 --out " + P.string()) == 0);
  REQUIRE(run("export-partition " + core + " --side R --level 2 --out " + Q.string()) == 0);
  auto cert = kWork / "cert.txt";
  std::string common = core + " --P " + P.string() + " --Q " + Q.string() + " --delta 1/1048576 --ell 2 --t 2 --gamma 1/4";
  REQUIRE(run("certify " + common + " --out " + cert.string()) == 0);
  CHECK(run("verify-cert " + core + " " + cert.string()) == 0);

  // flipping one ledger value breaks re-verification
  std::string text = slurp(cert);
  auto pos = text.find("core:");
  REQUIRE(pos != std::string::npos);
  auto line_end = text.find('\n', text.find('\n', pos) + 1);
  auto last_space = text.rfind(' ', line_end);
  REQUIRE(last_space != std::string::npos);
  std::string tampered = text.substr(0, last_space + 1) + "999/7" + text.substr(line_end);
  write(kWork / "bad_cert.txt", tampered);
  CHECK(run("verify-cert " + core + " " + (kWork / "bad_cert.txt").string()) == 1);
  write(kWork / "junk.txt", "not a certificate\n");
  CHECK(run("verify-cert " + core + " " + (kWork / "junk.txt").string()) == 1);

  // refining the left side to the precondition level is refused
  auto L2 = kWork / "L2.txt";
  REQUIRE(run("export-partition " + core + " --side L --level 2 --out " + L2.string()) == 0);
  CHECK(run("certify " + core + " --P " + L2.string() + " --Q " + Q.string() +
            " --delta 1/1048576 --ell 2 --t 2 --gamma 1/4 --out " + (kWork / "c2.txt").string()) == 2);
}

TEST_CASE("seeded rebuilds are byte-identical") {
  Workdir w;
  auto a = kWork / "a", b = kWork / "b";
  REQUIRE(run("build-core --profile " + small_profile() + " --seed 3 --out " + a.string()) == 0);
  REQUIRE(run("build-core --profile " + small_profile() + " --seed 3 --out " + b.string()) == 0);
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().filename() == "run.json") continue;
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
}

TEST_CASE("hypergraph pipeline") {
  Workdir w;
  auto h = (kWork / "h").string();
  REQUIRE(run("build-hypergraph --k 3 --s 2 --seed 1 --out " + h) == 0);
  CHECK(run("verify " + h) == 0);
  CHECK(run("verify " + h + " --suite family") == 0);
  CHECK(run("export-partition " + h + " --level 1 --out " + (kWork / "p.txt").string()) == 0);
  CHECK(run("build-hypergraph --k 3 --s 2 --strict --out " + (kWork / "s").string()) == 3);
}

TEST_CASE("relaxed counterexample") {
  Workdir w;
  auto out = (kWork / "ce").string();
  CHECK(run("counterexample --params " REGBOUND_PROFILES "/counterexample_relaxed.json --seed 2 --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "report.json"));
  CHECK(run("verify " + out) == 0);
  // a stored graph that no longer matches its parameters is rejected
  auto file = fs::path(out) / "base_12.txt";
  auto text = slurp(file);
  text.erase(text.rfind('\n', text.size() - 2) + 1);  // drop the last edge
  auto count_at = text.find("edges ") + 6;
  auto count_end = text.find('\n', count_at);
  auto m = std::stoul(text.substr(count_at, count_end - count_at));
  write(file, text.replace(count_at, count_end - count_at, std::to_string(m - 1)));
  CHECK(run("verify " + out) != 0);
}
