// End-to-end tests of the installed binary: spawn it the way a user would,
// capture stdout and the exit status, and check the machine-readable output
// against the library and the golden files. ODB_TOOL_PATH and ODB_TEST_DIR
// come from the build system.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "odb/basis.hpp"
#include "odb/superop.hpp"

using nlohmann::json;
using odb::fock::cplx;

namespace {

struct ToolResult {
  int code = -1;
  std::string out;
};

ToolResult run_tool(const std::string& args) {
  const std::string cmd = std::string(ODB_TOOL_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string cfg(const char* name) {
  return std::string(ODB_TEST_DIR) + "/configs/" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

odb::sop::SystemParams params_from_json(const json& jp) {
  odb::sop::SystemParams p;
  p.omega = jp.at("omega").get<double>();
  p.nu = jp.at("nu").get<double>();
  p.chi = jp.at("chi").get<double>();
  p.kappa = jp.at("kappa").get<double>();
  p.gamma = jp.at("gamma").get<double>();
  p.mbar = jp.at("mbar").get<double>();
  p.variant = jp.at("variant").get<std::string>() == "dsme" ? odb::sop::Variant::dsme
                                                            : odb::sop::Variant::weak;
  return p;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("spectrum csv matches the golden file byte for byte") {
  auto r = run_tool("spectrum --config " + cfg("small_exact.json") + " --format csv");
  CHECK(r.code == 0);
  CHECK(r.out == read_file(std::string(ODB_TEST_DIR) + "/golden/spectrum_small.csv"));
}

TEST_CASE("spectrum rows reproduce the closed-form eigenvalues bit for bit") {
  for (const std::string variant : {"weak", "dsme"}) {
    auto r = run_tool("spectrum --config " + cfg("tiny_weak.json") + " --variant " + variant);
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("schema") == "odb.spectrum.v1");
    CHECK(doc.at("params").at("variant") == variant);
    const auto p = params_from_json(doc.at("params"));
    REQUIRE(!doc.at("rows").empty());
    for (const auto& row : doc.at("rows")) {
      const odb::basis::EigenLabel lab{row.at("l").get<int>(), row.at("n").get<int>(),
                                       row.at("k").get<int>(), row.at("m").get<int>(),
                                       odb::basis::Side::right};
      const cplx lam = odb::basis::eigenvalue(lab, p);
      CHECK(row.at("eigenvalue").at("re").get<double>() == lam.real());
      CHECK(row.at("eigenvalue").at("im").get<double>() == lam.imag());
    }
  }
}

TEST_CASE("all-zero ranges produce the single zero eigenvalue") {
  auto r = run_tool("spectrum --config " + cfg("zero_ranges.json"));
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  REQUIRE(doc.at("rows").size() == 1);
  CHECK(doc.at("rows")[0].at("eigenvalue").at("re").get<double>() == 0.0);
  CHECK(doc.at("rows")[0].at("eigenvalue").at("im").get<double>() == 0.0);
}

TEST_CASE("desk ranges emit the full 225-row table") {
  auto r = run_tool("spectrum --config " + std::string(ODB_TEST_DIR) +
                    "/../config/desk_weak.json --format csv");
  REQUIRE(r.code == 0);
  CHECK(count_lines(r.out) == 226);  // header plus 5*3*5*3 labels
}

TEST_CASE("eigvec output matches the in-process construction") {
  auto r = run_tool("eigvec --config " + cfg("tiny_weak.json") +
                    " --l 1 --n 1 --k -1 --m 1 --side right");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("schema") == "odb.eigvec.v1");
  const auto p = params_from_json(doc.at("params"));
  const int Nc = doc.at("Nc").get<int>(), Nm = doc.at("Nm").get<int>();

  const odb::basis::EigenLabel lab{1, 1, -1, 1, odb::basis::Side::right};
  const auto e = odb::basis::right_eigvec(lab, p, Nc, Nm);
  CHECK(doc.at("eigenvalue").at("re").get<double>() == e.eigenvalue.real());
  CHECK(doc.at("eigenvalue").at("im").get<double>() == e.eigenvalue.imag());
  CHECK(doc.at("first_block").get<int>() == e.first_block);
  REQUIRE(doc.at("blocks").size() == e.blocks.size());
  double worst = 0.0;
  for (size_t b = 0; b < e.blocks.size(); ++b) {
    const auto& entries = doc.at("blocks")[b].at("entries");
    REQUIRE((int)entries.size() == e.blocks[b].rows());
    for (int i = 0; i < e.blocks[b].rows(); ++i)
      for (int j = 0; j < e.blocks[b].cols(); ++j) {
        const cplx got{entries[i][j].at("re").get<double>(),
                       entries[i][j].at("im").get<double>()};
        worst = std::max(worst, std::abs(got - e.blocks[b](i, j)));
      }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("eigvec csv and pathsum/left variants run") {
  auto r = run_tool("eigvec --config " + cfg("tiny_weak.json") + " --format csv --l 1 --n 1");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("block,row,col,re,im\n", 0) == 0);
  CHECK(run_tool("eigvec --config " + cfg("tiny_weak.json") + " --side left --n 1").code == 0);
  CHECK(run_tool("eigvec --config " + cfg("tiny_weak.json") + " --pathsum --l 1 --n 1").code == 0);
  // the path-sum construction has no left-side counterpart
  CHECK(run_tool("eigvec --config " + cfg("tiny_weak.json") + " --pathsum --side left").code == 2);
}

TEST_CASE("verify passes on the tiny config and reports five checks") {
  auto r = run_tool("verify --config " + cfg("tiny_weak.json"));
  CHECK(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("schema") == "odb.verify.v1");
  CHECK(doc.at("pass").get<bool>());
  REQUIRE(doc.at("checks").size() == 5);
  const std::vector<std::string> expected = {"spectrum_match", "residuals", "gram",
                                             "crosstrace", "pathsum"};
  for (size_t i = 0; i < expected.size(); ++i) {
    const auto& c = doc.at("checks")[i];
    CHECK(c.at("name") == expected[i]);
    CHECK(c.at("pass").get<bool>());
    CHECK(c.at("worst").get<double>() <= c.at("tolerance").get<double>());
  }
}

TEST_CASE("verify exits 1 when a check misses an absurd tolerance") {
  auto r = run_tool("verify --config " + cfg("tiny_weak_strict.json"));
  CHECK(r.code == 1);
  const json doc = json::parse(r.out);
  CHECK(!doc.at("pass").get<bool>());
  REQUIRE(doc.at("checks").size() == 5);
  CHECK(!doc.at("checks")[0].at("pass").get<bool>());  // spectrum_match at 1e-30
}

TEST_CASE("verify is reproducible from the seed") {
  const std::string args = "verify --config " + cfg("tiny_weak.json") + " --seed 42";
  auto a = run_tool(args);
  auto b = run_tool(args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(json::parse(a.out).at("checks") == json::parse(b.out).at("checks"));
}

TEST_CASE("usage and config errors exit with code 2") {
  CHECK(run_tool("frobnicate").code == 2);                       // unknown subcommand
  CHECK(run_tool("").code == 2);                                 // no subcommand
  CHECK(run_tool("spectrum --no-such-flag").code == 2);          // unknown flag
  CHECK(run_tool("--format xml spectrum").code == 2);            // bad enum value
  CHECK(run_tool("spectrum --config /no/such/file.json").code == 2);
  CHECK(run_tool("verify --config " + cfg("bad_kappa.json")).code == 2);
  CHECK(run_tool("spectrum --config " + cfg("bad_key.json")).code == 2);
  CHECK(run_tool("evolve --config " + cfg("tiny_weak.json") +
                 " --initial fock:99,0").code == 2);
  CHECK(run_tool("evolve --config " + cfg("tiny_weak.json") +
                 " --initial nonsense").code == 2);
  CHECK(run_tool("evolve --config " + cfg("tiny_weak.json") +
                 " --method sideways").code == 2);
  CHECK(run_tool("evolve --config " + cfg("tiny_weak.json") +
                 " --times 3,1").code == 2);                     // unsorted times
  CHECK(run_tool("bench --config " + cfg("tiny_weak.json") + " --dims oops").code == 2);
}

TEST_CASE("command-line flags override config file values") {
  auto flagged = run_tool("spectrum --config " + cfg("variant_dsme.json") + " --variant weak");
  REQUIRE(flagged.code == 0);
  CHECK(json::parse(flagged.out).at("params").at("variant") == "weak");
  auto plain = run_tool("spectrum --config " + cfg("variant_dsme.json"));
  REQUIRE(plain.code == 0);
  CHECK(json::parse(plain.out).at("params").at("variant") == "dsme");
}

TEST_CASE("--out writes the report to a file instead of stdout") {
  const std::string path = "odb_out_test.json";
  std::remove(path.c_str());
  auto r = run_tool("spectrum --config " + cfg("tiny_weak.json") + " --out " + path);
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  const json doc = json::parse(read_file(path));
  CHECK(doc.at("schema") == "odb.spectrum.v1");
  std::remove(path.c_str());
}

TEST_CASE("spectral photon number follows the exact decay law") {
  auto r = run_tool("evolve --config " + cfg("tiny_weak.json") +
                    " --initial fock:1,0 --times 0,1,3,8");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  const double kappa = doc.at("params").at("kappa").get<double>();
  REQUIRE(doc.at("rows").size() == 4);
  for (const auto& row : doc.at("rows")) {
    const double t = row.at("t").get<double>();
    CHECK(std::abs(row.at("photon_number").get<double>() - std::exp(-kappa * t)) <= 1e-6);
    CHECK(row.at("trace_distance").is_null());  // spectral-only run
  }
}

TEST_CASE("spectral and direct evolution agree on a well-represented state") {
  auto r = run_tool("evolve --config " + cfg("small_exact.json") +
                    " --initial 'fock:1;thermal:0.2' --method both --times 0,1,5");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  const double kappa = doc.at("params").at("kappa").get<double>();
  REQUIRE(doc.at("rows").size() == 6);  // one spectral and one direct row per time
  CHECK(doc.at("metadata").at("reconstruction_error").get<double>() <= 1e-8);
  for (const auto& row : doc.at("rows")) {
    CHECK(row.at("trace_distance").get<double>() <= 1e-6);
    const double t = row.at("t").get<double>();
    CHECK(std::abs(row.at("photon_number").get<double>() - std::exp(-kappa * t)) <= 1e-6);
  }
}

TEST_CASE("a stationary initial state produces constant rows") {
  auto r = run_tool("evolve --config " + cfg("small_exact.json") +
                    " --initial 'fock:0;thermal:0.2' --times 0,2,7");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  const auto& rows = doc.at("rows");
  REQUIRE(rows.size() == 3);
  const double ph0 = rows[0].at("phonon_number").get<double>();
  const double pu0 = rows[0].at("purity").get<double>();
  for (const auto& row : rows) {
    CHECK(std::abs(row.at("photon_number").get<double>()) <= 1e-10);
    CHECK(std::abs(row.at("phonon_number").get<double>() - ph0) <= 1e-9);
    CHECK(std::abs(row.at("purity").get<double>() - pu0) <= 1e-9);
    CHECK(std::abs(row.at("trace").at("re").get<double>() - 1.0) <= 1e-9);
  }
}

TEST_CASE("bench reports finite timings and a tight spectral error") {
  auto r = run_tool("bench --config " + cfg("small_exact.json") +
                    " --dims 3x10 --times 0.5,1 --initial 'fock:1;thermal:0.2'");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("schema") == "odb.bench.v1");
  const auto& rows = doc.at("rows");
  REQUIRE(rows.size() == 3);  // expm, spectral, adaptive at one dim
  for (const auto& row : rows) {
    CHECK(std::isfinite(row.at("setup_ms").get<double>()));
    CHECK(row.at("per_time_point_ms").get<double>() > 0.0);
    CHECK(std::isfinite(row.at("max_error").get<double>()));
    if (row.at("method") == "spectral") CHECK(row.at("max_error").get<double>() <= 1e-6);
  }
}

TEST_CASE("bench runs at the smallest dimensions") {
  auto r = run_tool("bench --config " + cfg("small_exact.json") +
                    " --dims 2x4 --times 1 --initial 'fock:0;thermal:0.2' --format csv");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("Nc,Nm,method,setup_ms,per_time_point_ms,max_error\n", 0) == 0);
  CHECK(count_lines(r.out) == 4);  // header plus three method rows
}
