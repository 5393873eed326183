#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "contextua/cli.hpp"
#include "json.hpp"

using contextua::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scenario(const std::string& name) { return std::string(CONTEXTUA_SCENARIO_DIR) + "/" + name; }

nlohmann::ordered_json without_timings(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text);
  j.erase("timings");
  return j;
}

}  // namespace

TEST_CASE("exit codes for the bundled scenarios") {
  struct Row {
    std::string command, file, verdict;
    int code;
  };
  const std::vector<Row> rows{
      {"ks-check", "ks_c3_single.json", "colorable", 0},
      {"ks-check", "ks_cabello18_c4.json", "non_colorable", 2},
      {"ks-enumerate", "ks_c3_single.json", "colorable", 0},
      {"gleason-roundtrip", "gleason_mub_c3.json", "round_trip_ok", 0},
      {"gleason-reconstruct", "gleason_single_c3.json", "underdetermined", 0},
      {"bell-analyze", "chsh_singlet.json", "not_factorisable", 2},
      {"bell-classify", "chsh_singlet.json", "underdetermined", 0},
      {"bell-classify", "bell_time_reversed_qubits.json", "quantum_time_reversed", 0},
      {"wigner-check", "gleason_mub_c3.json", "symmetries_consistent", 0},
  };
  for (const auto& row : rows) {
    const auto o = invoke({row.command, "--scenario", scenario(row.file)});
    CHECK_MESSAGE(o.code == row.code, row.command << " " << row.file << ": " << o.err);
    const auto j = nlohmann::ordered_json::parse(o.out);
    CHECK(j["command"] == row.command);
    CHECK(j["exit_code"] == row.code);
    CHECK_MESSAGE(j["verdict"] == row.verdict, row.command);
  }
}

TEST_CASE("report layout") {
  const auto o = invoke({"ks-check", "--scenario", scenario("ks_c3_single.json")});
  const auto j = nlohmann::ordered_json::parse(o.out);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  REQUIRE(!keys.empty());
  CHECK(keys.front() == "tool");
  CHECK(keys.back() == "timings");
  CHECK(j["scenario"]["digest"].get<std::string>().size() == 16);
}

TEST_CASE("reports are deterministic apart from timings") {
  for (const std::string cmd : {"ks-check", "gleason-roundtrip", "wigner-check", "bell-analyze"}) {
    const std::string file = cmd == "bell-analyze" ? "chsh_singlet.json" : (cmd == "ks-check" ? "ks_cabello18_c4.json" : "gleason_mub_c3.json");
    const auto a = invoke({cmd, "--scenario", scenario(file), "--seed", "7"});
    const auto b = invoke({cmd, "--scenario", scenario(file), "--seed", "7"});
    CHECK(without_timings(a.out).dump() == without_timings(b.out).dump());
  }
}

TEST_CASE("digest is FNV-1a 64") {
  // published test vectors
  CHECK(contextua::cli::digest("") == "cbf29ce484222325");
  CHECK(contextua::cli::digest("a") == "af63dc4c8601ec8c");
  CHECK(contextua::cli::digest("foobar") == "85944171f73967e8");
}

TEST_CASE("poset-export writes DOT by default") {
  const auto o = invoke({"poset-export", "--scenario", scenario("ks_c3_single.json")});
  CHECK(o.code == 0);
  CHECK(o.out.find("digraph contexts {") != std::string::npos);
  const std::regex edge(R"(\bn\d+ -> n\d+)");
  const auto n = std::distance(std::sregex_iterator(o.out.begin(), o.out.end(), edge), std::sregex_iterator());
  CHECK(n == 6);
  const auto j = invoke({"poset-export", "--scenario", scenario("ks_c3_single.json"), "--format", "json"});
  CHECK(j.code == 0);
  CHECK(nlohmann::json::parse(j.out)["result"]["covers"].size() == 6);
}

TEST_CASE("text format") {
  const auto o = invoke({"ks-check", "--scenario", scenario("ks_c3_single.json"), "--format", "text"});
  CHECK(o.code == 0);
  CHECK(o.out.find("verdict: colorable") != std::string::npos);
}

TEST_CASE("errors exit with 1") {
  CHECK(invoke({"frobnicate", "--scenario", scenario("ks_c3_single.json")}).code == 1);
  const auto unknown = invoke({"frobnicate"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("unknown command 'frobnicate'") != std::string::npos);
  CHECK(invoke({"ks-check", "--scenario", "/nonexistent/file.json"}).code == 1);
  CHECK(invoke({"ks-check"}).code == 1);
  CHECK(invoke({"ks-check", "--scenario", scenario("ks_c3_single.json"), "--format", "dot"}).code == 1);
  CHECK(invoke({"bell-analyze", "--scenario", scenario("ks_c3_single.json")}).code == 1);

  const auto tmp = std::filesystem::temp_directory_path() / "contextua_bad.json";
  std::ofstream(tmp) << R"({"kind":"single","dim":3,"rays":[[1,0,0],[1,1,0]],"contexts":[[0,1]]})";
  const auto bad = invoke({"ks-check", "--scenario", tmp.string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("not orthogonal") != std::string::npos);
  std::filesystem::remove(tmp);
}

TEST_CASE("--out mirrors stdout") {
  const auto path = std::filesystem::temp_directory_path() / "contextua_report.json";
  const auto o = invoke({"ks-check", "--scenario", scenario("ks_c3_single.json"), "--out", path.string()});
  CHECK(o.code == 0);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == o.out);
  std::filesystem::remove(path);
}
