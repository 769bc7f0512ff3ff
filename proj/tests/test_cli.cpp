#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mkbell/cli.hpp"

using Catch::Matchers::ContainsSubstring;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = mkbell::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("maxbell prints the optimum in fixed-point text", "[cli]") {
  const auto r = run({"maxbell", "--n", "3", "--channel", "none"});
  REQUIRE(r.code == 0);
  REQUIRE_THAT(r.out, ContainsSubstring("best value 2.000000000"));
  REQUIRE_THAT(r.out, ContainsSubstring("converged yes"));
  REQUIRE_THAT(r.out, ContainsSubstring("starts used 64"));
  REQUIRE_THAT(r.out, ContainsSubstring("seed 12345"));
  int party_lines = 0;
  for (const auto& line : lines_of(r.out))
    if (line.rfind("party ", 0) == 0) ++party_lines;
  REQUIRE(party_lines == 6);
}

TEST_CASE("maxbell handles a fully dissipated state", "[cli]") {
  const auto r = run({"maxbell", "--n", "2", "--channel", "dissipation", "--p", "1", "--starts", "8"});
  REQUIRE(r.code == 0);
  REQUIRE_THAT(r.out, ContainsSubstring("best value 1.000000000"));
}

TEST_CASE("maxbell respects an explicit seed", "[cli]") {
  const auto r = run({"maxbell", "--n", "2", "--channel", "none", "--starts", "4", "--seed", "777"});
  REQUIRE(r.code == 0);
  REQUIRE_THAT(r.out, ContainsSubstring("seed 777"));
}

TEST_CASE("maxbell emits parseable JSON", "[cli]") {
  const auto r =
      run({"maxbell", "--n", "2", "--channel", "depolarizing", "--p", "0.1", "--starts", "16", "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["n"] == 2);
  REQUIRE(j["channel"] == "depolarizing");
  REQUIRE(j["p"] == 0.1);
  REQUIRE(j["max_bell"].get<double>() == Catch::Approx(0.81 * std::sqrt(2.0)).margin(1e-6));
  REQUIRE(j["settings"].size() == 2);
  for (const auto& party : j["settings"]) {
    REQUIRE(party.contains("theta"));
    REQUIRE(party.contains("theta_prime"));
    REQUIRE(party.contains("phi"));
    REQUIRE(party.contains("phi_prime"));
  }
  REQUIRE(j["converged"] == true);
  REQUIRE(j["seed"] == 12345);
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
  const std::vector<std::vector<std::string>> bad = {
      {},
      {"maxbell", "--n", "1", "--channel", "none"},
      {"maxbell", "--n", "13", "--channel", "none"},
      {"maxbell", "--n", "2", "--channel", "fog"},
      {"maxbell", "--n", "2", "--channel", "dephasing"},
      {"maxbell", "--n", "2", "--channel", "dephasing", "--p", "1.5"},
      {"maxbell", "--n", "2", "--channel", "none", "--p", "0.5"},
      {"maxbell", "--n", "2", "--channel", "none", "--starts", "0"},
      {"maxbell", "--n", "2", "--channel", "none", "--bogus"},
      {"pmax", "--n", "2", "--channel", "none"},
      {"pmax", "--n", "2", "--channel", "depolarizing", "--tol", "1e-7"},
      {"sweep", "--n", "2", "--channel", "none", "--p-min", "0", "--p-max", "1", "--steps", "1",
       "--out", "unused.csv"},
      {"sweep", "--n", "2", "--channel", "none", "--p-min", "0.8", "--p-max", "0.2", "--steps", "3",
       "--out", "unused.csv"},
      {"verify", "--n-max", "1"},
      {"verify", "--trials", "0"},
  };
  for (const auto& args : bad) {
    const auto r = run(args);
    INFO("args: " << (args.empty() ? std::string("<none>") : args[0]));
    REQUIRE(r.code == 2);
    REQUIRE_FALSE(r.err.empty());
  }
}

TEST_CASE("help is available", "[cli]") {
  const auto r = run({"--help"});
  REQUIRE(r.code == 0);
  REQUIRE_THAT(r.out, ContainsSubstring("maxbell"));
  REQUIRE_THAT(r.out, ContainsSubstring("sweep"));
}

TEST_CASE("pmax reports numeric and analytic thresholds", "[cli]") {
  const auto r = run({"pmax", "--n", "2", "--channel", "depolarizing"});
  REQUIRE(r.code == 0);
  REQUIRE_THAT(r.out, ContainsSubstring("numeric p_max 0.159"));
  REQUIRE_THAT(r.out, ContainsSubstring("bracket width"));
  REQUIRE_THAT(r.out, ContainsSubstring("analytic p_max 0.159103585"));
  REQUIRE_THAT(r.out, ContainsSubstring("difference"));
}

TEST_CASE("pmax reports the absence of a threshold", "[cli]") {
  const auto r = run({"pmax", "--n", "2", "--channel", "dephasing"});
  REQUIRE(r.code == 0);
  REQUIRE_THAT(r.out, ContainsSubstring("no threshold found below cap 0.9999"));
  REQUIRE_THAT(r.out, ContainsSubstring("analytic p_max not available"));
}

TEST_CASE("sweep writes a deterministic CSV", "[cli]") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path_a = dir / "mkbell_sweep_test_a.csv";
  const auto path_b = dir / "mkbell_sweep_test_b.csv";

  const std::vector<std::string> args = {"sweep", "--n",     "2",  "--channel", "depolarizing",
                                         "--p-min", "0",     "--p-max", "1",   "--steps", "12",
                                         "--starts", "8",    "--out"};
  auto with_out = [&](const std::filesystem::path& p) {
    auto a = args;
    a.push_back(p.string());
    return run(a);
  };

  REQUIRE(with_out(path_a).code == 0);
  const std::string text = slurp(path_a);
  REQUIRE(text.find('\r') == std::string::npos);

  const auto rows = lines_of(text);
  REQUIRE(rows.size() == 13);
  REQUIRE(rows[0] == "channel,n,p,max_bell");
  REQUIRE(rows[1] == "depolarizing,2,0.000000000,1.414213562");
  REQUIRE(rows[12] == "depolarizing,2,1.000000000,0.000000000");

  for (std::size_t i = 1; i < rows.size(); ++i) {
    double pv = 0.0, bell = 0.0;
    char channel[32] = {};
    int n = 0;
    REQUIRE(std::sscanf(rows[i].c_str(), "%31[^,],%d,%lf,%lf", channel, &n, &pv, &bell) == 4);
    char rebuilt[128];
    std::snprintf(rebuilt, sizeof(rebuilt), "%s,%d,%.9f,%.9f", channel, n, pv, bell);
    REQUIRE(rows[i] == rebuilt);
  }

  REQUIRE(with_out(path_b).code == 0);
  REQUIRE(slurp(path_b) == text);

  std::filesystem::remove(path_a);
  std::filesystem::remove(path_b);
}

TEST_CASE("sweep reports an unwritable output path", "[cli]") {
  const auto r = run({"sweep", "--n", "2", "--channel", "none", "--p-min", "0", "--p-max", "1",
                      "--steps", "2", "--starts", "4", "--out", "/nonexistent_dir_mkbell/out.csv"});
  REQUIRE(r.code == 1);
  REQUIRE_THAT(r.err, ContainsSubstring("cannot open"));
}

TEST_CASE("verify runs the audit end to end", "[cli]") {
  const auto r = run({"verify", "--n-max", "2", "--trials", "5"});
  REQUIRE(r.code == 0);
  REQUIRE_THAT(r.out, ContainsSubstring("max correlation deviation"));
  REQUIRE_THAT(r.out, ContainsSubstring("max state deviation"));
  REQUIRE_THAT(r.out, ContainsSubstring("PASS"));
}
