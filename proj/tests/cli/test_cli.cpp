#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/process.hpp"

namespace fs = std::filesystem;
using support::quote;

namespace {

const fs::path kSource = HOSPSIM_SOURCE_DIR;

std::string cli(const std::string& args) { return quote(HOSPSIM_CLI) + " " + args; }

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help exits cleanly") {
    const auto r = support::run(cli("--help"));
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "sweep"));
  }

  TEST_CASE("usage errors exit 1") {
    CHECK(support::run(cli("")).exit_code == 1);
    CHECK(support::run(cli("run --days 0")).exit_code == 1);
    CHECK(support::run(cli("frobnicate")).exit_code == 1);
  }

  TEST_CASE("missing config exits 2") {
    const auto dir = support::scratch("cli-missing");
    const auto r = support::run(cli("run --config " + quote((dir / "missing.json").string()) + " --output " +
                                    quote((dir / "out").string())));
    CHECK(r.exit_code == 2);
    CHECK(contains(r.output, "missing.json"));
  }

  TEST_CASE("invalid config exits 1 and names the field") {
    const auto dir = support::scratch("cli-invalid");
    std::ofstream(dir / "bad.json") << R"({"population": {"beds": 0}})";
    const auto r = support::run(cli("run --config " + quote((dir / "bad.json").string()) + " --output " +
                                    quote((dir / "out").string())));
    CHECK(r.exit_code == 1);
    CHECK(contains(r.output, "population.beds"));
  }

  TEST_CASE("run is reproducible and records provenance") {
    const auto dir = support::scratch("cli-run");
    const std::string common =
        "run --config " + quote((kSource / "configs" / "base.json").string()) + " --seed 7 --days 2 --robots 3";
    const auto a = support::run(cli(common + " --output " + quote((dir / "a").string())));
    const auto b = support::run(cli(common + " --output " + quote((dir / "b").string())));
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(contains(a.output, "seed: 7"));
    for (const char* f : {"trace.csv", "patients.csv"}) {
      const auto ta = support::slurp(dir / "a" / f);
      CHECK(!ta.empty());
      CHECK(ta == support::slurp(dir / "b" / f));
    }
    const auto trace = support::slurp(dir / "a" / "trace.csv");
    CHECK(contains(trace, "# seed: 7"));
    CHECK(contains(trace, "# overrides: days=2 robots=3"));
    CHECK(contains(trace, "# config_hash: "));
    const auto rows = data_lines(trace);
    REQUIRE(!rows.empty());
    CHECK(rows[0].rfind("tick,day,", 0) == 0);
    CHECK(rows.size() == 1 + 2 * 24 + 1);
  }

  TEST_CASE("dump-network writes edges") {
    const auto dir = support::scratch("cli-net");
    const auto r = support::run(cli("run --days 2 --dump-network --output " + quote(dir.string())));
    REQUIRE(r.exit_code == 0);
    const auto rows = data_lines(support::slurp(dir / "network.csv"));
    REQUIRE(rows.size() > 1);
    CHECK(rows[0] == "day,i,j,absDelta,color");
  }

  TEST_CASE("sweep without its baseline exits 1") {
    const auto dir = support::scratch("cli-nobase");
    std::ofstream(dir / "sweep.json") << R"({"base": {"durationDays": 1, "replications": 1}, "baseline": "ghost",
      "scenarios": [{"name": "only", "delta": {}}]})";
    const auto r = support::run(cli("sweep " + quote((dir / "sweep.json").string()) + " --output " +
                                    quote((dir / "out").string())));
    CHECK(r.exit_code == 1);
    CHECK(contains(r.output, "missing baseline"));
  }

  TEST_CASE("shipped sweep runs with identical files for any job count") {
    const auto dir = support::scratch("cli-sweep");
    const std::string sweep = quote((kSource / "configs" / "sweep.json").string());
    const auto a = support::run(cli("sweep " + sweep + " --days 2 --jobs 4 --output " + quote((dir / "a").string())));
    const auto b = support::run(cli("sweep " + sweep + " --days 2 --jobs 1 --output " + quote((dir / "b").string())));
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);

    std::set<std::string> scenarios;
    const auto rows = data_lines(support::slurp(dir / "a" / "summary.csv"));
    REQUIRE(rows.size() > 1);
    CHECK(rows[0] == "scenario,response,n,mean,std,min,max");
    for (std::size_t k = 1; k < rows.size(); ++k) scenarios.insert(rows[k].substr(0, rows[k].find(',')));
    CHECK(scenarios.size() == 5);

    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), dir / "a");
      INFO(rel.string());
      CHECK(support::slurp(e.path()) == support::slurp(dir / "b" / rel));
      ++compared;
    }
    CHECK(compared > 5);
  }

  TEST_CASE("validate-fls on the shipped doctor system") {
    const auto r = support::run(cli("validate-fls " + quote((kSource / "data" / "fls" / "doctor.fls").string())));
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "valid"));
    CHECK(contains(r.output, "rules: 9"));
    CHECK(contains(r.output, "completeness: ok"));
  }

  TEST_CASE("validate-fls reports gaps and syntax errors") {
    const auto dir = support::scratch("cli-fls");
    std::ofstream(dir / "gap.fls") << "var input x 0 10\n"
                                      "term x Low tri 0 0 4\n"
                                      "term x High tri 6 10 10\n"
                                      "var output y 0 1\n"
                                      "term y A tri 0 0.5 1\n"
                                      "rule IF x IS Low THEN y IS A\n"
                                      "rule IF x IS High THEN y IS A\n";
    auto r = support::run(cli("validate-fls " + quote((dir / "gap.fls").string())));
    CHECK(r.exit_code == 1);
    CHECK(contains(r.output, "incomplete rule base"));

    std::ofstream(dir / "typo.fls") << "var input x 0 ten\n";
    r = support::run(cli("validate-fls " + quote((dir / "typo.fls").string())));
    CHECK(r.exit_code == 1);
    CHECK(contains(r.output, "line 1, column 15"));

    r = support::run(cli("validate-fls " + quote((dir / "absent.fls").string())));
    CHECK(r.exit_code == 2);
  }

  TEST_CASE("fls-surface covers the grid") {
    const auto dir = support::scratch("cli-surface");
    const auto r = support::run(cli("fls-surface " + quote((kSource / "data" / "fls" / "doctor.fls").string()) +
                                    " --grid 3 --output " + quote((dir / "s.csv").string())));
    REQUIRE(r.exit_code == 0);
    const auto rows = data_lines(support::slurp(dir / "s.csv"));
    REQUIRE(rows.size() == 10);
    CHECK(rows[0] == "severity,mentalState,treatDuration");
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const double v = std::stod(rows[k].substr(rows[k].rfind(',') + 1));
      CHECK(v >= 10.0);
      CHECK(v <= 60.0);
    }
  }
}
