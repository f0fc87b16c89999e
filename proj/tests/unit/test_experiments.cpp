#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hospsim/config.hpp"
#include "hospsim/experiments.hpp"
#include "hospsim/output.hpp"

using namespace hospsim;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hospsim-test-" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  std::sort(out.begin(), out.end());
  return out;
}

ExperimentConfig short_config(int replications) {
  ExperimentConfig c;
  c.duration_days = 2;
  c.replications = replications;
  c.seed_base = 11;
  return c;
}

json small_sweep() {
  return json::parse(R"({
    "base": { "durationDays": 2, "replications": 3, "seedBase": 5 },
    "baseline": "docs",
    "scenarios": [
      { "name": "docs", "delta": { "population": { "robots": 0, "humanlikeRobots": 0 } } },
      { "name": "bots", "delta": { "population": { "doctors": 0, "seniorDoctors": 0, "robots": 4 } } }
    ]
  })");
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults validate") { CHECK_NOTHROW(ExperimentConfig{}.validate()); }

  TEST_CASE("shipped base config parses") {
    const auto cfg = load_config(fs::path(HOSPSIM_SOURCE_DIR) / "configs" / "base.json");
    CHECK(cfg.replications == 10);
    CHECK(cfg.duration_days == 30);
    CHECK(fs::exists(cfg.fls.doctor));
    CHECK_NOTHROW(load_fls_set(cfg.fls));
  }

  TEST_CASE("round trip through JSON") {
    ExperimentConfig c;
    c.population.doctors = 7;
    c.network.alpha_per_hour = 0.25;
    c.schedule.prefer_doctors = true;
    json j = c;
    const auto back = parse_config(j);
    CHECK(json(back) == j);
  }

  TEST_CASE("invalid fields are named") {
    auto bad = [](const char* text, const char* field) {
      INFO(text);
      try {
        parse_config(json::parse(text));
        FAIL("accepted");
      } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(field) != std::string::npos);
      }
    };
    bad(R"({"population": {"beds": 0}})", "population.beds");
    bad(R"({"population": {"doctors": 2, "seniorDoctors": 3}})", "population.seniorDoctors");
    bad(R"({"population": {"patients": 3, "visitors": 4}})", "population.visitors");
    bad(R"({"robotLook": {"robotlikeH": 0.5}})", "robotLook.robotlikeH");
    bad(R"({"network": {"alphaPerHour": 0}})", "network.alphaPerHour");
    bad(R"({"network": {"greenMax": 0.3, "yellowMax": 0.2}})", "network.yellowMax");
    bad(R"({"schedule": {"pAdmit": 1.5}})", "schedule.pAdmit");
    bad(R"({"replications": 0})", "replications");
    bad(R"({"colour": 3})", "colour");
    bad(R"({"population": {"doctors": "four"}})", "population.doctors");
  }

  TEST_CASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_config("/nonexistent/hospsim.json"), std::ios_base::failure);
  }

  TEST_CASE("overrides") {
    ConfigOverrides o;
    CHECK(o.empty());
    CHECK(o.describe().empty());
    o.robots = 4;
    o.doctors = 0;
    CHECK(o.describe() == "doctors=0 robots=4");

    ExperimentConfig c;
    apply_overrides(c, o);
    CHECK(c.population.doctors == 0);
    CHECK(c.population.senior_doctors == 0);
    CHECK(c.population.robots == 4);
    CHECK_NOTHROW(c.validate());

    ConfigOverrides p;
    p.patients = 3;
    p.days = 1;
    apply_overrides(c, p);
    CHECK(c.population.visitors <= 3);
    CHECK(c.duration_days == 1);
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("hash tracks config and FLS text") {
    const auto fls = load_fls_set({});
    ExperimentConfig a;
    ExperimentConfig b;
    CHECK(config_hash(a, fls) == config_hash(b, fls));
    b.population.beds = 11;
    CHECK(config_hash(a, fls) != config_hash(b, fls));
    auto fls2 = fls;
    fls2.sources[0] += "\n";
    CHECK(config_hash(a, fls) != config_hash(a, fls2));
    CHECK(hex_hash(config_hash(a, fls)).size() == 16);
  }

  TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
    CHECK(fnv1a("bar", fnv1a("foo")) == fnv1a("foobar"));
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("summarize examples") {
    const auto one = summarize({0.5});
    CHECK(one.n == 1);
    CHECK(one.mean == 0.5);
    CHECK(one.std == 0.0);

    const auto two = summarize({0.6, 0.4});
    CHECK(two.mean == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(two.std == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
    CHECK(two.min == 0.4);
    CHECK(two.max == 0.6);

    CHECK_THROWS_AS(summarize({}), std::invalid_argument);
  }

  TEST_CASE("summarize ignores order") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> v(1 + rng() % 30);
      for (auto& x : v) x = u(rng);
      const auto s = summarize(v);
      std::shuffle(v.begin(), v.end(), rng);
      CHECK(summarize(v) == s);
      CHECK(s.min <= s.mean);
      CHECK(s.mean <= s.max);
      CHECK(s.std >= 0);
    }
  }

  TEST_CASE("parallel_for covers every index and rethrows") {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t k) { hits[k] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK_THROWS_WITH(parallel_for(10, 3,
                                   [](std::size_t k) {
                                     if (k == 7) throw std::runtime_error("seven");
                                     if (k == 4) throw std::runtime_error("four");
                                   }),
                      "four");
  }

  TEST_CASE("single replication equals a plain run") {
    const auto fls = load_fls_set({});
    const auto cfg = short_config(1);
    const auto reps = run_replications(cfg, fls);
    REQUIRE(reps.size() == 1);
    const auto direct = run_simulation(cfg, fls, cfg.seed_base);
    CHECK(reps[0].seed == cfg.seed_base);
    CHECK(reps[0].trace == direct.trace);
    CHECK(reps[0].final_mean_mental_state == direct.final_mean_mental_state);
  }

  TEST_CASE("replication seeds differ") {
    const auto fls = load_fls_set({});
    const auto cfg = short_config(2);
    CHECK(replication_seed(cfg, 0) == 11);
    CHECK(replication_seed(cfg, 1) == 12);
    const auto reps = run_replications(cfg, fls);
    CHECK(reps[0].trace != reps[1].trace);
  }

  TEST_CASE("thread count does not change results") {
    const auto fls = load_fls_set({});
    const auto cfg = short_config(6);
    const auto serial = run_replications(cfg, fls, 1);
    const auto threaded = run_replications(cfg, fls, 4);
    REQUIRE(serial.size() == threaded.size());
    for (std::size_t k = 0; k < serial.size(); ++k) {
      CHECK(serial[k].seed == threaded[k].seed);
      CHECK(serial[k].trace == threaded[k].trace);
    }
    CHECK(aggregate(serial)[0].summary == aggregate(threaded)[0].summary);
  }

  TEST_CASE("response table") {
    std::vector<std::string> names;
    for (const auto& r : responses()) names.emplace_back(r.name);
    CHECK(names.front() == "finalMeanMentalState");
    CHECK(std::find(names.begin(), names.end(), "redEdgeFraction") != names.end());
  }

  TEST_CASE("sweep deltas merge over the base") {
    const auto spec = parse_sweep(small_sweep(), ".");
    REQUIRE(spec.scenarios.size() == 2);
    CHECK(spec.baseline == "docs");
    const auto& docs = spec.scenarios[0].config;
    const auto& bots = spec.scenarios[1].config;
    CHECK(docs.population.robots == 0);
    CHECK(docs.population.doctors == ExperimentConfig{}.population.doctors);
    CHECK(bots.population.doctors == 0);
    CHECK(bots.population.robots == 4);
    CHECK(bots.duration_days == 2);
    CHECK(bots.seed_base == 5);

    ConfigOverrides o;
    o.days = 1;
    const auto overridden = parse_sweep(small_sweep(), ".", o);
    for (const auto& sc : overridden.scenarios) CHECK(sc.config.duration_days == 1);
  }

  TEST_CASE("sweep errors") {
    auto rejects = [](json j, const char* needle) {
      INFO(j.dump());
      try {
        parse_sweep(j, ".");
        FAIL("accepted");
      } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
      }
    };
    auto j = small_sweep();
    j["baseline"] = "nobody";
    rejects(j, "missing baseline 'nobody'");

    j = small_sweep();
    j["scenarios"][1]["name"] = "docs";
    rejects(j, "duplicate");

    j = small_sweep();
    j["scenarios"][1]["delta"]["seedBase"] = 9;
    rejects(j, "seedBase");

    j = small_sweep();
    j["scenarios"][1]["name"] = "../up";
    rejects(j, "plain directory name");

    j = small_sweep();
    j["scenarios"][1]["delta"]["population"]["beds"] = 0;
    rejects(j, "population.beds");

    j = small_sweep();
    j["extra"] = 1;
    rejects(j, "unknown key");

    j = small_sweep();
    j["scenarios"] = json::array();
    rejects(j, "non-empty");
  }

  TEST_CASE("baseline row is zero and others compare to it") {
    const auto sweep = run_sweep(parse_sweep(small_sweep(), "."), 2);
    const auto report = hypothesis_report(sweep);
    REQUIRE(report.size() == 2);
    CHECK(report[0].scenario == "docs");
    for (double d : report[0].delta) CHECK(d == 0.0);
    const auto& names = responses();
    for (std::size_t r = 0; r < names.size(); ++r) {
      const double want = sweep.scenarios[1].summary[r].summary.mean - sweep.scenarios[0].summary[r].summary.mean;
      CHECK(report[1].delta[r] == want);
    }

    auto broken = sweep;
    broken.baseline = "gone";
    CHECK_THROWS_WITH_AS(hypothesis_report(broken), "missing baseline 'gone'", std::invalid_argument);
  }

  TEST_CASE("sweep outputs do not depend on jobs") {
    const auto spec = parse_sweep(small_sweep(), ".");
    const auto a = scratch("sweep-a");
    const auto b = scratch("sweep-b");
    write_sweep_outputs(a, run_sweep(spec, 1));
    write_sweep_outputs(b, run_sweep(spec, 4));
    const auto fa = files_under(a);
    REQUIRE(fa == files_under(b));
    CHECK(std::find(fa.begin(), fa.end(), fs::path("summary.csv")) != fa.end());
    CHECK(std::find(fa.begin(), fa.end(), fs::path("bots/rep2/trace.csv")) != fa.end());
    for (const auto& f : fa) {
      INFO(f.string());
      CHECK(slurp(a / f) == slurp(b / f));
    }

    std::istringstream summary(slurp(a / "summary.csv"));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(summary, line))
      if (!line.empty() && line[0] != '#' && line.rfind("scenario,", 0) != 0) ++rows;
    CHECK(rows == 2 * responses().size());
    fs::remove_all(a);
    fs::remove_all(b);
  }
}
