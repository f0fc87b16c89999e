#include "hospsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "hospsim/fls_parser.hpp"
#include "hospsim/output.hpp"

namespace hospsim {

using nlohmann::json;

void parallel_for(std::size_t tasks, int jobs, const std::function<void(std::size_t)>& body) {
  if (tasks == 0) return;
  const std::size_t workers = std::min<std::size_t>(tasks, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::exception_ptr> errors(tasks);
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tasks; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::uint64_t replication_seed(const ExperimentConfig& cfg, int k) {
  return cfg.seed_base + static_cast<std::uint64_t>(k);
}

std::vector<RunResult> run_replications(const ExperimentConfig& cfg, const FlsSet& fls, int jobs, RunOptions options) {
  cfg.validate();
  std::vector<RunResult> out(static_cast<std::size_t>(cfg.replications));
  parallel_for(out.size(), jobs, [&](std::size_t k) {
    out[k] = run_simulation(cfg, fls, replication_seed(cfg, static_cast<int>(k)), options);
  });
  return out;
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  // Sorting first makes the sums independent of input order.
  std::sort(values.begin(), values.end());
  Summary s;
  s.n = values.size();
  s.min = values.front();
  s.max = values.back();
  const double n = static_cast<double>(s.n);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (s.n > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1));
  }
  return s;
}

const std::vector<Response>& responses() {
  static const std::vector<Response> list{
      {"finalMeanMentalState", [](const RunResult& r) { return r.final_mean_mental_state; }},
      {"finalMeanTrustRobots", [](const RunResult& r) { return r.final_mean_trust_robots; }},
      {"finalMeanOpinionDoctors", [](const RunResult& r) { return r.final_mean_opinion_doctors; }},
      {"finalMeanOpinionRobots", [](const RunResult& r) { return r.final_mean_opinion_robots; }},
      {"finalEdgesGreen", [](const RunResult& r) { return static_cast<double>(r.final_edges.green); }},
      {"finalEdgesYellow", [](const RunResult& r) { return static_cast<double>(r.final_edges.yellow); }},
      {"finalEdgesRed", [](const RunResult& r) { return static_cast<double>(r.final_edges.red); }},
      {"redEdgeFraction", [](const RunResult& r) { return r.red_edge_fraction; }},
  };
  return list;
}

std::vector<ResponseSummary> aggregate(const std::vector<RunResult>& results) {
  if (results.empty()) throw std::invalid_argument("aggregate: no results");
  std::vector<ResponseSummary> out;
  for (const auto& resp : responses()) {
    std::vector<double> v;
    v.reserve(results.size());
    for (const auto& r : results) v.push_back(resp.get(r));
    out.push_back({resp.name, summarize(std::move(v))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepSpec parse_sweep(const json& j, const std::filesystem::path& base_dir, const ConfigOverrides& overrides) {
  if (!j.is_object()) throw ConfigError("sweep: expected an object");
  for (const auto& [key, _] : j.items())
    if (key != "base" && key != "baseline" && key != "scenarios") throw ConfigError("sweep: unknown key '" + key + "'");

  json base = json::object();
  std::filesystem::path config_dir = base_dir;
  if (j.contains("base")) {
    const auto& b = j.at("base");
    if (b.is_string()) {
      const std::filesystem::path p = base_dir / b.get<std::string>();
      try {
        base = json::parse(fuzzy::read_text_file(p));
      } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: invalid JSON: {}", p.string(), e.what()));
      }
      config_dir = p.parent_path();
    } else if (b.is_object()) {
      base = b;
    } else {
      throw ConfigError("sweep.base: expected a path or an object");
    }
  }
  SweepSpec spec;
  if (!j.contains("baseline") || !j.at("baseline").is_string()) throw ConfigError("sweep.baseline: expected a name");
  spec.baseline = j.at("baseline").get<std::string>();
  if (!j.contains("scenarios") || !j.at("scenarios").is_array() || j.at("scenarios").empty())
    throw ConfigError("sweep.scenarios: expected a non-empty array");

  std::set<std::string> names;
  for (const auto& s : j.at("scenarios")) {
    if (!s.is_object() || !s.contains("name") || !s.at("name").is_string())
      throw ConfigError("sweep.scenarios: each scenario needs a name");
    Scenario sc;
    sc.name = s.at("name").get<std::string>();
    if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos || sc.name == "." || sc.name == "..")
      throw ConfigError(fmt::format("scenario '{}': name must be a plain directory name", sc.name));
    if (!names.insert(sc.name).second) throw ConfigError(fmt::format("scenario '{}': duplicate name", sc.name));
    for (const auto& [key, _] : s.items())
      if (key != "name" && key != "delta") throw ConfigError(fmt::format("scenario '{}': unknown key '{}'", sc.name, key));
    sc.delta = s.value("delta", json::object());
    if (!sc.delta.is_object()) throw ConfigError(fmt::format("scenario '{}': delta must be an object", sc.name));
    if (sc.delta.contains("seedBase") || sc.delta.contains("replications"))
      throw ConfigError(fmt::format("scenario '{}': seedBase and replications are shared by the whole sweep", sc.name));
    json merged = base;
    merged.merge_patch(sc.delta);
    try {
      sc.config = parse_config(merged, config_dir);
      apply_overrides(sc.config, overrides);
      sc.config.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("scenario '{}': {}", sc.name, e.what()));
    }
    spec.scenarios.push_back(std::move(sc));
  }
  if (!names.count(spec.baseline)) throw ConfigError(fmt::format("missing baseline '{}'", spec.baseline));
  return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  json j;
  try {
    j = json::parse(fuzzy::read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
  return parse_sweep(j, path.parent_path(), overrides);
}

SweepResult run_sweep(const SweepSpec& spec, int jobs, RunOptions options) {
  SweepResult out;
  out.baseline = spec.baseline;
  // Load every FLS before the first run so a bad file rejects the sweep.
  std::vector<FlsSet> fls;
  for (const auto& sc : spec.scenarios) {
    try {
      fls.push_back(load_fls_set(sc.config.fls));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("scenario '{}': {}", sc.name, e.what()));
    }
    ScenarioResult r;
    r.name = sc.name;
    r.config = sc.config;
    r.config_hash = config_hash(sc.config, fls.back());
    r.runs.resize(static_cast<std::size_t>(sc.config.replications));
    out.scenarios.push_back(std::move(r));
  }
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t s = 0; s < out.scenarios.size(); ++s)
    for (std::size_t k = 0; k < out.scenarios[s].runs.size(); ++k) tasks.emplace_back(s, k);
  parallel_for(tasks.size(), jobs, [&](std::size_t t) {
    const auto [s, k] = tasks[t];
    auto& sc = out.scenarios[s];
    sc.runs[k] = run_simulation(sc.config, fls[s], replication_seed(sc.config, static_cast<int>(k)), options);
  });
  for (auto& sc : out.scenarios) sc.summary = aggregate(sc.runs);
  return out;
}

std::vector<ReportRow> hypothesis_report(const SweepResult& sweep) {
  auto base = std::find_if(sweep.scenarios.begin(), sweep.scenarios.end(),
                           [&](const ScenarioResult& s) { return s.name == sweep.baseline; });
  if (base == sweep.scenarios.end()) throw std::invalid_argument(fmt::format("missing baseline '{}'", sweep.baseline));
  std::vector<ReportRow> rows;
  const std::size_t red = responses().size() - 1;
  for (const auto& sc : sweep.scenarios) {
    ReportRow row{sc.name, {}, sc.summary[red].summary.mean};
    for (std::size_t k = 0; k < sc.summary.size(); ++k)
      row.delta.push_back(sc.summary[k].summary.mean - base->summary[k].summary.mean);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& sweep, const ConfigOverrides& overrides) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create " + dir.string() + ": " + ec.message());
  if (sweep.scenarios.empty()) return;

  const auto& first = sweep.scenarios.front().config;
  Provenance prov;
  prov.overrides = overrides.describe();
  prov.network = first.network;
  prov.seed = first.seed_base;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& sc : sweep.scenarios) {
    h = fnv1a(sc.name + "=" + hex_hash(sc.config_hash) + ";", h);
    prov.extra.emplace_back("scenario " + sc.name, "config_hash " + hex_hash(sc.config_hash));
  }
  prov.config_hash = h;
  prov.extra.emplace_back("replications", std::to_string(first.replications));
  prov.extra.emplace_back("baseline", sweep.baseline);

  {
    auto out = open_output(dir / "summary.csv");
    write_header(out, prov);
    out << "scenario,response,n,mean,std,min,max\n";
    for (const auto& sc : sweep.scenarios)
      for (const auto& rs : sc.summary)
        fmt::print(out, "{},{},{},{:.9f},{:.9f},{:.9f},{:.9f}\n", sc.name, rs.response, rs.summary.n, rs.summary.mean,
                   rs.summary.std, rs.summary.min, rs.summary.max);
    if (!out) throw std::ios_base::failure("write failed: " + (dir / "summary.csv").string());
  }
  {
    auto out = open_output(dir / "report.csv");
    write_header(out, prov);
    out << "scenario";
    for (const auto& r : responses()) out << ",delta_" << r.name;
    out << ",redEdgeFraction\n";
    for (const auto& row : hypothesis_report(sweep)) {
      out << row.scenario;
      for (double d : row.delta) fmt::print(out, ",{:.9f}", d);
      fmt::print(out, ",{:.9f}\n", row.red_edge_fraction);
    }
    if (!out) throw std::ios_base::failure("write failed: " + (dir / "report.csv").string());
  }
  for (const auto& sc : sweep.scenarios) {
    for (std::size_t k = 0; k < sc.runs.size(); ++k) {
      Provenance p;
      p.config_hash = sc.config_hash;
      p.seed = sc.runs[k].seed;
      p.overrides = prov.overrides;
      p.scenario = sc.name;
      p.network = sc.config.network;
      write_run_files(dir / sc.name / fmt::format("rep{}", k), p, sc.runs[k]);
    }
  }
}

}  // namespace hospsim
