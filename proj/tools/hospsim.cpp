// hospsim: single runs, sweeps, FLS validation and FLS surface export.
//
// Exit codes: 0 success, 1 configuration or definition error, 2 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "hospsim/config.hpp"
#include "hospsim/experiments.hpp"
#include "hospsim/fls_parser.hpp"
#include "hospsim/fuzzy.hpp"
#include "hospsim/output.hpp"
#include "hospsim/simulation.hpp"

namespace fs = std::filesystem;
using namespace hospsim;

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  ConfigOverrides overrides;
  std::string output = "out";
  bool dump_network = false;
};

struct SweepArgs {
  std::string path;
  ConfigOverrides overrides;
  std::string output = "sweep-out";
  int jobs = 1;
  bool dump_network = false;
};

struct FlsArgs {
  std::string path;
  int grid = 11;
  std::string output;
};

void add_overrides(CLI::App* cmd, ConfigOverrides& o) {
  cmd->add_option("--days", o.days, "Simulated days")->check(CLI::PositiveNumber);
  cmd->add_option("--doctors", o.doctors, "Number of doctors")->check(CLI::NonNegativeNumber);
  cmd->add_option("--robots", o.robots, "Number of robots")->check(CLI::NonNegativeNumber);
  cmd->add_option("--patients", o.patients, "Number of patients")->check(CLI::NonNegativeNumber);
  cmd->add_option("--beds", o.beds, "Number of beds")->check(CLI::PositiveNumber);
}

void print_responses(const RunResult& r) {
  for (const auto& resp : responses()) fmt::print("{}: {:.6f}\n", resp.name, resp.get(r));
  fmt::print("treatments: doctors={} robots={} visits={} admissions={} discharges={}\n", r.treatments_by_doctors,
             r.treatments_by_robots, r.visits, r.admissions, r.discharges);
  if (r.log.total() > 0) {
    std::string s;
    for (const auto& [k, n] : r.log.counts()) s += fmt::format(" {}={}", k, n);
    fmt::print(std::cerr, "warnings:{}\n", s);
  }
}

int cmd_run(const RunArgs& a) {
  ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
  apply_overrides(cfg, a.overrides);
  cfg.validate();
  const FlsSet fls = load_fls_set(cfg.fls);
  const std::uint64_t seed = a.seed.value_or(cfg.seed_base);
  RunOptions opts;
  opts.dump_network = a.dump_network;
  const RunResult r = run_simulation(cfg, fls, seed, opts);

  Provenance prov;
  prov.config_hash = config_hash(cfg, fls);
  prov.seed = seed;
  prov.overrides = a.overrides.describe();
  prov.network = cfg.network;
  write_run_files(a.output, prov, r);
  fmt::print("seed: {}\nconfig_hash: {}\n", seed, hex_hash(prov.config_hash));
  print_responses(r);
  fmt::print("trace: {}\n", (fs::path(a.output) / "trace.csv").string());
  return 0;
}

int cmd_sweep(const SweepArgs& a) {
  const SweepSpec spec = load_sweep(a.path, a.overrides);
  RunOptions opts;
  opts.dump_network = a.dump_network;
  const SweepResult result = run_sweep(spec, a.jobs, opts);
  write_sweep_outputs(a.output, result, a.overrides);
  const auto report = hypothesis_report(result);
  fmt::print("scenario");
  for (const auto& r : responses()) fmt::print(" d_{}", r.name);
  fmt::print("\n");
  for (const auto& row : report) {
    fmt::print("{}", row.scenario);
    for (double d : row.delta) fmt::print(" {:+.6f}", d);
    fmt::print("\n");
  }
  fmt::print("summary: {}\nreport: {}\n", (fs::path(a.output) / "summary.csv").string(),
             (fs::path(a.output) / "report.csv").string());
  return 0;
}

std::string describe_mf(const fuzzy::MembershipFunction& mf) {
  const auto p = mf.parameters();
  return fmt::format("{}({})", mf.shape() == fuzzy::MembershipFunction::Shape::Triangular ? "tri" : "trap",
                     fmt::join(p, ", "));
}

void print_variable(const char* role, const fuzzy::LinguisticVariable& v) {
  fmt::print("  {} {} [{}, {}]\n", role, v.name(), v.universe().lo, v.universe().hi);
  for (const auto& t : v.terms()) fmt::print("    {} {}\n", t.name, describe_mf(t.mf));
}

int cmd_validate_fls(const FlsArgs& a) {
  const auto fls = fuzzy::load_fls_file(a.path);
  fmt::print("{}: valid\nvariables:\n", a.path);
  for (const auto& v : fls.inputs()) print_variable("input", v);
  print_variable("output", fls.output());
  fmt::print("rules: {}\n", fls.rules().size());
  for (std::size_t k = 0; k < fls.rules().size(); ++k) {
    const auto& r = fls.rules()[k];
    std::vector<std::string> parts;
    for (const auto& ant : r.antecedents) {
      const auto& v = fls.inputs()[ant.variable];
      parts.push_back(fmt::format("{} IS {}", v.name(), v.terms()[ant.term].name));
    }
    fmt::print("  {}: IF {} THEN {} IS {}\n", k + 1, fmt::join(parts, " AND "), fls.output().name(),
               fls.output().terms()[r.consequent].name);
  }
  fmt::print("completeness: ok, every grid point fires at least one rule\n");
  return 0;
}

std::vector<double> grid(const fuzzy::Interval& u, int n) {
  std::vector<double> g;
  if (n == 1) return {u.midpoint()};
  for (int i = 0; i < n; ++i) g.push_back(i == n - 1 ? u.hi : u.lo + u.width() * i / (n - 1));
  return g;
}

int cmd_fls_surface(const FlsArgs& a) {
  const std::string text = fuzzy::read_text_file(a.path);
  const auto fls = fuzzy::load_fls_definition(text);
  if (fls.inputs().size() > 2)
    throw fuzzy::FlsDefinitionError(fmt::format("surface needs 1 or 2 inputs, found {}", fls.inputs().size()));

  std::ofstream file;
  if (!a.output.empty()) file = open_output(a.output);
  std::ostream& out = a.output.empty() ? std::cout : file;
  Provenance prov;
  prov.config_hash = fnv1a(text);
  prov.extra.emplace_back("fls", fs::path(a.path).filename().string());
  prov.extra.emplace_back("grid", std::to_string(a.grid));
  write_header(out, prov);

  std::vector<std::string> cols;
  for (const auto& v : fls.inputs()) cols.push_back(v.name());
  cols.push_back(fls.output().name());
  out << fmt::format("{}\n", fmt::join(cols, ","));
  const auto g0 = grid(fls.inputs()[0].universe(), a.grid);
  if (fls.inputs().size() == 1) {
    for (double x : g0) {
      const double in[] = {x};
      fmt::print(out, "{:.9g},{:.9f}\n", x, fuzzy::infer(fls, in).value);
    }
  } else {
    const auto g1 = grid(fls.inputs()[1].universe(), a.grid);
    for (double x : g0)
      for (double y : g1) {
        const double in[] = {x, y};
        fmt::print(out, "{:.9g},{:.9g},{:.9f}\n", x, y, fuzzy::infer(fls, in).value);
      }
  }
  out.flush();
  if (!out) throw std::ios_base::failure("write failed: " + (a.output.empty() ? "stdout" : a.output));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-based hospital ward simulation with fuzzy decision making"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one simulation and write its trace files");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON); built-in defaults when omitted");
  run_cmd->add_option("--seed", run.seed, "Seed (defaults to seedBase)");
  add_overrides(run_cmd, run.overrides);
  run_cmd->add_option("--output", run.output, "Output directory")->capture_default_str();
  run_cmd->add_flag("--dump-network", run.dump_network, "Also write the per-day edge list");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every scenario of a sweep file");
  sweep_cmd->add_option("sweep", sweep.path, "Sweep file (JSON)")->required();
  add_overrides(sweep_cmd, sweep.overrides);
  sweep_cmd->add_option("--output", sweep.output, "Output directory")->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->add_flag("--dump-network", sweep.dump_network, "Also write per-day edge lists");

  FlsArgs validate;
  auto* validate_cmd = app.add_subcommand("validate-fls", "Check an FLS definition and print its contents");
  validate_cmd->add_option("path", validate.path, "FLS file")->required();

  FlsArgs surface;
  auto* surface_cmd = app.add_subcommand("fls-surface", "Write the crisp output over a grid of the input space");
  surface_cmd->add_option("path", surface.path, "FLS file")->required();
  surface_cmd->add_option("--grid", surface.grid, "Points per input")->check(CLI::PositiveNumber)->capture_default_str();
  surface_cmd->add_option("--output", surface.output, "CSV file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*validate_cmd) return cmd_validate_fls(validate);
    if (*surface_cmd) return cmd_fls_surface(surface);
  } catch (const std::ios_base::failure& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}
