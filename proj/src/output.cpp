#include "hospsim/output.hpp"

#include <fstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace hospsim {

std::string hex_hash(std::uint64_t h) { return fmt::format("{:016x}", h); }

void write_header(std::ostream& out, const Provenance& prov) {
  fmt::print(out, "# hospsim {}\n", kVersion);
  fmt::print(out, "# config_hash: {}\n", hex_hash(prov.config_hash));
  if (prov.seed) {
    fmt::print(out, "# seed: {}\n", *prov.seed);
  } else {
    fmt::print(out, "# seed: none\n");
  }
  if (!prov.scenario.empty()) fmt::print(out, "# scenario: {}\n", prov.scenario);
  fmt::print(out, "# overrides: {}\n", prov.overrides.empty() ? "none" : prov.overrides);
  fmt::print(out, "# edge_thresholds: green<={} yellow<={} alpha_per_hour={}\n", prov.network.green_max,
             prov.network.yellow_max, prov.network.alpha_per_hour);
  for (const auto& [k, v] : prov.extra) fmt::print(out, "# {}: {}\n", k, v);
}

void write_trace_csv(std::ostream& out, const Provenance& prov, const std::vector<TraceRow>& trace) {
  write_header(out, prov);
  out << "tick,day,meanMentalState,meanTrustRobots,meanOpinionDoctors,meanOpinionRobots,queueLength,"
         "edgesGreen,edgesYellow,edgesRed\n";
  for (const auto& r : trace)
    fmt::print(out, "{},{},{:.9f},{:.9f},{:.9f},{:.9f},{},{},{},{}\n", r.tick, r.day, r.mean_mental_state,
               r.mean_trust_robots, r.mean_opinion_doctors, r.mean_opinion_robots, r.queue_length, r.edges.green,
               r.edges.yellow, r.edges.red);
}

void write_patients_csv(std::ostream& out, const Provenance& prov, const std::vector<Patient>& patients) {
  write_header(out, prov);
  out << "id,state,bed,mentalState,trustRobots,opinionDoctors,opinionRobots,severity,lastVisitDay\n";
  for (const auto& p : patients) {
    fmt::print(out, "{},{},{},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{}\n", p.id, to_string(p.state()),
               p.bed ? std::to_string(*p.bed) : "", p.mental_state, p.trust_robots, p.opinion_doctors,
               p.opinion_robots, p.severity, p.last_visit_day ? std::to_string(*p.last_visit_day) : "");
  }
}

void write_network_csv(std::ostream& out, const Provenance& prov, const std::vector<NetworkDumpRow>& rows) {
  write_header(out, prov);
  out << "day,i,j,absDelta,color\n";
  for (const auto& r : rows)
    fmt::print(out, "{},{},{},{:.9f},{}\n", r.day, r.edge.i, r.edge.j, r.edge.gap, to_string(r.edge.color));
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  return out;
}

namespace {

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& w) {
  auto out = open_output(path);
  w(out);
  out.flush();
  if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

}  // namespace

void write_run_files(const std::filesystem::path& dir, const Provenance& prov, const RunResult& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, prov, r.trace); });
  write_file(dir / "patients.csv", [&](std::ostream& o) { write_patients_csv(o, prov, r.final_patients); });
  if (!r.network_dump.empty())
    write_file(dir / "network.csv", [&](std::ostream& o) { write_network_csv(o, prov, r.network_dump); });
}

}  // namespace hospsim
