#pragma once

// CSV writers. Every file starts with `#` comment lines carrying the version,
// config hash and seed, so a result can be reproduced from its own header.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hospsim/config.hpp"
#include "hospsim/simulation.hpp"

namespace hospsim {

inline constexpr const char* kVersion = "1.0.0";

struct Provenance {
  std::uint64_t config_hash = 0;
  std::optional<std::uint64_t> seed;
  std::string overrides;  // ConfigOverrides::describe()
  std::string scenario;
  NetworkConfig network;
  /// Extra `key: value` header lines.
  std::vector<std::pair<std::string, std::string>> extra;
};

std::string hex_hash(std::uint64_t h);

void write_header(std::ostream& out, const Provenance& prov);

void write_trace_csv(std::ostream& out, const Provenance& prov, const std::vector<TraceRow>& trace);
void write_patients_csv(std::ostream& out, const Provenance& prov, const std::vector<Patient>& patients);
void write_network_csv(std::ostream& out, const Provenance& prov, const std::vector<NetworkDumpRow>& rows);

/// trace.csv, patients.csv and, when the run dumped its network, network.csv.
/// Creates `dir`; throws std::ios_base::failure on I/O trouble.
void write_run_files(const std::filesystem::path& dir, const Provenance& prov, const RunResult& r);

/// Opens for writing or throws std::ios_base::failure naming the path.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace hospsim
