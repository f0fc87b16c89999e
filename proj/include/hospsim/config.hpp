#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hospsim/agents.hpp"
#include "hospsim/fuzzy.hpp"

namespace hospsim {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PopulationConfig {
  int doctors = 4;
  int senior_doctors = 2;  // the rest are junior
  int robots = 2;
  int humanlike_robots = 1;  // the rest are robotlike
  int patients = 20;
  int beds = 12;
  int visitors = 10;  // visitor k visits patient k
};

struct RobotLookConfig {
  double humanlike_h = 0.8;  // [0.5, 1]
  double robotlike_h = 0.2;  // [0, 0.5)
};

struct ScheduleConfig {
  int visit_window_start = 14 * 60;
  int visit_window_minutes = 60;
  int admission_minute = 8 * 60;
  double self_request_mean_minutes = 8 * 60;
  double p_admit = 0.2;
  bool prefer_doctors = false;
  int trace_interval_minutes = 60;
};

struct InitialConfig {
  double mental_lo = 0.4;
  double mental_hi = 0.8;
  double trust_robots = 0.5;
  double severity_lo = 3.0;
  double severity_hi = 8.0;
};

struct NetworkConfig {
  double alpha_per_hour = 0.05;
  double green_max = 0.1;
  double yellow_max = 0.3;
};

/// Paths to FLS definition files; empty means the built-in default.
struct FlsPaths {
  std::string doctor;
  std::string robot;
  std::string visitor_propensity;
  std::string visitor_duration;
};

struct ExperimentConfig {
  PopulationConfig population;
  RobotLookConfig robot_look;
  ScheduleConfig schedule;
  InitialConfig initial;
  NetworkConfig network;
  EffectParams effects;
  FlsPaths fls;
  int duration_days = 30;
  std::uint64_t seed_base = 1;
  int replications = 1;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Command-line style overrides; unset fields leave the config untouched.
struct ConfigOverrides {
  std::optional<int> days;
  std::optional<int> doctors;
  std::optional<int> robots;
  std::optional<int> patients;
  std::optional<int> beds;

  bool empty() const noexcept { return !days && !doctors && !robots && !patients && !beds; }
  /// "doctors=0 robots=4", in a fixed field order.
  std::string describe() const;
};

/// Applies overrides. Stereotype splits are clamped to the new totals.
void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& o);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Parses and validates; FLS paths are resolved against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
/// std::ios_base::failure when unreadable, ConfigError when invalid.
ExperimentConfig load_config(const std::filesystem::path& path);

/// The four fuzzy systems a run needs.
struct FlsSet {
  fuzzy::FuzzySystem doctor;
  fuzzy::FuzzySystem robot;
  fuzzy::FuzzySystem visitor_propensity;
  fuzzy::FuzzySystem visitor_duration;
  /// Definition texts in the order above, kept for provenance hashing.
  std::array<std::string, 4> sources;
};

/// Shipped default definition texts.
std::string_view default_doctor_fls();
std::string_view default_robot_fls();
std::string_view default_visitor_propensity_fls();
std::string_view default_visitor_duration_fls();

FlsSet load_fls_set(const FlsPaths& paths);

/// 64-bit FNV-1a, chainable through `h`.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// 64-bit FNV-1a over the canonical JSON of the config and the FLS texts.
std::uint64_t config_hash(const ExperimentConfig& cfg, const FlsSet& fls);

}  // namespace hospsim
