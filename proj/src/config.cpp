#include "hospsim/config.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "hospsim/fls_parser.hpp"

namespace hospsim {

namespace {

using nlohmann::json;

/// Reads the fields of one JSON object, remembering which keys were consumed
/// so that leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", label()));
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    const std::string where = field(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", where));
      out = it->template get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(fmt::format("{}: expected a string", where));
      out = it->template get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", where));
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_unsigned()) {
          out = it->template get<T>();
        } else if (it->template get<std::int64_t>() < 0) {
          throw ConfigError(fmt::format("{}: must be >= 0", where));
        } else {
          out = static_cast<T>(it->template get<std::int64_t>());
        }
      } else {
        const auto v = it->template get<std::int64_t>();
        if (v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max())
          throw ConfigError(fmt::format("{}: out of range", where));
        out = static_cast<T>(v);
      }
    } else {
      if (!it->is_number()) throw ConfigError(fmt::format("{}: expected a number", where));
      out = it->template get<double>();
    }
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    auto it = j_.find(key);
    return ObjectReader(it == j_.end() ? kEmpty : *it, field(key));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(fmt::format("{}: unknown key", field(k.c_str())));
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }
  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", field, what));
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void ExperimentConfig::validate() const {
  const auto& p = population;
  require(p.doctors >= 0, "population.doctors", "must be >= 0");
  require(p.senior_doctors >= 0 && p.senior_doctors <= p.doctors, "population.seniorDoctors",
          "must lie in [0, population.doctors]");
  require(p.robots >= 0, "population.robots", "must be >= 0");
  require(p.humanlike_robots >= 0 && p.humanlike_robots <= p.robots, "population.humanlikeRobots",
          "must lie in [0, population.robots]");
  require(p.patients >= 0, "population.patients", "must be >= 0");
  require(p.beds >= 1, "population.beds", "must be >= 1");
  require(p.visitors >= 0 && p.visitors <= p.patients, "population.visitors",
          "must lie in [0, population.patients] (one visitor per patient)");

  require(finite(robot_look.humanlike_h) && robot_look.humanlike_h >= 0.5 && robot_look.humanlike_h <= 1.0,
          "robotLook.humanlikeH", "must lie in [0.5, 1]");
  require(finite(robot_look.robotlike_h) && robot_look.robotlike_h >= 0.0 && robot_look.robotlike_h < 0.5,
          "robotLook.robotlikeH", "must lie in [0, 0.5)");

  const auto& s = schedule;
  require(s.visit_window_start >= 0 && s.visit_window_start < 1440, "schedule.visitWindowStart",
          "must be a minute of the day in [0, 1439]");
  require(s.visit_window_minutes >= 1 && s.visit_window_start + s.visit_window_minutes <= 1440,
          "schedule.visitWindowMinutes", "must be >= 1 and end within the day");
  require(s.admission_minute >= 0 && s.admission_minute < 1440, "schedule.admissionMinute",
          "must be a minute of the day in [0, 1439]");
  require(finite(s.self_request_mean_minutes) && s.self_request_mean_minutes > 0, "schedule.selfRequestMeanMinutes",
          "must be > 0");
  require(finite(s.p_admit) && s.p_admit >= 0 && s.p_admit <= 1, "schedule.pAdmit", "must lie in [0, 1]");
  require(s.trace_interval_minutes >= 1, "schedule.traceIntervalMinutes", "must be >= 1");

  const auto& i = initial;
  require(finite(i.mental_lo) && finite(i.mental_hi) && 0 <= i.mental_lo && i.mental_lo <= i.mental_hi &&
              i.mental_hi <= 1,
          "initial.mentalLo", "need 0 <= mentalLo <= mentalHi <= 1");
  require(finite(i.trust_robots) && i.trust_robots >= 0 && i.trust_robots <= 1, "initial.trustRobots",
          "must lie in [0, 1]");
  require(finite(i.severity_lo) && finite(i.severity_hi) && 0 <= i.severity_lo && i.severity_lo <= i.severity_hi &&
              i.severity_hi <= 10,
          "initial.severityLo", "need 0 <= severityLo <= severityHi <= 10");

  require(finite(network.alpha_per_hour) && network.alpha_per_hour > 0 && network.alpha_per_hour <= 1,
          "network.alphaPerHour", "must lie in (0, 1]");
  require(finite(network.green_max) && network.green_max > 0, "network.greenMax", "must be > 0");
  require(finite(network.yellow_max) && network.yellow_max > network.green_max && network.yellow_max <= 2,
          "network.yellowMax", "must lie in (greenMax, 2]");

  try {
    effects.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  require(duration_days >= 0, "durationDays", "must be >= 0");
  require(replications >= 1, "replications", "must be >= 1");
}

std::string ConfigOverrides::describe() const {
  std::string out;
  auto add = [&](const char* name, const std::optional<int>& v) {
    if (v) out += fmt::format("{}{}={}", out.empty() ? "" : " ", name, *v);
  };
  add("days", days);
  add("doctors", doctors);
  add("robots", robots);
  add("patients", patients);
  add("beds", beds);
  return out;
}

void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& o) {
  auto& p = cfg.population;
  if (o.days) cfg.duration_days = *o.days;
  if (o.doctors) {
    p.doctors = *o.doctors;
    p.senior_doctors = std::clamp(p.senior_doctors, 0, std::max(p.doctors, 0));
  }
  if (o.robots) {
    p.robots = *o.robots;
    p.humanlike_robots = std::clamp(p.humanlike_robots, 0, std::max(p.robots, 0));
  }
  if (o.patients) {
    p.patients = *o.patients;
    p.visitors = std::clamp(p.visitors, 0, std::max(p.patients, 0));
  }
  if (o.beds) p.beds = *o.beds;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  const auto& p = c.population;
  const auto& s = c.schedule;
  const auto& e = c.effects;
  j = json{
      {"population",
       {{"doctors", p.doctors},
        {"seniorDoctors", p.senior_doctors},
        {"robots", p.robots},
        {"humanlikeRobots", p.humanlike_robots},
        {"patients", p.patients},
        {"beds", p.beds},
        {"visitors", p.visitors}}},
      {"robotLook", {{"humanlikeH", c.robot_look.humanlike_h}, {"robotlikeH", c.robot_look.robotlike_h}}},
      {"schedule",
       {{"visitWindowStart", s.visit_window_start},
        {"visitWindowMinutes", s.visit_window_minutes},
        {"admissionMinute", s.admission_minute},
        {"selfRequestMeanMinutes", s.self_request_mean_minutes},
        {"pAdmit", s.p_admit},
        {"preferDoctors", s.prefer_doctors},
        {"traceIntervalMinutes", s.trace_interval_minutes}}},
      {"initial",
       {{"mentalLo", c.initial.mental_lo},
        {"mentalHi", c.initial.mental_hi},
        {"trustRobots", c.initial.trust_robots},
        {"severityLo", c.initial.severity_lo},
        {"severityHi", c.initial.severity_hi}}},
      {"network",
       {{"alphaPerHour", c.network.alpha_per_hour},
        {"greenMax", c.network.green_max},
        {"yellowMax", c.network.yellow_max}}},
      {"effects",
       {{"doctorSatGain", e.doctor_sat_gain},
        {"robotSatBase", e.robot_sat_base},
        {"lookGain", e.look_gain},
        {"trustGain", e.trust_gain},
        {"opinionGain", e.opinion_gain},
        {"visitGainPerHour", e.visit_gain_per_hour},
        {"dailyDecay", e.daily_decay},
        {"severityRelief", e.severity_relief}}},
      {"fls",
       {{"doctor", c.fls.doctor},
        {"robot", c.fls.robot},
        {"visitorPropensity", c.fls.visitor_propensity},
        {"visitorDuration", c.fls.visitor_duration}}},
      {"durationDays", c.duration_days},
      {"seedBase", c.seed_base},
      {"replications", c.replications},
  };
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  ObjectReader root(j, "");
  {
    auto r = root.child("population");
    auto& p = c.population;
    r.get("doctors", p.doctors);
    r.get("seniorDoctors", p.senior_doctors);
    r.get("robots", p.robots);
    r.get("humanlikeRobots", p.humanlike_robots);
    r.get("patients", p.patients);
    r.get("beds", p.beds);
    r.get("visitors", p.visitors);
    r.finish();
  }
  {
    auto r = root.child("robotLook");
    r.get("humanlikeH", c.robot_look.humanlike_h);
    r.get("robotlikeH", c.robot_look.robotlike_h);
    r.finish();
  }
  {
    auto r = root.child("schedule");
    auto& s = c.schedule;
    r.get("visitWindowStart", s.visit_window_start);
    r.get("visitWindowMinutes", s.visit_window_minutes);
    r.get("admissionMinute", s.admission_minute);
    r.get("selfRequestMeanMinutes", s.self_request_mean_minutes);
    r.get("pAdmit", s.p_admit);
    r.get("preferDoctors", s.prefer_doctors);
    r.get("traceIntervalMinutes", s.trace_interval_minutes);
    r.finish();
  }
  {
    auto r = root.child("initial");
    r.get("mentalLo", c.initial.mental_lo);
    r.get("mentalHi", c.initial.mental_hi);
    r.get("trustRobots", c.initial.trust_robots);
    r.get("severityLo", c.initial.severity_lo);
    r.get("severityHi", c.initial.severity_hi);
    r.finish();
  }
  {
    auto r = root.child("network");
    r.get("alphaPerHour", c.network.alpha_per_hour);
    r.get("greenMax", c.network.green_max);
    r.get("yellowMax", c.network.yellow_max);
    r.finish();
  }
  {
    auto r = root.child("effects");
    auto& e = c.effects;
    r.get("doctorSatGain", e.doctor_sat_gain);
    r.get("robotSatBase", e.robot_sat_base);
    r.get("lookGain", e.look_gain);
    r.get("trustGain", e.trust_gain);
    r.get("opinionGain", e.opinion_gain);
    r.get("visitGainPerHour", e.visit_gain_per_hour);
    r.get("dailyDecay", e.daily_decay);
    r.get("severityRelief", e.severity_relief);
    r.finish();
  }
  {
    auto r = root.child("fls");
    r.get("doctor", c.fls.doctor);
    r.get("robot", c.fls.robot);
    r.get("visitorPropensity", c.fls.visitor_propensity);
    r.get("visitorDuration", c.fls.visitor_duration);
    r.finish();
  }
  root.get("durationDays", c.duration_days);
  root.get("seedBase", c.seed_base);
  root.get("replications", c.replications);
  root.finish();
}

ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  from_json(j, c);
  for (std::string* path : {&c.fls.doctor, &c.fls.robot, &c.fls.visitor_propensity, &c.fls.visitor_duration}) {
    if (path->empty() || base_dir.empty()) continue;
    const std::filesystem::path fp(*path);
    if (fp.is_relative()) *path = (base_dir / fp).lexically_normal().string();
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = fuzzy::read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
  return parse_config(j, path.parent_path());
}

FlsSet load_fls_set(const FlsPaths& paths) {
  auto text = [](const std::string& path, std::string_view fallback) {
    return path.empty() ? std::string(fallback) : fuzzy::read_text_file(path);
  };
  std::array<std::string, 4> src{
      text(paths.doctor, default_doctor_fls()),
      text(paths.robot, default_robot_fls()),
      text(paths.visitor_propensity, default_visitor_propensity_fls()),
      text(paths.visitor_duration, default_visitor_duration_fls()),
  };
  const char* names[] = {"doctor", "robot", "visitorPropensity", "visitorDuration"};
  auto load = [&](std::size_t k) {
    try {
      auto fs = fuzzy::load_fls_definition(src[k]);
      if (fs.inputs().size() != 2)
        throw fuzzy::FlsDefinitionError(fmt::format("expects exactly 2 inputs, found {}", fs.inputs().size()));
      return fs;
    } catch (const fuzzy::FlsError& e) {
      throw ConfigError(fmt::format("fls.{}: {}", names[k], e.what()));
    }
  };
  return FlsSet{load(0), load(1), load(2), load(3), std::move(src)};
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const ExperimentConfig& cfg, const FlsSet& fls) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  // 0xff never occurs in UTF-8, so it separates the parts unambiguously.
  auto feed = [&h](std::string_view s) { h = fnv1a("\xff", fnv1a(s, h)); };
  json j = cfg;
  // Paths are provenance only; the texts below are what matters.
  j.erase("fls");
  feed(j.dump());
  for (const auto& s : fls.sources) feed(s);
  return h;
}

}  // namespace hospsim
