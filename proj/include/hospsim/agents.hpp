#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <variant>

#include "hospsim/fuzzy.hpp"
#include "hospsim/statechart.hpp"

namespace hospsim {

using AgentId = int;

// ---------------------------------------------------------------------------
// States and transition tables. These are reconstructions: the source state
// diagrams only fix the agent set and the three trigger kinds.

enum class PatientState { AtHome, WaitingForBed, InBedIdle, InQueue, BeingTreated, BeingVisited };
enum class ProviderState { Idle, Treating };
enum class VisitorState { AtHome, Visiting };
enum class BedState { Free, Occupied };

std::string_view to_string(PatientState s);
std::string_view to_string(ProviderState s);
std::string_view to_string(VisitorState s);
std::string_view to_string(BedState s);

template <>
struct TransitionTable<PatientState> {
  using S = PatientState;
  static constexpr std::array<Transition<S>, 10> rows{{
      {S::AtHome, Trigger::when(Condition::AdmissionRequested), S::WaitingForBed},
      {S::WaitingForBed, Trigger::when(Condition::BedFree), S::InBedIdle},
      {S::InBedIdle, Trigger::on(Message::CheckUpDue), S::InQueue},
      {S::InBedIdle, Trigger::on(Message::SelfRequest), S::InQueue},
      {S::InQueue, Trigger::on(Message::StartTreatment), S::BeingTreated},
      {S::BeingTreated, Trigger::timeout(), S::InBedIdle},
      {S::InBedIdle, Trigger::on(Message::VisitorArrives), S::BeingVisited},
      // A queued patient gives up its place while visited; the request is re-raised afterwards.
      {S::InQueue, Trigger::on(Message::VisitorArrives), S::BeingVisited},
      {S::BeingVisited, Trigger::timeout(), S::InBedIdle},
      {S::InBedIdle, Trigger::when(Condition::Recovered), S::AtHome},
  }};
};

template <>
struct TransitionTable<ProviderState> {
  using S = ProviderState;
  static constexpr std::array<Transition<S>, 2> rows{{
      {S::Idle, Trigger::on(Message::StartTreatment), S::Treating},
      {S::Treating, Trigger::timeout(), S::Idle},
  }};
};

template <>
struct TransitionTable<VisitorState> {
  using S = VisitorState;
  // AtHome -> Visiting is the daily-window timeout, taken only when the visit decision says yes.
  static constexpr std::array<Transition<S>, 2> rows{{
      {S::AtHome, Trigger::timeout(), S::Visiting},
      {S::Visiting, Trigger::timeout(), S::AtHome},
  }};
};

template <>
struct TransitionTable<BedState> {
  using S = BedState;
  static constexpr std::array<Transition<S>, 2> rows{{
      {S::Free, Trigger::on(Message::AssignBed), S::Occupied},
      {S::Occupied, Trigger::on(Message::ReleaseBed), S::Free},
  }};
};

// ---------------------------------------------------------------------------
// Agents

enum class RequestKind { CheckUp, SelfRequest };

struct Patient {
  AgentId id = 0;
  std::optional<int> bed;
  double mental_state = 0.5;     // [0, 1]
  double trust_robots = 0.5;     // [0, 1]
  double opinion_doctors = 0.0;  // [-1, 1]
  double opinion_robots = 0.0;   // [-1, 1]
  double severity = 5.0;         // [0, 10]
  std::optional<int> last_visit_day;
  Statechart<PatientState> chart{PatientState::AtHome};

  PatientState state() const noexcept { return chart.state(); }
  bool in_bed() const noexcept { return bed.has_value(); }
};

enum class DoctorLevel { Senior, Junior };

struct DoctorStereotype {
  DoctorLevel level = DoctorLevel::Senior;

  /// Minutes added on top of the fuzzy treatment duration.
  int extra_treat_minutes() const noexcept { return level == DoctorLevel::Junior ? 10 : 0; }
};

enum class RobotLook { Humanlike, Robotlike };

/// Humanlike robots have h in [0.5, 1]; robotlike robots have h in [0, 0.5).
class RobotStereotype {
 public:
  explicit RobotStereotype(double humanlike);

  RobotLook look() const noexcept { return humanlike_ >= 0.5 ? RobotLook::Humanlike : RobotLook::Robotlike; }
  double humanlike() const noexcept { return humanlike_; }
  /// 2h - 1: positive for humanlike, negative for robotlike, zero at h = 0.5.
  double appearance_effect() const noexcept { return 2.0 * humanlike_ - 1.0; }

 private:
  double humanlike_;
};

struct TreatmentSession {
  AgentId patient;
  int remaining_minutes;
};

struct Provider {
  AgentId id = 0;
  std::variant<DoctorStereotype, RobotStereotype> kind = DoctorStereotype{};
  Statechart<ProviderState> chart{ProviderState::Idle};
  std::optional<TreatmentSession> session;

  bool is_doctor() const noexcept { return std::holds_alternative<DoctorStereotype>(kind); }
  bool is_robot() const noexcept { return std::holds_alternative<RobotStereotype>(kind); }
  ProviderState state() const noexcept { return chart.state(); }
};

struct Visitor {
  AgentId id = 0;
  AgentId patient = 0;
  Statechart<VisitorState> chart{VisitorState::AtHome};
  int remaining_minutes = 0;

  VisitorState state() const noexcept { return chart.state(); }
};

struct Bed {
  int index = 0;
  std::optional<AgentId> occupant;
  Statechart<BedState> chart{BedState::Free};

  BedState state() const noexcept { return chart.state(); }
};

/// Effect magnitudes. Only their signs and the doctor > robot satisfaction
/// ordering are anchored; the values are tunable.
struct EffectParams {
  double doctor_sat_gain = 0.10;
  double robot_sat_base = 0.05;
  double look_gain = 0.05;
  double trust_gain = 0.05;
  double opinion_gain = 0.05;
  double visit_gain_per_hour = 0.08;
  double daily_decay = 0.02;
  double severity_relief = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Decisions and effects

/// Fuzzy treatment minutes for this provider: rounds the crisp output and adds
/// the doctor's stereotype extra time. Never below 1.
int duration_from_crisp(const Provider& p, double crisp);

struct TreatmentPlan {
  int minutes;
  bool fuzzy_fallback;  // no rule fired; universe midpoint used
};

TreatmentPlan treatment_duration(const Provider& p, const Patient& patient, const fuzzy::FuzzySystem& fls);

Patient apply_treatment(Patient patient, const Provider& p, const EffectParams& params);

struct VisitorFls {
  const fuzzy::FuzzySystem* propensity;
  const fuzzy::FuzzySystem* duration;
};

struct VisitDecision {
  bool visit = false;
  int minutes = 0;
  bool fuzzy_fallback = false;
};

/// Days since the last visit as seen by the visitor FLS; never-visited
/// patients count as the longest gap.
double days_since_last_visit(const Patient& patient, int today);

/// Ties at the threshold visit.
constexpr bool decides_to_visit(double propensity) noexcept { return propensity >= 0.5; }

/// Visit iff decides_to_visit(propensity output); duration is rounded, at least 1
/// and capped at `window_minutes`. Duration is not evaluated when not visiting.
VisitDecision visitor_decision(const Visitor& v, const Patient& patient, const VisitorFls& fls, int today,
                               int window_minutes = 60);

/// Requires minutes >= 1 (std::invalid_argument otherwise).
Patient apply_visit(Patient patient, int minutes, const EffectParams& params, int day);

Patient apply_daily_decay(Patient patient, const EffectParams& params);

/// True when every bounded field lies in its declared range.
bool within_ranges(const Patient& p);

}  // namespace hospsim
