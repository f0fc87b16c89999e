#include "hospsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace hospsim {

std::string_view to_string(Message m) {
  switch (m) {
    case Message::StartTreatment: return "StartTreatment";
    case Message::CheckUpDue: return "CheckUpDue";
    case Message::SelfRequest: return "SelfRequest";
    case Message::VisitorArrives: return "VisitorArrives";
    case Message::AssignBed: return "AssignBed";
    case Message::ReleaseBed: return "ReleaseBed";
  }
  return "?";
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::AdmissionRequested: return "AdmissionRequested";
    case Condition::BedFree: return "BedFree";
    case Condition::Recovered: return "Recovered";
  }
  return "?";
}

std::string_view to_string(const Trigger& t) {
  switch (t.kind) {
    case TriggerKind::Timeout: return "Timeout";
    case TriggerKind::Condition: return to_string(t.condition);
    case TriggerKind::Message: return to_string(t.message);
  }
  return "?";
}

std::string_view to_string(PatientState s) {
  switch (s) {
    case PatientState::AtHome: return "AtHome";
    case PatientState::WaitingForBed: return "WaitingForBed";
    case PatientState::InBedIdle: return "InBedIdle";
    case PatientState::InQueue: return "InQueue";
    case PatientState::BeingTreated: return "BeingTreated";
    case PatientState::BeingVisited: return "BeingVisited";
  }
  return "?";
}

std::string_view to_string(ProviderState s) { return s == ProviderState::Idle ? "Idle" : "Treating"; }
std::string_view to_string(VisitorState s) { return s == VisitorState::AtHome ? "AtHome" : "Visiting"; }
std::string_view to_string(BedState s) { return s == BedState::Free ? "Free" : "Occupied"; }

RobotStereotype::RobotStereotype(double humanlike) : humanlike_(humanlike) {
  if (!(humanlike >= 0.0 && humanlike <= 1.0))
    throw std::invalid_argument(fmt::format("humanlike variable {} outside [0, 1]", humanlike));
}

void EffectParams::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"doctorSatGain", doctor_sat_gain}, {"robotSatBase", robot_sat_base},
      {"lookGain", look_gain},            {"trustGain", trust_gain},
      {"opinionGain", opinion_gain},      {"visitGainPerHour", visit_gain_per_hour},
      {"dailyDecay", daily_decay},        {"severityRelief", severity_relief},
  };
  for (const auto& [name, v] : fields)
    if (!(std::isfinite(v) && v >= 0.0)) throw std::invalid_argument(fmt::format("effects.{} must be >= 0", name));
  if (!(doctor_sat_gain > robot_sat_base))
    throw std::invalid_argument("effects.doctorSatGain must exceed effects.robotSatBase");
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

int duration_from_crisp(const Provider& p, double crisp) {
  int minutes = static_cast<int>(std::lround(crisp));
  if (const auto* doc = std::get_if<DoctorStereotype>(&p.kind)) minutes += doc->extra_treat_minutes();
  return std::max(minutes, 1);
}

TreatmentPlan treatment_duration(const Provider& p, const Patient& patient, const fuzzy::FuzzySystem& fls) {
  const double in[] = {patient.severity, patient.mental_state};
  const auto c = fuzzy::infer(fls, in);
  return {duration_from_crisp(p, c.value), c.fallback};
}

Patient apply_treatment(Patient patient, const Provider& p, const EffectParams& params) {
  if (p.is_doctor()) {
    patient.mental_state = clamp01(patient.mental_state + params.doctor_sat_gain);
    patient.opinion_doctors = clamp_unit(patient.opinion_doctors + params.opinion_gain);
  } else {
    const double look = std::get<RobotStereotype>(p.kind).appearance_effect();
    patient.mental_state = clamp01(patient.mental_state + (params.robot_sat_base + params.look_gain * look));
    patient.trust_robots = clamp01(patient.trust_robots + params.trust_gain * look);
    patient.opinion_robots = clamp_unit(patient.opinion_robots + params.opinion_gain * look);
  }
  patient.severity = std::clamp(patient.severity - params.severity_relief, 0.0, 10.0);
  return patient;
}

double days_since_last_visit(const Patient& patient, int today) {
  if (!patient.last_visit_day) return 14.0;
  return std::clamp(static_cast<double>(today - *patient.last_visit_day), 0.0, 14.0);
}

VisitDecision visitor_decision(const Visitor& /*v*/, const Patient& patient, const VisitorFls& fls, int today,
                               int window_minutes) {
  const double in[] = {days_since_last_visit(patient, today), patient.mental_state};
  const auto propensity = fuzzy::infer(*fls.propensity, in);
  VisitDecision d;
  d.fuzzy_fallback = propensity.fallback;
  d.visit = decides_to_visit(propensity.value);
  if (!d.visit) return d;
  const auto duration = fuzzy::infer(*fls.duration, in);
  d.fuzzy_fallback = d.fuzzy_fallback || duration.fallback;
  d.minutes = std::clamp(static_cast<int>(std::lround(duration.value)), 1, std::max(window_minutes, 1));
  return d;
}

Patient apply_visit(Patient patient, int minutes, const EffectParams& params, int day) {
  if (minutes < 1) throw std::invalid_argument("a visit lasts at least one minute");
  patient.mental_state = clamp01(patient.mental_state + params.visit_gain_per_hour * (minutes / 60.0));
  patient.last_visit_day = day;
  return patient;
}

Patient apply_daily_decay(Patient patient, const EffectParams& params) {
  patient.mental_state = clamp01(patient.mental_state - params.daily_decay);
  return patient;
}

bool within_ranges(const Patient& p) {
  auto in = [](double x, double lo, double hi) { return x >= lo && x <= hi; };
  return in(p.mental_state, 0, 1) && in(p.trust_robots, 0, 1) && in(p.opinion_doctors, -1, 1) &&
         in(p.opinion_robots, -1, 1) && in(p.severity, 0, 10);
}

}  // namespace hospsim
