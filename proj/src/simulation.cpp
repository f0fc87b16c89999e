#include "hospsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

namespace hospsim {

// ---------------------------------------------------------------------------
// Queue and log

bool TreatmentQueue::push(AgentId patient, RequestKind kind, long tick) {
  if (contains(patient)) return false;
  entries_.push_back({patient, kind, tick});
  return true;
}

std::optional<QueueEntry> TreatmentQueue::pop() {
  if (entries_.empty()) return std::nullopt;
  QueueEntry e = entries_.front();
  entries_.pop_front();
  return e;
}

std::optional<QueueEntry> TreatmentQueue::remove(AgentId patient) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const QueueEntry& e) { return e.patient == patient; });
  if (it == entries_.end()) return std::nullopt;
  QueueEntry e = *it;
  entries_.erase(it);
  return e;
}

bool TreatmentQueue::contains(AgentId patient) const noexcept {
  return std::any_of(entries_.begin(), entries_.end(), [&](const QueueEntry& e) { return e.patient == patient; });
}

void RunLog::warn(const std::string& category, std::string message) {
  ++counts_[category];
  ++total_;
  if (messages_.size() < kKeptMessages) messages_.push_back(category + ": " + std::move(message));
}

std::size_t RunLog::count(const std::string& category) const {
  auto it = counts_.find(category);
  return it == counts_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// Initial state

namespace {

std::size_t idx(AgentId id) { return static_cast<std::size_t>(id); }

Message request_message(RequestKind k) {
  return k == RequestKind::CheckUp ? Message::CheckUpDue : Message::SelfRequest;
}

std::optional<RequestKind> request_kind(const Trigger& t) {
  if (t.kind != TriggerKind::Message) return std::nullopt;
  if (t.message == Message::CheckUpDue) return RequestKind::CheckUp;
  if (t.message == Message::SelfRequest) return RequestKind::SelfRequest;
  return std::nullopt;
}

/// Ordering among simultaneous patient triggers: kind priority first, then a
/// fixed precedence among messages.
int rank(const Trigger& t) {
  int r = priority(t) * 10;
  if (t.kind == TriggerKind::Message) {
    switch (t.message) {
      case Message::StartTreatment: r += 4; break;
      case Message::VisitorArrives: r += 3; break;
      case Message::CheckUpDue: r += 2; break;
      case Message::SelfRequest: r += 1; break;
      default: break;
    }
  }
  return r;
}

std::string when(const RunState& s) {
  return fmt::format("day {} {:02}:{:02}", s.clock.day(), s.clock.minute_of_day() / 60, s.clock.minute_of_day() % 60);
}

std::vector<std::size_t> identity(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

RunState::RunState(const ExperimentConfig& cfg)
    : network(cfg.population.beds, {cfg.network.green_max, cfg.network.yellow_max}, cfg.network.alpha_per_hour),
      config(cfg) {}

RunState initialize_state(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RunState s(cfg);
  const auto& pop = cfg.population;

  for (int b = 0; b < pop.beds; ++b) s.beds.push_back(Bed{b, std::nullopt, Statechart<BedState>(BedState::Free)});

  for (int i = 0; i < pop.patients; ++i) {
    RandomStream init(seed, Substream::InitialValues, static_cast<std::uint32_t>(i));
    Patient p;
    p.id = i;
    p.mental_state = init.uniform(cfg.initial.mental_lo, cfg.initial.mental_hi);
    p.severity = init.uniform(cfg.initial.severity_lo, cfg.initial.severity_hi);
    p.trust_robots = cfg.initial.trust_robots;
    const int checkup = static_cast<int>(init.below(kMinutesPerDay));
    if (i < pop.beds) {
      p.bed = i;
      p.chart = Statechart<PatientState>(PatientState::InBedIdle);
      s.beds[idx(i)].occupant = i;
      s.beds[idx(i)].chart = Statechart<BedState>(BedState::Occupied);
    }
    s.patients.push_back(p);
    s.schedules.push_back(PatientSchedule{checkup, std::nullopt, std::nullopt, false, 0, 0,
                                          RandomStream(seed, Substream::Arrivals, static_cast<std::uint32_t>(i))});
  }

  AgentId next = 0;
  for (int k = 0; k < pop.doctors; ++k) {
    Provider p;
    p.id = next++;
    p.kind = DoctorStereotype{k < pop.senior_doctors ? DoctorLevel::Senior : DoctorLevel::Junior};
    s.providers.push_back(p);
  }
  for (int k = 0; k < pop.robots; ++k) {
    Provider p;
    p.id = next++;
    p.kind = RobotStereotype(k < pop.humanlike_robots ? cfg.robot_look.humanlike_h : cfg.robot_look.robotlike_h);
    s.providers.push_back(p);
  }

  s.visitor_of.assign(idx(pop.patients), std::nullopt);
  for (int k = 0; k < pop.visitors; ++k) {
    s.visitors.push_back(Visitor{k, k, Statechart<VisitorState>(VisitorState::AtHome), 0});
    s.visitor_of[idx(k)] = k;
  }

  s.patient_order = identity(s.patients.size());
  s.provider_order = identity(s.providers.size());
  s.visitor_order = identity(s.visitors.size());
  s.candidates.resize(s.patients.size());
  s.visit_offer.resize(s.patients.size());
  return s;
}

// ---------------------------------------------------------------------------
// Phases exposed as operations

bool enqueue_request(RunState& s, AgentId id, RequestKind kind) {
  Patient& p = s.patients.at(idx(id));
  if (s.queue.contains(id)) {
    ++s.accounting.duplicates;
    s.log.warn("duplicate-request", fmt::format("{}: patient {} already queued", when(s), id));
    return false;
  }
  const auto r = p.chart.fire(Trigger::on(request_message(kind)), s.clock.tick);
  if (r != FireResult::Fired) {
    s.log.warn("request-not-enabled",
               fmt::format("{}: patient {} cannot queue from {}", when(s), id, to_string(p.state())));
    return false;
  }
  s.queue.push(id, kind, s.clock.tick);
  ++s.accounting.enqueued;
  return true;
}

namespace {

std::optional<std::size_t> pick_provider(const RunState& s) {
  const std::size_t n = s.providers.size();
  const long now = s.clock.tick;
  auto idle = [&](std::size_t k) {
    const auto& p = s.providers[k];
    return p.state() == ProviderState::Idle && !p.chart.fired_at(now);
  };
  if (s.config.schedule.prefer_doctors) {
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t k = (s.next_provider + step) % n;
      if (s.providers[k].is_doctor() && idle(k)) return k;
    }
  }
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t k = (s.next_provider + step) % n;
    if (idle(k)) return k;
  }
  return std::nullopt;
}

}  // namespace

std::vector<Assignment> dispatch(RunState& s, const FlsSet& fls) {
  std::vector<Assignment> out;
  const long now = s.clock.tick;
  while (const QueueEntry* head = s.queue.front()) {
    Patient& p = s.patients[idx(head->patient)];
    // Requests queued during this tick wait for the next one, and so does
    // everything behind them.
    if (p.chart.fired_at(now)) break;
    const auto chosen = pick_provider(s);
    if (!chosen) break;
    Provider& pr = s.providers[*chosen];
    const auto plan = treatment_duration(pr, p, pr.is_doctor() ? fls.doctor : fls.robot);
    if (plan.fuzzy_fallback)
      s.log.warn("no-rule-fired", fmt::format("{}: treatment FLS fell back to midpoint for patient {}", when(s), p.id));
    if (pr.chart.fire(Trigger::on(Message::StartTreatment), now) != FireResult::Fired ||
        p.chart.fire(Trigger::on(Message::StartTreatment), now) != FireResult::Fired) {
      // Unreachable while the queue only holds InQueue patients.
      s.log.warn("dispatch-failed", fmt::format("{}: patient {} could not start treatment", when(s), p.id));
      break;
    }
    s.queue.pop();
    pr.session = TreatmentSession{p.id, plan.minutes};
    s.next_provider = (*chosen + 1) % s.providers.size();
    ++s.accounting.dispatched;
    out.push_back({pr.id, p.id, plan.minutes});
  }
  return out;
}

std::vector<VisitEvent> visitor_window(RunState& s, const FlsSet& fls) {
  std::vector<VisitEvent> events;
  const auto& sched = s.config.schedule;
  if (s.clock.minute_of_day() != sched.visit_window_start) return events;
  const long now = s.clock.tick;
  const VisitorFls vfls{&fls.visitor_propensity, &fls.visitor_duration};
  for (std::size_t k : s.visitor_order) {
    const Visitor& v = s.visitors[k];
    Patient& p = s.patients[idx(v.patient)];
    VisitEvent ev{v.id, p.id, VisitOutcome::Declined};
    if (v.state() != VisitorState::AtHome) {
      ev.outcome = VisitOutcome::PatientBusy;
    } else if (!p.in_bed()) {
      ev.outcome = VisitOutcome::PatientNotInBed;
    } else if (p.state() == PatientState::BeingTreated) {
      ev.outcome = VisitOutcome::PatientInTreatment;
      s.log.warn("visit-skipped", fmt::format("{}: patient {} is in treatment", when(s), p.id));
    } else if (p.chart.fired_at(now) ||
               (p.state() != PatientState::InBedIdle && p.state() != PatientState::InQueue)) {
      ev.outcome = VisitOutcome::PatientBusy;
      s.log.warn("visit-skipped", fmt::format("{}: patient {} is busy ({})", when(s), p.id, to_string(p.state())));
    } else {
      const auto d = visitor_decision(v, p, vfls, s.clock.day(), sched.visit_window_minutes);
      if (d.fuzzy_fallback)
        s.log.warn("no-rule-fired", fmt::format("{}: visitor FLS fell back to midpoint for visitor {}", when(s), v.id));
      if (d.visit) {
        ev.outcome = VisitOutcome::Offered;
        ev.minutes = d.minutes;
        s.candidates[idx(p.id)].push_back(Trigger::on(Message::VisitorArrives));
        s.visit_offer[idx(p.id)] = std::pair{v.id, d.minutes};
      }
    }
    events.push_back(ev);
  }
  return events;
}

void arrivals(RunState& s) {
  const long now = s.clock.tick;
  const int minute = s.clock.minute_of_day();
  const auto& cfg = s.config;
  for (std::size_t i : s.patient_order) {
    Patient& p = s.patients[i];
    PatientSchedule& sched = s.schedules[i];
    const PatientState state = p.state();
    const bool fresh = !p.chart.fired_at(now);

    if (minute == cfg.schedule.admission_minute && state == PatientState::AtHome && !sched.admission_requested) {
      if (sched.rng.bernoulli(cfg.schedule.p_admit)) {
        sched.admission_requested = true;
        if (p.severity <= 0.0) p.severity = sched.rng.uniform(cfg.initial.severity_lo, cfg.initial.severity_hi);
      }
    }
    if (!p.in_bed()) {
      sched.next_self_request.reset();
      sched.pending_request.reset();
      continue;
    }

    std::optional<RequestKind> due;
    if (state == PatientState::InBedIdle && fresh) {
      if (!sched.next_self_request) {
        const double gap = sched.rng.exponential(cfg.schedule.self_request_mean_minutes);
        sched.next_self_request = now + std::max(1L, std::lround(gap));
      } else if (*sched.next_self_request <= now) {
        due = RequestKind::SelfRequest;
        sched.next_self_request.reset();
      }
    } else {
      sched.next_self_request.reset();
    }
    if (sched.checkup_minute && minute == *sched.checkup_minute) {
      if (due) ++s.accounting.absorbed;
      due = RequestKind::CheckUp;
    }
    if (sched.pending_request && state == PatientState::InBedIdle && fresh) {
      if (due) {
        ++s.accounting.absorbed;
      } else {
        due = sched.pending_request;
      }
      sched.pending_request.reset();
    }
    if (!due) continue;

    if (state == PatientState::InBedIdle && fresh) {
      s.candidates[i].push_back(Trigger::on(request_message(*due)));
    } else if (state == PatientState::InQueue || state == PatientState::BeingTreated) {
      ++s.accounting.absorbed;
    } else if (!sched.pending_request) {
      sched.pending_request = due;
    } else {
      ++s.accounting.absorbed;
    }
  }
}

// ---------------------------------------------------------------------------
// Invariants

std::vector<std::string> check_invariants(const RunState& s) {
  std::vector<std::string> v;
  const auto& sched = s.config.schedule;
  std::vector<int> treated_by(s.patients.size(), 0);
  for (const auto& pr : s.providers) {
    if (pr.state() == ProviderState::Treating) {
      if (!pr.session || pr.session->remaining_minutes <= 0) {
        v.push_back(fmt::format("provider {} treating without a live session", pr.id));
        continue;
      }
      const auto pid = pr.session->patient;
      if (pid < 0 || idx(pid) >= s.patients.size()) {
        v.push_back(fmt::format("provider {} treats unknown patient {}", pr.id, pid));
        continue;
      }
      if (++treated_by[idx(pid)] > 1) v.push_back(fmt::format("patient {} treated by several providers", pid));
      if (s.patients[idx(pid)].state() != PatientState::BeingTreated)
        v.push_back(fmt::format("provider {} treats patient {} who is {}", pr.id, pid,
                                to_string(s.patients[idx(pid)].state())));
    } else if (pr.session) {
      v.push_back(fmt::format("idle provider {} still holds a session", pr.id));
    }
  }

  std::vector<int> visited_by(s.patients.size(), 0);
  const int minute = s.clock.minute_of_day();
  for (const auto& vi : s.visitors) {
    if (vi.state() != VisitorState::Visiting) continue;
    if (minute < sched.visit_window_start || minute > sched.visit_window_start + sched.visit_window_minutes)
      v.push_back(fmt::format("visitor {} present at minute {} outside the visiting window", vi.id, minute));
    ++visited_by[idx(vi.patient)];
    if (s.patients[idx(vi.patient)].state() != PatientState::BeingVisited)
      v.push_back(fmt::format("visitor {} visiting patient {} who is {}", vi.id, vi.patient,
                              to_string(s.patients[idx(vi.patient)].state())));
  }

  std::set<AgentId> occupants;
  for (const auto& b : s.beds) {
    if ((b.state() == BedState::Occupied) != b.occupant.has_value())
      v.push_back(fmt::format("bed {} state {} disagrees with occupant", b.index, to_string(b.state())));
    if (!b.occupant) continue;
    if (!occupants.insert(*b.occupant).second) v.push_back(fmt::format("patient {} occupies two beds", *b.occupant));
    const auto& p = s.patients[idx(*b.occupant)];
    if (p.bed != b.index) v.push_back(fmt::format("bed {} occupant {} points at another bed", b.index, p.id));
  }

  for (const auto& p : s.patients) {
    const auto st = p.state();
    const bool home = st == PatientState::AtHome || st == PatientState::WaitingForBed;
    if (home == p.bed.has_value())
      v.push_back(fmt::format("patient {} in state {} has bed {}", p.id, to_string(st), p.bed ? *p.bed : -1));
    if (p.bed && (*p.bed < 0 || idx(*p.bed) >= s.beds.size() || s.beds[idx(*p.bed)].occupant != p.id))
      v.push_back(fmt::format("patient {} bed {} not registered", p.id, *p.bed));
    if (st == PatientState::BeingTreated && treated_by[idx(p.id)] != 1)
      v.push_back(fmt::format("patient {} in treatment with {} providers", p.id, treated_by[idx(p.id)]));
    if (st == PatientState::BeingVisited && visited_by[idx(p.id)] > 1)
      v.push_back(fmt::format("patient {} visited by several visitors", p.id));
    if (st == PatientState::BeingVisited && treated_by[idx(p.id)] != 0)
      v.push_back(fmt::format("patient {} treated and visited at once", p.id));
    if ((st == PatientState::InQueue) != s.queue.contains(p.id))
      v.push_back(fmt::format("patient {} state {} disagrees with queue membership", p.id, to_string(st)));
    if (!within_ranges(p)) v.push_back(fmt::format("patient {} has a field out of range", p.id));
  }

  std::set<AgentId> queued;
  long last = -1;
  for (const auto& e : s.queue.entries()) {
    if (!queued.insert(e.patient).second) v.push_back(fmt::format("patient {} queued twice", e.patient));
    if (e.enqueue_tick < last) v.push_back("queue not ordered by enqueue tick");
    last = e.enqueue_tick;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Simulation

Simulation::Simulation(const ExperimentConfig& cfg, const FlsSet& fls, std::uint64_t seed, RunOptions options)
    : fls_(fls), seed_(seed), options_(options), state_(initialize_state(cfg, seed)) {
  if (options_.shuffle_seed)
    shuffler_.emplace(*options_.shuffle_seed, Substream::Arrivals, 0xffffffffu);
  sample();
  if (options_.dump_network) dump_network();
}

std::vector<std::size_t> Simulation::order(std::size_t n) {
  auto v = identity(n);
  if (shuffler_)
    for (std::size_t i = n; i > 1; --i) std::swap(v[i - 1], v[shuffler_->below(i)]);
  return v;
}

bool Simulation::finished() const noexcept {
  return state_.clock.tick >= static_cast<long>(state_.config.duration_days) * kMinutesPerDay;
}

void Simulation::run() {
  while (!finished()) step();
}

void Simulation::step() {
  auto& s = state_;
  s.clock.advance();
  if (shuffler_) {
    s.patient_order = order(s.patients.size());
    s.provider_order = order(s.providers.size());
    s.visitor_order = order(s.visitors.size());
  }
  timeouts();
  conditions();
  arrivals(s);
  visitor_window(s, fls_);
  dispatch(s, fls_);
  resolve();
  effects();
  const int minute = s.clock.minute_of_day();
  if (minute % 60 == 0) diffuse();
  if (minute == 0) {
    decay();
    if (options_.dump_network) dump_network();
  }
  if (s.clock.tick % s.config.schedule.trace_interval_minutes == 0) sample();
  if (options_.check_invariants && violations_.size() < 100) {
    for (auto& v : check_invariants(s)) violations_.push_back(fmt::format("tick {}: {}", s.clock.tick, v));
  }
}

void Simulation::timeouts() {
  auto& s = state_;
  const long now = s.clock.tick;
  for (std::size_t k : s.provider_order) {
    Provider& pr = s.providers[k];
    if (pr.state() != ProviderState::Treating || !pr.session) continue;
    if (--pr.session->remaining_minutes > 0) continue;
    const AgentId pid = pr.session->patient;
    pr.chart.fire(Trigger::timeout(), now);
    s.patients[idx(pid)].chart.fire(Trigger::timeout(), now);
    s.completions.emplace_back(pr.id, pid);
    pr.session.reset();
  }
  for (std::size_t i : s.patient_order) {
    Patient& p = s.patients[i];
    if (p.state() != PatientState::BeingVisited) continue;
    if (--s.schedules[i].visit_remaining > 0) continue;
    p.chart.fire(Trigger::timeout(), now);
  }
  for (std::size_t k : s.visitor_order) {
    Visitor& v = s.visitors[k];
    if (v.state() != VisitorState::Visiting) continue;
    if (--v.remaining_minutes > 0) continue;
    v.chart.fire(Trigger::timeout(), now);
  }
}

void Simulation::conditions() {
  auto& s = state_;
  const long now = s.clock.tick;
  for (std::size_t i : s.patient_order) {
    Patient& p = s.patients[i];
    auto& sched = s.schedules[i];
    if (p.state() == PatientState::AtHome && sched.admission_requested && !p.chart.fired_at(now)) {
      p.chart.fire(Trigger::when(Condition::AdmissionRequested), now);
      sched.admission_requested = false;
      sched.waiting_since = now;
    } else if (p.state() == PatientState::InBedIdle && p.severity <= 0.0 && !p.chart.fired_at(now)) {
      s.candidates[i].push_back(Trigger::when(Condition::Recovered));
    }
  }

  // Longest-waiting patient gets the lowest free bed.
  std::vector<std::size_t> waiting;
  for (std::size_t i = 0; i < s.patients.size(); ++i)
    if (s.patients[i].state() == PatientState::WaitingForBed && !s.patients[i].chart.fired_at(now)) waiting.push_back(i);
  std::sort(waiting.begin(), waiting.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(s.schedules[a].waiting_since, a) < std::pair(s.schedules[b].waiting_since, b);
  });
  std::size_t next_bed = 0;
  for (std::size_t i : waiting) {
    while (next_bed < s.beds.size() &&
           (s.beds[next_bed].state() != BedState::Free || s.beds[next_bed].chart.fired_at(now)))
      ++next_bed;
    if (next_bed == s.beds.size()) break;
    Bed& b = s.beds[next_bed];
    Patient& p = s.patients[i];
    p.chart.fire(Trigger::when(Condition::BedFree), now);
    b.chart.fire(Trigger::on(Message::AssignBed), now);
    b.occupant = p.id;
    p.bed = b.index;
    ++s.admissions;
  }
}

void Simulation::resolve() {
  auto& s = state_;
  const long now = s.clock.tick;
  for (std::size_t i = 0; i < s.patients.size(); ++i) {
    auto& cands = s.candidates[i];
    if (cands.empty()) continue;
    Patient& p = s.patients[i];
    PatientSchedule& sched = s.schedules[i];
    std::stable_sort(cands.begin(), cands.end(), [](const Trigger& a, const Trigger& b) { return rank(a) > rank(b); });
    const PatientState before = p.state();
    const auto fired = p.chart.fire_best(cands, now);

    if (fired && fired->kind == TriggerKind::Message && fired->message == Message::VisitorArrives) {
      const auto [visitor_id, minutes] = *s.visit_offer[i];
      if (before == PatientState::InQueue) {
        if (auto entry = s.queue.remove(p.id)) {
          ++s.accounting.withdrawn;
          if (!sched.pending_request) {
            sched.pending_request = entry->kind;
          } else {
            ++s.accounting.absorbed;
          }
        }
      }
      Visitor& v = s.visitors[idx(visitor_id)];
      v.chart.fire(Trigger::timeout(), now);
      v.remaining_minutes = minutes;
      sched.visit_remaining = minutes;
      p = apply_visit(p, minutes, s.config.effects, s.clock.day());
      ++s.visits;
    } else if (fired && request_kind(*fired)) {
      s.queue.push(p.id, *request_kind(*fired), now);
      ++s.accounting.enqueued;
    } else if (fired && fired->kind == TriggerKind::Condition && fired->condition == Condition::Recovered) {
      Bed& b = s.beds[idx(*p.bed)];
      b.chart.fire(Trigger::on(Message::ReleaseBed), now);
      b.occupant.reset();
      p.bed.reset();
      sched.next_self_request.reset();
      ++s.discharges;
    }

    for (const auto& t : cands) {
      if (fired && t == *fired) continue;
      if (auto k = request_kind(t)) {
        if (!sched.pending_request) {
          sched.pending_request = k;
        } else {
          ++s.accounting.absorbed;
        }
      } else if (t.kind == TriggerKind::Message && t.message == Message::VisitorArrives) {
        s.log.warn("visit-skipped",
                   fmt::format("{}: patient {} turned the visit down ({})", when(s), p.id, to_string(p.state())));
      }
    }
    cands.clear();
    s.visit_offer[i].reset();
  }
}

void Simulation::effects() {
  auto& s = state_;
  std::sort(s.completions.begin(), s.completions.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  for (const auto& [prov, pat] : s.completions) {
    const Provider& pr = s.providers[idx(prov)];
    s.patients[idx(pat)] = apply_treatment(s.patients[idx(pat)], pr, s.config.effects);
    if (pr.is_doctor()) {
      ++s.treatments_by_doctors;
    } else {
      ++s.treatments_by_robots;
    }
  }
  s.completions.clear();
}

BedTrust Simulation::bed_trust() const {
  BedTrust t(state_.beds.size());
  for (const auto& b : state_.beds)
    if (b.occupant) t[idx(b.index)] = state_.patients[idx(*b.occupant)].trust_robots;
  return t;
}

void Simulation::diffuse() {
  const auto next = diffuse_trust(bed_trust(), state_.network);
  for (const auto& b : state_.beds)
    if (b.occupant) state_.patients[idx(*b.occupant)].trust_robots = *next[idx(b.index)];
}

void Simulation::decay() {
  for (std::size_t i : state_.patient_order)
    state_.patients[i] = apply_daily_decay(state_.patients[i], state_.config.effects);
}

void Simulation::dump_network() {
  for (const auto& e : edge_states(bed_trust(), state_.network))
    network_dump_.push_back({state_.clock.day(), e});
}

void Simulation::sample() {
  const auto& s = state_;
  TraceRow row{s.clock.tick, s.clock.day(), 0, 0, 0, 0, s.queue.size(), network_summary(bed_trust(), s.network)};
  if (!s.patients.empty()) {
    for (const auto& p : s.patients) {
      row.mean_mental_state += p.mental_state;
      row.mean_trust_robots += p.trust_robots;
      row.mean_opinion_doctors += p.opinion_doctors;
      row.mean_opinion_robots += p.opinion_robots;
    }
    const double n = static_cast<double>(s.patients.size());
    row.mean_mental_state /= n;
    row.mean_trust_robots /= n;
    row.mean_opinion_doctors /= n;
    row.mean_opinion_robots /= n;
  }
  red_edges_seen_ += row.edges.red;
  edges_seen_ += row.edges.total();
  trace_.push_back(row);
}

RunResult Simulation::result() const {
  const auto& s = state_;
  RunResult r;
  r.seed = seed_;
  r.duration_days = s.config.duration_days;
  r.trace = trace_;
  // The last trace row may be stale when the run does not end on a sample tick.
  TraceRow now{s.clock.tick, s.clock.day(), 0, 0, 0, 0, s.queue.size(), network_summary(bed_trust(), s.network)};
  if (!s.patients.empty()) {
    for (const auto& p : s.patients) {
      now.mean_mental_state += p.mental_state;
      now.mean_trust_robots += p.trust_robots;
      now.mean_opinion_doctors += p.opinion_doctors;
      now.mean_opinion_robots += p.opinion_robots;
    }
    const double n = static_cast<double>(s.patients.size());
    now.mean_mental_state /= n;
    now.mean_trust_robots /= n;
    now.mean_opinion_doctors /= n;
    now.mean_opinion_robots /= n;
  }
  r.final_mean_mental_state = now.mean_mental_state;
  r.final_mean_trust_robots = now.mean_trust_robots;
  r.final_mean_opinion_doctors = now.mean_opinion_doctors;
  r.final_mean_opinion_robots = now.mean_opinion_robots;
  r.final_edges = now.edges;
  r.red_edge_fraction = edges_seen_ ? static_cast<double>(red_edges_seen_) / static_cast<double>(edges_seen_) : 0.0;
  r.final_patients = s.patients;
  r.network_dump = network_dump_;
  r.accounting = s.accounting;
  r.queued_at_end = s.queue.size();
  r.pending_at_end = static_cast<std::size_t>(std::count_if(
      s.schedules.begin(), s.schedules.end(), [](const PatientSchedule& ps) { return ps.pending_request.has_value(); }));
  r.treatments_by_doctors = s.treatments_by_doctors;
  r.treatments_by_robots = s.treatments_by_robots;
  r.visits = s.visits;
  r.admissions = s.admissions;
  r.discharges = s.discharges;
  r.invariant_violations = violations_;
  r.log = s.log;
  return r;
}

RunResult run_simulation(const ExperimentConfig& cfg, const FlsSet& fls, std::uint64_t seed, RunOptions options) {
  Simulation sim(cfg, fls, seed, options);
  sim.run();
  return sim.result();
}

RunResult run_simulation(const ExperimentConfig& cfg, std::uint64_t seed, RunOptions options) {
  cfg.validate();
  const FlsSet fls = load_fls_set(cfg.fls);
  return run_simulation(cfg, fls, seed, options);
}

}  // namespace hospsim
