#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "hospsim/config.hpp"
#include "hospsim/simulation.hpp"
#include "../support/constant_fls.hpp"

using namespace hospsim;

namespace {

ExperimentConfig small(int doctors, int robots, int patients, int beds) {
  ExperimentConfig c;
  c.population.doctors = doctors;
  c.population.senior_doctors = doctors;
  c.population.robots = robots;
  c.population.humanlike_robots = robots;
  c.population.patients = patients;
  c.population.beds = beds;
  c.population.visitors = patients;
  c.duration_days = 1;
  return c;
}

// No check-ups, no self requests.
void quiet(Simulation& sim) {
  for (auto& s : sim.state().schedules) s.checkup_minute.reset();
}

ExperimentConfig quiet_config(ExperimentConfig c) {
  c.schedule.self_request_mean_minutes = 1e12;
  c.schedule.p_admit = 0;
  return c;
}

void step_to(Simulation& sim, long tick) {
  while (sim.state().clock.tick < tick) sim.step();
}

std::vector<AgentId> queue_ids(const RunState& s) {
  std::vector<AgentId> ids;
  for (const auto& e : s.queue.entries()) ids.push_back(e.patient);
  return ids;
}

void send_home(RunState& s, AgentId id) {
  auto& p = s.patients[static_cast<std::size_t>(id)];
  auto& b = s.beds[static_cast<std::size_t>(*p.bed)];
  b.occupant.reset();
  b.chart = Statechart<BedState>(BedState::Free);
  p.bed.reset();
  p.chart = Statechart<PatientState>(PatientState::AtHome);
}

}  // namespace

TEST_SUITE("sim_core") {
  TEST_CASE("clock") {
    SimClock c;
    CHECK(c.minute_of_day() == 0);
    for (int i = 0; i < 1439; ++i) c.advance();
    CHECK(c.minute_of_day() == 1439);
    CHECK(c.day() == 0);
    c.advance();
    CHECK(c.minute_of_day() == 0);
    CHECK(c.day() == 1);
  }

  TEST_CASE("queue examples") {
    auto s = initialize_state(small(1, 0, 6, 6), 1);
    CHECK(enqueue_request(s, 3, RequestKind::CheckUp));
    CHECK(queue_ids(s) == std::vector<AgentId>{3});
    CHECK(enqueue_request(s, 5, RequestKind::SelfRequest));
    CHECK(queue_ids(s) == std::vector<AgentId>{3, 5});
    CHECK_FALSE(enqueue_request(s, 3, RequestKind::SelfRequest));
    CHECK(queue_ids(s) == std::vector<AgentId>{3, 5});
    CHECK(s.log.count("duplicate-request") == 1);
    CHECK(s.patients[3].state() == PatientState::InQueue);
    CHECK(s.queue.entries()[1].kind == RequestKind::SelfRequest);
  }

  TEST_CASE("queue container") {
    TreatmentQueue q;
    CHECK(q.push(1, RequestKind::CheckUp, 0));
    CHECK(q.push(2, RequestKind::CheckUp, 1));
    CHECK_FALSE(q.push(1, RequestKind::SelfRequest, 2));
    CHECK(q.remove(1)->patient == 1);
    CHECK_FALSE(q.remove(1));
    CHECK(q.pop()->patient == 2);
    CHECK_FALSE(q.pop());
    CHECK(q.front() == nullptr);
  }

  TEST_CASE("dispatch: FIFO to a single doctor") {
    const auto fls = support::constant_set(30, 0.9, 30);
    auto s = initialize_state(small(1, 0, 6, 6), 1);
    enqueue_request(s, 3, RequestKind::CheckUp);
    enqueue_request(s, 5, RequestKind::CheckUp);
    s.clock.tick = 1;
    const auto a = dispatch(s, fls);
    REQUIRE(a.size() == 1);
    CHECK(a[0].provider == 0);
    CHECK(a[0].patient == 3);
    CHECK(a[0].minutes == 30);
    CHECK(queue_ids(s) == std::vector<AgentId>{5});
    CHECK(s.providers[0].state() == ProviderState::Treating);
    CHECK(s.patients[3].state() == PatientState::BeingTreated);
    s.clock.tick = 2;
    CHECK(dispatch(s, fls).empty());  // no idle provider
    CHECK(queue_ids(s) == std::vector<AgentId>{5});
  }

  TEST_CASE("dispatch: round-robin by provider id") {
    const auto fls = support::constant_set(30, 0.9, 30);
    auto s = initialize_state(small(1, 1, 6, 6), 1);
    REQUIRE(s.providers[0].is_doctor());
    REQUIRE(s.providers[1].is_robot());
    enqueue_request(s, 3, RequestKind::CheckUp);
    enqueue_request(s, 5, RequestKind::CheckUp);
    s.clock.tick = 1;
    const auto a = dispatch(s, fls);
    REQUIRE(a.size() == 2);
    CHECK((a[0].provider == 0 && a[0].patient == 3));
    CHECK((a[1].provider == 1 && a[1].patient == 5));
    CHECK(s.queue.empty());
    CHECK(s.next_provider == 0);
  }

  TEST_CASE("dispatch waits for patients queued this tick") {
    const auto fls = support::constant_set(30, 0.9, 30);
    auto s = initialize_state(small(2, 0, 6, 6), 1);
    enqueue_request(s, 1, RequestKind::CheckUp);
    CHECK(dispatch(s, fls).empty());
    s.clock.tick = 1;
    CHECK(dispatch(s, fls).size() == 1);
  }

  TEST_CASE("round-robin rotates across dispatches") {
    const auto fls = support::constant_set(1, 0.9, 30);
    auto cfg = quiet_config(small(3, 0, 3, 3));
    cfg.effects.severity_relief = 0;  // keep patient 0 in bed
    Simulation sim(cfg, fls, 1);
    quiet(sim);
    std::vector<AgentId> order;
    for (int k = 0; k < 6; ++k) {
      auto& s = sim.state();
      step_to(sim, s.clock.tick + 3);
      enqueue_request(s, 0, RequestKind::SelfRequest);
      sim.step();  // dispatches next tick
      for (const auto& p : s.providers)
        if (p.state() == ProviderState::Treating) order.push_back(p.id);
    }
    CHECK(order == std::vector<AgentId>{0, 1, 2, 0, 1, 2});
  }

  TEST_CASE("prefer doctors") {
    const auto fls = support::constant_set(30, 0.9, 30);
    auto cfg = small(1, 2, 6, 6);
    cfg.schedule.prefer_doctors = true;
    auto s = initialize_state(cfg, 1);
    s.next_provider = 1;
    enqueue_request(s, 2, RequestKind::CheckUp);
    s.clock.tick = 1;
    const auto a = dispatch(s, fls);
    REQUIRE(a.size() == 1);
    CHECK(a[0].provider == 0);
  }

  TEST_CASE("visit window math") {
    const auto fls = support::constant_set(30, 0.9, 45);
    auto cfg = quiet_config(small(1, 0, 1, 1));
    Simulation sim(cfg, fls, 3);
    quiet(sim);
    step_to(sim, 839);
    CHECK(sim.state().patients[0].state() == PatientState::InBedIdle);
    sim.step();  // 14:00
    CHECK(sim.state().patients[0].state() == PatientState::BeingVisited);
    CHECK(sim.state().visitors[0].state() == VisitorState::Visiting);
    step_to(sim, 884);
    CHECK(sim.state().patients[0].state() == PatientState::BeingVisited);
    sim.step();  // 14:45
    CHECK(sim.state().patients[0].state() == PatientState::InBedIdle);
    CHECK(sim.state().visitors[0].state() == VisitorState::AtHome);
    CHECK(sim.state().patients[0].last_visit_day == 0);
    CHECK(sim.state().visits == 1);
  }

  TEST_CASE("visit capped by the window") {
    const auto fls = support::constant_set(30, 0.9, 90);
    auto cfg = quiet_config(small(1, 0, 1, 1));
    Simulation sim(cfg, fls, 3);
    quiet(sim);
    step_to(sim, 899);
    CHECK(sim.state().patients[0].state() == PatientState::BeingVisited);
    sim.step();  // 15:00
    CHECK(sim.state().patients[0].state() == PatientState::InBedIdle);
  }

  TEST_CASE("no visit leaves the patient alone") {
    const auto fls = support::constant_set(30, 0.2, 45);
    auto cfg = quiet_config(small(1, 0, 1, 1));
    Simulation sim(cfg, fls, 3);
    quiet(sim);
    step_to(sim, 1440);
    CHECK(sim.state().visits == 0);
    CHECK(sim.state().patients[0].state() == PatientState::InBedIdle);
    CHECK_FALSE(sim.state().patients[0].last_visit_day);
  }

  TEST_CASE("visit skipped while in treatment") {
    const auto fls = support::constant_set(40, 0.9, 45);
    auto cfg = quiet_config(small(1, 0, 1, 1));
    Simulation sim(cfg, fls, 3);
    quiet(sim);
    sim.state().schedules[0].checkup_minute = 13 * 60 + 39;
    step_to(sim, 13 * 60 + 40);
    CHECK(sim.state().patients[0].state() == PatientState::BeingTreated);
    bool visited = false;
    for (long t = sim.state().clock.tick; t < 1440; ++t) {
      sim.step();
      visited = visited || sim.state().patients[0].state() == PatientState::BeingVisited;
      if (t + 1 == 14 * 60 + 20) CHECK(sim.state().patients[0].state() == PatientState::InBedIdle);
    }
    CHECK_FALSE(visited);
    CHECK(sim.state().log.count("visit-skipped") == 1);
  }

  TEST_CASE("visit withdraws a queued patient and the request returns") {
    const auto fls = support::constant_set(30, 0.9, 20);
    auto cfg = quiet_config(small(0, 0, 1, 1));
    Simulation sim(cfg, fls, 3);
    quiet(sim);
    sim.state().schedules[0].checkup_minute = 830;
    step_to(sim, 840);
    CHECK(sim.state().patients[0].state() == PatientState::BeingVisited);
    CHECK(sim.state().accounting.withdrawn == 1);
    step_to(sim, 861);
    CHECK(sim.state().patients[0].state() == PatientState::InQueue);
    CHECK(sim.state().accounting.enqueued == 2);
  }

  TEST_CASE("admission probability extremes") {
    const auto fls = support::constant_set(30, 0.2, 30);
    auto cfg = small(1, 0, 4, 6);
    cfg.schedule.p_admit = 1;
    cfg.schedule.self_request_mean_minutes = 1e12;
    Simulation sim(cfg, fls, 5);
    quiet(sim);
    send_home(sim.state(), 2);
    send_home(sim.state(), 3);
    step_to(sim, 1440);
    for (const auto& p : sim.state().patients) CHECK(p.in_bed());
    CHECK(sim.state().admissions == 2);

    auto none = small(1, 0, 6, 2);
    none.schedule.p_admit = 0;
    none.duration_days = 5;
    const auto r = run_simulation(none, fls, 5);
    CHECK(r.admissions == 0);
    for (std::size_t i = 2; i < 6; ++i) CHECK(r.final_patients[i].state() == PatientState::AtHome);
  }

  TEST_CASE("initial state") {
    const auto s = initialize_state(ExperimentConfig{}, 9);
    CHECK(s.patients.size() == 20);
    CHECK(s.beds.size() == 12);
    CHECK(s.providers.size() == 6);
    CHECK(s.visitors.size() == 10);
    for (const auto& p : s.patients) {
      CHECK(p.mental_state >= 0.4);
      CHECK(p.mental_state <= 0.8);
      CHECK(p.severity >= 3);
      CHECK(p.severity <= 8);
      CHECK(p.trust_robots == 0.5);
      CHECK(p.opinion_doctors == 0);
      CHECK(p.in_bed() == (p.id < 12));
    }
    CHECK(check_invariants(s).empty());
    const auto junior = std::get<DoctorStereotype>(s.providers[3].kind);
    CHECK(junior.level == DoctorLevel::Junior);
    CHECK(std::get<RobotStereotype>(s.providers[4].kind).humanlike() == 0.8);
    CHECK(std::get<RobotStereotype>(s.providers[5].kind).humanlike() == 0.2);
  }

  TEST_CASE("zero days gives the initial snapshot only") {
    auto cfg = ExperimentConfig{};
    cfg.duration_days = 0;
    const auto r = run_simulation(cfg, 1);
    CHECK(r.trace.size() == 1);
    CHECK(r.trace[0].tick == 0);
  }

  TEST_CASE("determinism and seed sensitivity") {
    auto cfg = ExperimentConfig{};
    cfg.duration_days = 5;
    const auto fls = load_fls_set(cfg.fls);
    const auto a = run_simulation(cfg, fls, 42);
    const auto b = run_simulation(cfg, fls, 42);
    const auto c = run_simulation(cfg, fls, 43);
    CHECK(a.trace == b.trace);
    CHECK(a.accounting == b.accounting);
    CHECK(a.trace != c.trace);
  }

  TEST_CASE("shuffled iteration order changes nothing") {
    auto cfg = ExperimentConfig{};
    cfg.duration_days = 6;
    cfg.schedule.p_admit = 0.5;
    const auto fls = load_fls_set(cfg.fls);
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto plain = run_simulation(cfg, fls, seed);
      RunOptions opts;
      opts.shuffle_seed = seed * 77;
      const auto shuffled = run_simulation(cfg, fls, seed, opts);
      CHECK(plain.trace == shuffled.trace);
      CHECK(plain.accounting == shuffled.accounting);
      CHECK(plain.visits == shuffled.visits);
      REQUIRE(plain.final_patients.size() == shuffled.final_patients.size());
      for (std::size_t i = 0; i < plain.final_patients.size(); ++i) {
        CHECK(plain.final_patients[i].mental_state == shuffled.final_patients[i].mental_state);
        CHECK(plain.final_patients[i].trust_robots == shuffled.final_patients[i].trust_robots);
        CHECK(plain.final_patients[i].state() == shuffled.final_patients[i].state());
      }
    }
  }

  TEST_CASE("requests are conserved and invariants hold") {
    const auto fls = load_fls_set({});
    struct Case {
      int doctors, robots, patients, beds;
    };
    for (const auto& k : {Case{1, 0, 8, 4}, Case{0, 1, 6, 6}, Case{2, 2, 20, 12}, Case{0, 0, 3, 3}, Case{3, 3, 10, 2}}) {
      for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        auto cfg = small(k.doctors, k.robots, k.patients, k.beds);
        cfg.duration_days = 4;
        cfg.schedule.p_admit = 0.5;
        cfg.schedule.self_request_mean_minutes = 120;
        RunOptions opts;
        opts.check_invariants = true;
        const auto r = run_simulation(cfg, fls, seed, opts);
        CHECK(r.invariant_violations.empty());
        if (!r.invariant_violations.empty()) MESSAGE(r.invariant_violations.front());
        CHECK(r.accounting.enqueued == r.accounting.dispatched + r.accounting.withdrawn + r.queued_at_end);
        CHECK(r.accounting.duplicates == 0);
        for (const auto& p : r.final_patients) CHECK(within_ranges(p));
      }
    }
  }

  TEST_CASE("robotlike robot lowers trust") {
    auto cfg = ExperimentConfig{};
    cfg.population = {0, 0, 1, 0, 10, 12, 10};
    cfg.robot_look.robotlike_h = 0.0;
    const auto r = run_simulation(cfg, 1);
    CHECK(r.final_mean_trust_robots < 0.5);
    CHECK(r.treatments_by_robots > 0);
    CHECK(r.treatments_by_doctors == 0);
  }

  TEST_CASE("network dump") {
    auto cfg = ExperimentConfig{};
    cfg.duration_days = 2;
    RunOptions opts;
    opts.dump_network = true;
    const auto r = run_simulation(cfg, 4, opts);
    REQUIRE_FALSE(r.network_dump.empty());
    CHECK(r.network_dump.front().day == 0);
    CHECK(r.network_dump.back().day == 2);
  }
}
