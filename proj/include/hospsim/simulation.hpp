#pragma once

// Discrete-time ward simulation with 1-minute ticks.
//
// Tick order (canonical):
//   1. advance clock
//   2. timeouts     treatments and visits whose timer reaches zero end
//   3. conditions   admissions, bed assignment, recovery candidates
//   4. arrivals     check-ups, self requests, admission draws
//   5. visitor window (at windowStart only)
//   6. dispatch     queue head -> idle provider, round-robin by id
//   7. resolution   each patient takes its highest-priority pending trigger
//   8. effects      completed treatments update the patient
//   9. trust diffusion (on the hour)
//  10. daily decay (at midnight)
//  11. trace sample
//
// Every agent fires at most one transition per tick, so phases 3-6 see the
// states agents had when the tick began unless they already moved this tick.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hospsim/agents.hpp"
#include "hospsim/config.hpp"
#include "hospsim/random.hpp"
#include "hospsim/trust_network.hpp"

namespace hospsim {

inline constexpr int kMinutesPerDay = 1440;

struct SimClock {
  long tick = 0;  // minutes since start

  int minute_of_day() const noexcept { return static_cast<int>(tick % kMinutesPerDay); }
  int day() const noexcept { return static_cast<int>(tick / kMinutesPerDay); }
  void advance() noexcept { ++tick; }
};

struct QueueEntry {
  AgentId patient;
  RequestKind kind;
  long enqueue_tick;
};

/// FIFO of treatment requests; a patient appears at most once.
class TreatmentQueue {
 public:
  /// False (and no change) when the patient is already queued.
  bool push(AgentId patient, RequestKind kind, long tick);
  std::optional<QueueEntry> pop();
  const QueueEntry* front() const noexcept { return entries_.empty() ? nullptr : &entries_.front(); }
  /// Removes the patient's entry wherever it sits.
  std::optional<QueueEntry> remove(AgentId patient);
  bool contains(AgentId patient) const noexcept;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::deque<QueueEntry>& entries() const noexcept { return entries_; }

 private:
  std::deque<QueueEntry> entries_;
};

/// Warnings raised during a run: a count per category plus the first few
/// messages verbatim.
class RunLog {
 public:
  static constexpr std::size_t kKeptMessages = 200;

  void warn(const std::string& category, std::string message);
  std::size_t count(const std::string& category) const;
  std::size_t total() const noexcept { return total_; }
  const std::map<std::string, std::size_t>& counts() const noexcept { return counts_; }
  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  std::map<std::string, std::size_t> counts_;
  std::vector<std::string> messages_;
  std::size_t total_ = 0;
};

/// Per-patient arrival bookkeeping.
struct PatientSchedule {
  std::optional<int> checkup_minute;  // minute of day of the daily check-up
  std::optional<long> next_self_request;
  std::optional<RequestKind> pending_request;  // raised while the patient could not queue
  bool admission_requested = false;
  long waiting_since = 0;
  int visit_remaining = 0;
  RandomStream rng;
};

struct RequestAccounting {
  std::size_t enqueued = 0;
  std::size_t dispatched = 0;
  std::size_t withdrawn = 0;  // queued patient left the queue for a visit
  std::size_t absorbed = 0;   // raised while already queued or in treatment
  std::size_t duplicates = 0;

  friend bool operator==(const RequestAccounting&, const RequestAccounting&) = default;
};

struct TraceRow {
  long tick;
  int day;
  double mean_mental_state;
  double mean_trust_robots;
  double mean_opinion_doctors;
  double mean_opinion_robots;
  std::size_t queue_length;
  EdgeCounts edges;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct NetworkDumpRow {
  int day;
  EdgeState edge;
};

struct Assignment {
  AgentId provider;
  AgentId patient;
  int minutes;
};

/// Offered visits still go through resolution; a patient dispatched in the
/// same tick turns the offer down.
enum class VisitOutcome { Offered, Declined, PatientNotInBed, PatientInTreatment, PatientBusy };

struct VisitEvent {
  AgentId visitor;
  AgentId patient;
  VisitOutcome outcome;
  int minutes = 0;
};

struct RunOptions {
  bool dump_network = false;
  /// Permute agent iteration within each phase (results must not change).
  std::optional<std::uint64_t> shuffle_seed;
  /// Check invariants after every tick and record violations.
  bool check_invariants = false;
};

struct RunResult {
  std::uint64_t seed = 0;
  int duration_days = 0;
  double final_mean_mental_state = 0;
  double final_mean_trust_robots = 0;
  double final_mean_opinion_doctors = 0;
  double final_mean_opinion_robots = 0;
  EdgeCounts final_edges;
  /// Red edges over all occupied-occupied edges, pooled across every trace sample.
  double red_edge_fraction = 0;
  std::vector<TraceRow> trace;
  std::vector<Patient> final_patients;
  std::vector<NetworkDumpRow> network_dump;
  RequestAccounting accounting;
  std::size_t queued_at_end = 0;
  std::size_t pending_at_end = 0;
  std::size_t treatments_by_doctors = 0;
  std::size_t treatments_by_robots = 0;
  std::size_t visits = 0;
  std::size_t admissions = 0;
  std::size_t discharges = 0;
  std::vector<std::string> invariant_violations;
  RunLog log;
};

/// Everything a running simulation owns.
struct RunState {
  SimClock clock;
  std::vector<Patient> patients;
  std::vector<PatientSchedule> schedules;
  std::vector<Provider> providers;
  std::vector<Visitor> visitors;
  std::vector<Bed> beds;
  std::vector<std::optional<AgentId>> visitor_of;  // patient -> visitor
  TreatmentQueue queue;
  TrustNetwork network;
  ExperimentConfig config;
  std::size_t next_provider = 0;  // round-robin cursor

  // Agent iteration order within phases; identity unless shuffled.
  std::vector<std::size_t> patient_order;
  std::vector<std::size_t> provider_order;
  std::vector<std::size_t> visitor_order;

  // Within-tick scratch.
  std::vector<std::vector<Trigger>> candidates;                  // per patient
  std::vector<std::optional<std::pair<AgentId, int>>> visit_offer;  // per patient: visitor, minutes
  std::vector<std::pair<AgentId, AgentId>> completions;           // provider, patient

  RequestAccounting accounting;
  std::size_t treatments_by_doctors = 0;
  std::size_t treatments_by_robots = 0;
  std::size_t visits = 0;
  std::size_t admissions = 0;
  std::size_t discharges = 0;
  RunLog log;

  explicit RunState(const ExperimentConfig& cfg);
};

/// Builds the initial population: the first min(patients, beds) patients in
/// beds, the rest at home. Initial values come from the seed.
RunState initialize_state(const ExperimentConfig& cfg, std::uint64_t seed);

/// Appends to the queue and moves the patient to InQueue. Duplicates and
/// patients that cannot queue are ignored and logged; returns whether queued.
bool enqueue_request(RunState& s, AgentId patient, RequestKind kind);

/// Pairs queued patients with idle providers until one side runs out.
std::vector<Assignment> dispatch(RunState& s, const FlsSet& fls);

/// At windowStart, asks each visitor's FLS whether to visit and offers the
/// visit to the patient. Accepted visits start in the resolution phase.
std::vector<VisitEvent> visitor_window(RunState& s, const FlsSet& fls);

/// Check-ups, self requests and admission draws for the current tick.
void arrivals(RunState& s);

/// Human-readable description of every violated invariant (empty when sound).
std::vector<std::string> check_invariants(const RunState& s);

class Simulation {
 public:
  Simulation(const ExperimentConfig& cfg, const FlsSet& fls, std::uint64_t seed, RunOptions options = {});

  void step();
  /// Steps until durationDays have elapsed.
  void run();
  bool finished() const noexcept;
  RunResult result() const;

  RunState& state() noexcept { return state_; }
  const RunState& state() const noexcept { return state_; }

 private:
  void timeouts();
  void conditions();
  void resolve();
  void effects();
  void diffuse();
  void decay();
  void sample();
  void dump_network();
  std::vector<std::size_t> order(std::size_t n);
  BedTrust bed_trust() const;

  const FlsSet& fls_;
  std::uint64_t seed_;
  RunOptions options_;
  RunState state_;
  std::optional<RandomStream> shuffler_;
  std::vector<TraceRow> trace_;
  std::vector<NetworkDumpRow> network_dump_;
  std::size_t red_edges_seen_ = 0;
  std::size_t edges_seen_ = 0;
  std::vector<std::string> violations_;
};

RunResult run_simulation(const ExperimentConfig& cfg, const FlsSet& fls, std::uint64_t seed, RunOptions options = {});
/// Loads the FLS files named in the config first.
RunResult run_simulation(const ExperimentConfig& cfg, std::uint64_t seed, RunOptions options = {});

}  // namespace hospsim
