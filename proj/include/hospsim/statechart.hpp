#pragma once

// Flat statecharts with three trigger kinds: timeouts, conditions and
// messages. At most one transition fires per agent per tick; when several
// triggers are enabled at once the priority is Message > Condition > Timeout.

#include <algorithm>
#include <optional>
#include <span>
#include <string_view>

namespace hospsim {

enum class Message {
  StartTreatment,
  CheckUpDue,
  SelfRequest,
  VisitorArrives,
  AssignBed,
  ReleaseBed,
};

enum class Condition {
  AdmissionRequested,
  BedFree,
  Recovered,  // severity <= 0
};

enum class TriggerKind { Timeout = 0, Condition = 1, Message = 2 };

struct Trigger {
  TriggerKind kind;
  Condition condition{};
  Message message{};

  static constexpr Trigger timeout() { return {TriggerKind::Timeout}; }
  static constexpr Trigger when(Condition c) { return {TriggerKind::Condition, c}; }
  static constexpr Trigger on(Message m) { return {TriggerKind::Message, Condition{}, m}; }

  friend constexpr bool operator==(const Trigger& a, const Trigger& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case TriggerKind::Timeout:
        return true;
      case TriggerKind::Condition:
        return a.condition == b.condition;
      case TriggerKind::Message:
        return a.message == b.message;
    }
    return false;
  }
};

constexpr int priority(const Trigger& t) { return static_cast<int>(t.kind); }

std::string_view to_string(Message m);
std::string_view to_string(Condition c);
std::string_view to_string(const Trigger& t);

template <class State>
struct Transition {
  State from;
  Trigger trigger;
  State to;
};

/// Specialized per agent state enum with a static `rows` array of Transition.
template <class State>
struct TransitionTable;

/// Pure single-step lookup: the target state if `trigger` is enabled in
/// `current`, otherwise nullopt.
template <class State>
constexpr std::optional<State> fire_transition(std::span<const Transition<State>> table, State current,
                                               const Trigger& trigger) {
  for (const auto& row : table)
    if (row.from == current && row.trigger == trigger) return row.to;
  return std::nullopt;
}

template <class State>
constexpr std::optional<State> fire_transition(State current, const Trigger& trigger) {
  return fire_transition<State>(std::span<const Transition<State>>(TransitionTable<State>::rows), current, trigger);
}

/// Highest-priority candidate that is enabled in `current`.
template <class State>
constexpr std::optional<Trigger> select_trigger(State current, std::span<const Trigger> candidates) {
  std::optional<Trigger> best;
  for (const auto& t : candidates) {
    if (!fire_transition(current, t)) continue;
    if (!best || priority(t) > priority(*best)) best = t;
  }
  return best;
}

enum class FireResult { Fired, NotEnabled, AlreadyFiredThisTick };

/// Current state plus the tick of the last transition.
template <class State>
class Statechart {
 public:
  constexpr explicit Statechart(State initial) : state_(initial) {}

  constexpr State state() const noexcept { return state_; }
  constexpr bool fired_at(long tick) const noexcept { return last_tick_ == tick; }
  constexpr bool enabled(const Trigger& t) const { return fire_transition(state_, t).has_value(); }

  constexpr FireResult fire(const Trigger& t, long tick) {
    if (last_tick_ == tick) return FireResult::AlreadyFiredThisTick;
    auto next = fire_transition(state_, t);
    if (!next) return FireResult::NotEnabled;
    state_ = *next;
    last_tick_ = tick;
    return FireResult::Fired;
  }

  /// Fires the highest-priority enabled candidate, if any.
  constexpr std::optional<Trigger> fire_best(std::span<const Trigger> candidates, long tick) {
    if (last_tick_ == tick) return std::nullopt;
    auto t = select_trigger(state_, candidates);
    if (t) fire(*t, tick);
    return t;
  }

 private:
  State state_;
  long last_tick_ = -1;
};

}  // namespace hospsim
