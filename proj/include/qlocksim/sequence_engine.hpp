#pragma once

// Addressing schedules for charge-locking through an MLSG multiplexer.
//
// The parallel scheme visits every output once in mixed-radix reflected Gray
// order (level 1 fastest). A digit change at one level is realised in two
// phases: first the gate of the old digit is activated, which momentarily
// isolates every output, then the gate of the new digit is deactivated. No
// previously charged output is ever reconnected.
//
// The serial (conventional) scheme relocks the whole tree after every
// selection, cycling one gate per level at twice the gate voltage.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qlocksim/mux_topology.hpp"

namespace qlocksim {

enum class Direction { activate, deactivate };

inline const char* to_string(Direction d) noexcept { return d == Direction::activate ? "activate" : "deactivate"; }

struct TransitionEvent {
  GateId gate;
  Direction direction = Direction::activate;
  double delta_v = 0.0;  ///< magnitude of the gate voltage swing [V]
};

struct ScheduleStep {
  std::vector<TransitionEvent> events;
  OutputIndex selected = 0;
};

/// steps[0] brings the tree from the all-deactivated power-up state to the
/// first selection; every later step moves the selection to the next output.
/// final_lock isolates the last output and is not part of the sweep proper.
struct ChargeLockSchedule {
  MuxTopology topology;
  std::vector<OutputIndex> visitation;
  std::vector<ScheduleStep> steps;
  std::vector<TransitionEvent> final_lock;
};

namespace detail {

inline void append_digit_change(std::vector<TransitionEvent>& events, std::size_t level, Digit from, Digit to,
                                double swing) {
  events.push_back({{level, from}, Direction::activate, swing});
  events.push_back({{level, to}, Direction::deactivate, swing});
}

inline std::vector<TransitionEvent> initialization_events(const MuxTopology& topo, std::span<const Digit> first,
                                                          double swing) {
  std::vector<TransitionEvent> events;
  for (std::size_t i = 0; i < topo.levels(); ++i)
    for (std::size_t g = 0; g < topo.base(i); ++g)
      if (g != first[i]) events.push_back({{i, g}, Direction::activate, swing});
  return events;
}

inline std::vector<TransitionEvent> final_lock_events(const MuxTopology& topo, std::span<const Digit> last,
                                                      double swing) {
  // Activating the open gate of the slowest level is enough to isolate.
  const auto k = topo.levels() - 1;
  return {{{k, last[k]}, Direction::activate, swing}};
}

}  // namespace detail

/// Mixed-radix reflected Gray visitation, level 1 changing most often.
inline std::vector<OutputIndex> reflected_gray_order(const MuxTopology& topo) {
  const auto k = topo.levels();
  const auto n = topo.output_count();
  std::vector<Digit> digit(k, 0);
  std::vector<int> dir(k, +1);
  std::vector<OutputIndex> order;
  order.reserve(n);
  order.push_back(0);
  for (OutputIndex step = 1; step < n; ++step) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto next = static_cast<long long>(digit[j]) + dir[j];
      if (next >= 0 && next < static_cast<long long>(topo.base(j))) {
        digit[j] = static_cast<Digit>(next);
        break;
      }
      dir[j] = -dir[j];
    }
    order.push_back(output_index(topo, digit));
  }
  return order;
}

/// Build a schedule that visits `order`. Multi-digit changes are applied one
/// level at a time, least significant level first, each as activate-old then
/// deactivate-new. Used for the Gray schedule and for counter-examples.
inline ChargeLockSchedule schedule_from_order(const MuxTopology& topo, std::vector<OutputIndex> order,
                                              double gate_swing) {
  if (!(gate_swing > 0.0)) throw std::invalid_argument("gate swing must be positive");
  if (order.empty()) throw std::invalid_argument("visitation order is empty");
  ChargeLockSchedule s{topo, std::move(order), {}, {}};
  s.steps.reserve(s.visitation.size());

  auto prev = topo.digits_of(s.visitation.front());
  s.steps.push_back({detail::initialization_events(topo, prev, gate_swing), s.visitation.front()});
  for (std::size_t i = 1; i < s.visitation.size(); ++i) {
    const auto cur = topo.digits_of(s.visitation[i]);
    ScheduleStep step{{}, s.visitation[i]};
    for (std::size_t lvl = topo.levels(); lvl-- > 0;)
      if (cur[lvl] != prev[lvl]) detail::append_digit_change(step.events, lvl, prev[lvl], cur[lvl], gate_swing);
    s.steps.push_back(std::move(step));
    prev = cur;
  }
  s.final_lock = detail::final_lock_events(topo, prev, gate_swing);
  return s;
}

inline ChargeLockSchedule generate_schedule(const MuxTopology& topo, double gate_swing = 1.0) {
  return schedule_from_order(topo, reflected_gray_order(topo), gate_swing);
}

/// Plain counting order 0,1,2,... built the same way; violates isolation for
/// any base-2 tree with two or more levels.
inline ChargeLockSchedule sequential_schedule(const MuxTopology& topo, double gate_swing = 1.0) {
  std::vector<OutputIndex> order(topo.output_count());
  for (OutputIndex i = 0; i < order.size(); ++i) order[i] = i;
  return schedule_from_order(topo, std::move(order), gate_swing);
}

enum class ViolationKind {
  permutation,         ///< visitation misses or repeats an output
  gray,                ///< consecutive outputs differ in more or less than one digit
  isolation,           ///< a previously charged output is connected
  multiple_connected,  ///< two or more outputs connected at once
  stray_connection,    ///< an output other than the current target is connected
  selection_mismatch,  ///< the state after a step does not select the declared output
  non_alternating,     ///< a gate is activated twice (or deactivated twice) in a row
  not_locked,          ///< outputs remain connected after the final lock
};

inline const char* to_string(ViolationKind k) noexcept {
  switch (k) {
    case ViolationKind::permutation: return "permutation";
    case ViolationKind::gray: return "gray";
    case ViolationKind::isolation: return "isolation";
    case ViolationKind::multiple_connected: return "multiple_connected";
    case ViolationKind::stray_connection: return "stray_connection";
    case ViolationKind::selection_mismatch: return "selection_mismatch";
    case ViolationKind::non_alternating: return "non_alternating";
    case ViolationKind::not_locked: return "not_locked";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::size_t step = 0;   ///< steps.size() denotes the final lock
  std::size_t phase = 0;  ///< event index within the step, 1-based; 0 = whole step
  std::string detail;
};

struct VerificationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool passed() const noexcept { return violations.empty(); }
  [[nodiscard]] std::size_t count(ViolationKind k) const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; }));
  }
  [[nodiscard]] const Violation* first(ViolationKind k) const {
    for (const auto& v : violations)
      if (v.kind == k) return &v;
    return nullptr;
  }
};

/// Replays every transition phase from the power-up (all deactivated) state.
/// Connectivity is checked from the moment the first output is selected.
/// Throws std::invalid_argument if the schedule references gates or outputs
/// outside its topology.
inline VerificationReport verify_schedule(const ChargeLockSchedule& s) {
  const auto& topo = s.topology;
  const auto n = topo.output_count();
  VerificationReport report;
  auto flag = [&](ViolationKind k, std::size_t step, std::size_t phase, std::string d) {
    report.violations.push_back({k, step, phase, std::move(d)});
  };

  if (s.steps.size() != s.visitation.size())
    throw std::invalid_argument("schedule has " + std::to_string(s.steps.size()) + " steps for " +
                                std::to_string(s.visitation.size()) + " visited outputs");
  auto check_events = [&](const std::vector<TransitionEvent>& events) {
    for (const auto& e : events)
      if (!topo.contains(e.gate)) throw std::invalid_argument("schedule references gate outside topology");
  };
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    if (s.visitation[i] >= n) throw std::invalid_argument("visited output outside topology");
    if (s.steps[i].selected != s.visitation[i]) throw std::invalid_argument("step target disagrees with visitation");
    check_events(s.steps[i].events);
  }
  check_events(s.final_lock);

  // (a) permutation
  {
    std::vector<unsigned> seen(n, 0);
    for (auto o : s.visitation) ++seen[o];
    for (OutputIndex o = 0; o < n; ++o)
      if (seen[o] != 1)
        flag(ViolationKind::permutation, 0, 0,
             fmt::format("output {} visited {} times", o, seen[o]));
  }

  // (b) Gray property
  for (std::size_t i = 1; i < s.visitation.size(); ++i) {
    const auto a = topo.digits_of(s.visitation[i - 1]);
    const auto b = topo.digits_of(s.visitation[i]);
    std::size_t diff = 0;
    for (std::size_t l = 0; l < a.size(); ++l) diff += (a[l] != b[l]);
    if (diff != 1)
      flag(ViolationKind::gray, i, 0,
           fmt::format("{} -> {} changes {} digits", s.visitation[i - 1], s.visitation[i], diff));
  }

  // (c) phase-by-phase replay
  auto state = GateStateVector::all_deactivated(topo);
  std::vector<unsigned char> charged(n, 0);
  auto apply = [&](const TransitionEvent& e, std::size_t step, std::size_t phase) {
    const bool want = e.direction == Direction::activate;
    if (state.activated(e.gate) == want)
      flag(ViolationKind::non_alternating, step, phase,
           fmt::format("gate {} already {}", topo.gate_label(e.gate), want ? "activated" : "deactivated"));
    state.set(e.gate, want);
  };
  auto inspect = [&](std::size_t step, std::size_t phase, OutputIndex target) {
    const auto connected = connected_outputs(topo, state);
    if (connected.size() > 1)
      flag(ViolationKind::multiple_connected, step, phase, fmt::format("{} outputs connected", connected.size()));
    for (auto o : connected) {
      if (charged[o])
        flag(ViolationKind::isolation, step, phase, fmt::format("charged output {} reconnected", o));
      else if (o != target)
        flag(ViolationKind::stray_connection, step, phase, fmt::format("output {} connected", o));
    }
  };

  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const auto& step = s.steps[i];
    for (std::size_t p = 0; p < step.events.size(); ++p) {
      apply(step.events[p], i, p + 1);
      if (i > 0) inspect(i, p + 1, step.selected);
    }
    const auto connected = connected_outputs(topo, state);
    if (connected.size() != 1 || connected.front() != step.selected)
      flag(ViolationKind::selection_mismatch, i, 0,
           fmt::format("step should select {} but {} outputs are connected", step.selected, connected.size()));
    charged[step.selected] = 1;
  }

  const auto lock_step = s.steps.size();
  const auto last = s.visitation.back();
  for (std::size_t p = 0; p < s.final_lock.size(); ++p) {
    apply(s.final_lock[p], lock_step, p + 1);
    const auto connected = connected_outputs(topo, state);
    for (auto o : connected)
      if (o != last) flag(ViolationKind::isolation, lock_step, p + 1, fmt::format("charged output {} reconnected", o));
  }
  if (connected_count(topo, state) != 0)
    flag(ViolationKind::not_locked, lock_step, 0, "outputs still connected after final lock");
  return report;
}

/// Conventional select-then-relock cycle from the fully locked state: one
/// gate per level (the one matching the output digit) drops from the relock
/// voltage to 0, then all of them return.
inline std::vector<TransitionEvent> serial_selection_schedule(const MuxTopology& topo, OutputIndex output,
                                                              double gate_voltage = 1.0,
                                                              double relock_multiplier = 2.0) {
  if (!(gate_voltage > 0.0) || !(relock_multiplier > 0.0))
    throw std::invalid_argument("gate voltage and relock multiplier must be positive");
  const auto digits = topo.digits_of(output);
  const double swing = relock_multiplier * gate_voltage;
  std::vector<TransitionEvent> events;
  events.reserve(2 * digits.size());
  for (std::size_t l = 0; l < digits.size(); ++l) events.push_back({{l, digits[l]}, Direction::deactivate, swing});
  for (std::size_t l = 0; l < digits.size(); ++l) events.push_back({{l, digits[l]}, Direction::activate, swing});
  return events;
}

// ---------------------------------------------------------------------------
// Export

/// Text table: output number, digit map, ON/OFF for every gate after each step.
inline std::string schedule_table_text(const ChargeLockSchedule& s) {
  const auto& topo = s.topology;
  bool wide = false;
  for (auto b : topo.stack().bases()) wide = wide || b > 10;

  std::vector<std::string> header{"Output No", "Digits"};
  for (std::size_t l = 0; l < topo.levels(); ++l)
    for (std::size_t g = 0; g < topo.base(l); ++g) header.push_back(topo.gate_label({l, g}));

  std::vector<std::vector<std::string>> rows;
  rows.reserve(s.visitation.size());
  for (auto o : s.visitation) {
    const auto d = topo.digits_of(o);
    std::string digits;
    for (std::size_t l = 0; l < d.size(); ++l) {
      if (wide && l > 0) digits += '.';
      digits += std::to_string(d[l]);
    }
    std::vector<std::string> row{std::to_string(o), digits};
    for (std::size_t l = 0; l < topo.levels(); ++l)
      for (std::size_t g = 0; g < topo.base(l); ++g) row.emplace_back(g == d[l] ? "OFF" : "ON");
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());

  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c + 1 < r.size(); ++c) out += fmt::format("{:<{}}  ", r[c], width[c]);
    out += r.back() + "\n";
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

/// One row per transition: step,phase,level,gate,label,direction,delta_v_volts,selected_output.
/// Levels are 1-based; the final lock is reported as step = number of steps.
inline std::string schedule_csv(const ChargeLockSchedule& s) {
  std::string out = "step,phase,level,gate,label,direction,delta_v_volts,selected_output\n";
  auto emit = [&](std::size_t step, std::size_t phase, const TransitionEvent& e, OutputIndex sel) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", step, phase, e.gate.level + 1, e.gate.index,
                       s.topology.gate_label(e.gate), to_string(e.direction), e.delta_v, sel);
  };
  for (std::size_t i = 0; i < s.steps.size(); ++i)
    for (std::size_t p = 0; p < s.steps[i].events.size(); ++p) emit(i, p + 1, s.steps[i].events[p], s.steps[i].selected);
  for (std::size_t p = 0; p < s.final_lock.size(); ++p)
    emit(s.steps.size(), p + 1, s.final_lock[p], s.visitation.back());
  return out;
}

}  // namespace qlocksim
