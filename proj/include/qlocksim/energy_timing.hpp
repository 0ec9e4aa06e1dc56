#pragma once

// Closed-form refresh energy, power and timing for serial (cross-bar) and
// parallel charge-locking arrays, plus an event ledger that counts actual
// gate transitions and serves as an independent check on the closed forms.
//
// Energy conventions differ between the two routes:
//   * closed forms reproduce the published expressions verbatim; the
//     parallel MUX term charges C·ΔV² per transition;
//   * the ledger charges the physical ½·C·ΔV² per transition, so a full
//     on/off cycle costs C·ΔV².
// Serial MUX, switch and row-MUX terms therefore agree exactly, while the
// parallel column-MUX ledger is exactly half of its closed form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qlocksim/mux_topology.hpp"
#include "qlocksim/sequence_engine.hpp"

namespace qlocksim {

// ---------------------------------------------------------------------------
// Closed forms

struct PowerComponent {
  std::string name;
  double value = 0.0;
  std::string unit;  ///< "J", "W" or "1"
};

struct PowerBreakdown {
  std::string scheme;
  std::vector<PowerComponent> components;
  double total_power = 0.0;  ///< [W]

  [[nodiscard]] double value(std::string_view name) const {
    for (const auto& c : components)
      if (c.name == name) return c.value;
    throw std::out_of_range("no component named " + std::string(name));
  }
};

namespace detail {
inline void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}
inline void require_non_negative(double v, const char* what) {
  if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " must be non-negative");
}
}  // namespace detail

/// P_H = C_H·δV_H²·f_c
inline double p_hold(double c_holding, double drift, double f_c) {
  detail::require_non_negative(c_holding, "C_H");
  detail::require_non_negative(f_c, "f_c");
  return c_holding * drift * drift * f_c;
}

/// P_g = C_g·V_g²·f_c
inline double p_gate(double c_gate, double v_gate, double f_c) {
  detail::require_non_negative(c_gate, "C_g");
  detail::require_non_negative(f_c, "f_c");
  return c_gate * v_gate * v_gate * f_c;
}

/// Q = C_R·δV_R² / (C_g·V_g²)
inline double q_factor(double c_recharge, double dv_recharge, double c_gate, double v_gate) {
  detail::require_positive(c_gate, "C_g");
  detail::require_positive(v_gate, "V_g");
  return c_recharge * dv_recharge * dv_recharge / (c_gate * v_gate * v_gate);
}

/// Serial 1D: one MUX drives N transistors, full relock at 2V_g per selection.
inline PowerBreakdown p_serial_1d(double n, double c_gate, double v_gate, double f_c) {
  detail::require_positive(n, "N");
  detail::require_non_negative(f_c, "f_c");
  const double u = c_gate * v_gate * v_gate;
  const double e_sw = n * u;
  const double e_mux = 4.0 * (n - 1.0) * u;
  const double e_mux1d = n * e_mux;
  const double p = (e_mux1d + e_sw) * f_c;
  return {"serial-1d",
          {{"E_S-SW1D", e_sw, "J"}, {"E_S-MUX", e_mux, "J"}, {"E_S-MUX1D", e_mux1d, "J"}, {"P_S-1D", p, "W"}},
          p};
}

/// Serial 2D cross-bar: N column and M row control lines, both multiplexed.
inline PowerBreakdown p_serial_2d(double n, double m, double c_gate, double v_gate, double f_c) {
  detail::require_positive(n, "N");
  detail::require_positive(m, "M");
  detail::require_non_negative(f_c, "f_c");
  const double u = c_gate * v_gate * v_gate;
  const double e_sw = n * m * (n + m) * u;
  const double e_row = 4.0 * (m - 1.0) * u;
  const double e_col = 4.0 * (n - 1.0) * u;
  const double e_mux = n * m * (e_row + e_col);
  const double p = (e_mux + e_sw) * f_c;
  return {"serial-2d",
          {{"E_S-SW2D", e_sw, "J"},
           {"E_S-row", e_row, "J"},
           {"E_S-col", e_col, "J"},
           {"E_S-MUX2D", e_mux, "J"},
           {"P_S-2D", p, "W"}},
          p};
}

/// Parallel 1D with a K-level MUX over N outputs.
inline PowerBreakdown p_parallel_1d(double n, double levels, double c_gate, double v_gate, double f_c) {
  detail::require_positive(n, "N");
  detail::require_non_negative(levels, "K");
  detail::require_non_negative(f_c, "f_c");
  const double u = c_gate * v_gate * v_gate;
  const double e_sw = n * u;
  const double e_mux = levels * n * u;
  const double p = (e_sw + e_mux) * f_c;
  return {"parallel-1d", {{"E_P-SW1D", e_sw, "J"}, {"E_P-MUX1D", e_mux, "J"}, {"P_P-1D", p, "W"}}, p};
}

/// Base-2 tree: K = log2 N.
inline PowerBreakdown p_parallel_1d(double n, double c_gate, double v_gate, double f_c) {
  detail::require_positive(n, "N");
  return p_parallel_1d(n, std::log2(n), c_gate, v_gate, f_c);
}

/// General stack: the level count replaces log2 N.
inline PowerBreakdown p_parallel_1d(const BaseStack& stack, double c_gate, double v_gate, double f_c) {
  return p_parallel_1d(static_cast<double>(stack.output_count()), static_cast<double>(stack.levels()), c_gate, v_gate,
                       f_c);
}

/// Parallel 2D: M rows of N units, column MUX with `column_levels` levels,
/// base-2 row MUX selected serially.
inline PowerBreakdown p_parallel_2d(double n, double m, double column_levels, double c_gate, double c_recharge,
                                    double v_gate, double dv_recharge, double f_c) {
  detail::require_positive(n, "N");
  detail::require_positive(m, "M");
  detail::require_non_negative(c_recharge, "C_R");
  detail::require_non_negative(f_c, "f_c");
  const double u = c_gate * v_gate * v_gate;
  const double e_sw = n * m * u;
  const double e_col = n * m * column_levels * u;
  const double e_row = 4.0 * m * (m - 1.0) * u;
  const double e_rc = n * m * c_recharge * dv_recharge * dv_recharge;
  const double q = q_factor(c_recharge, dv_recharge, c_gate, v_gate);
  const double p = (e_sw + e_col + e_row + e_rc) * f_c;
  return {"parallel-2d",
          {{"E_P-SW2D", e_sw, "J"},
           {"E_P-col", e_col, "J"},
           {"E_P-row", e_row, "J"},
           {"E_RC", e_rc, "J"},
           {"Q", q, "1"},
           {"P_P-2D", p, "W"}},
          p};
}

inline PowerBreakdown p_parallel_2d(double n, double m, const BaseStack& column_stack, double c_gate,
                                    double c_recharge, double v_gate, double dv_recharge, double f_c) {
  return p_parallel_2d(n, m, static_cast<double>(column_stack.levels()), c_gate, c_recharge, v_gate, dv_recharge, f_c);
}

/// N²·(5 + K + Q)·C_g·V_g²·f_c, the large-N form for square arrays.
inline double p_parallel_2d_approx(double n, double levels, double q, double c_gate, double v_gate, double f_c) {
  return n * n * (5.0 + levels + q) * c_gate * v_gate * v_gate * f_c;
}

// ---------------------------------------------------------------------------
// Timing (RC-limited proportionalities scaled by a drive resistance)

inline double t_serial_2d(double n, double m, double c_holding, double c_gate, double r_scale) {
  detail::require_positive(r_scale, "R_scale");
  const double nm = n * m;
  return r_scale * (nm * c_holding + nm * std::max(n, m) * c_gate + nm * std::max(n * c_gate / 2.0, m * c_gate / 2.0));
}

inline double t_parallel_1d(double n, double levels, double c_gate, double c_recharge, double r_scale) {
  detail::require_positive(r_scale, "R_scale");
  return r_scale * (n * c_gate + n * c_recharge + levels * n * c_gate);
}

inline double t_parallel_2d(double n, double m, double levels, double c_gate, double c_recharge, double r_scale) {
  return m * t_parallel_1d(n, levels, c_gate, c_recharge, r_scale) + r_scale * m * (m * c_gate / 2.0);
}

// ---------------------------------------------------------------------------
// Planning

/// Charge events per second seen by each independent MUX input.
inline double switching_rate(double n, double m, double f_c, std::uint32_t inputs) {
  if (inputs == 0) throw std::invalid_argument("at least one input required");
  detail::require_non_negative(f_c, "f_c");
  return n * m * f_c / static_cast<double>(inputs);
}

struct BudgetCheck {
  bool fits = false;
  double margin = 0.0;  ///< (budget - load) / budget
};

inline BudgetCheck cooling_budget_check(double load, double budget) {
  detail::require_positive(budget, "cooling budget");
  detail::require_non_negative(load, "load");
  return {load <= budget, (budget - load) / budget};
}

// ---------------------------------------------------------------------------
// Event ledger

enum class Partition { mux, transistor, recharge };

inline const char* to_string(Partition p) noexcept {
  switch (p) {
    case Partition::mux: return "mux";
    case Partition::transistor: return "switch";
    case Partition::recharge: return "recharge";
  }
  return "unknown";
}

enum class Family {
  mux_gate,         ///< 1D MUX addressing gate
  column_mux_gate,
  row_mux_gate,
  unit_gate,        ///< serial 1D: a unit's own transistor gate
  column_line,      ///< cross-bar column control line
  row_line,         ///< cross-bar row control line
  hold_line,        ///< shared GH line of one row
  recharge_cap,     ///< per-column recharging capacitor
};

inline Partition partition_of(Family f) noexcept {
  switch (f) {
    case Family::mux_gate:
    case Family::column_mux_gate:
    case Family::row_mux_gate: return Partition::mux;
    case Family::recharge_cap: return Partition::recharge;
    default: return Partition::transistor;
  }
}

inline const char* family_prefix(Family f) noexcept {
  switch (f) {
    case Family::mux_gate: return "mux";
    case Family::column_mux_gate: return "col_mux";
    case Family::row_mux_gate: return "row_mux";
    case Family::unit_gate: return "unit_gate";
    case Family::column_line: return "col_line";
    case Family::row_line: return "row_line";
    case Family::hold_line: return "GH";
    case Family::recharge_cap: return "C_R";
  }
  return "?";
}

struct LedgerKey {
  Family family;
  std::uint64_t a = 0;  ///< level for MUX gates, line/unit/column index otherwise
  std::uint64_t b = 0;  ///< gate index for MUX gates
  friend auto operator<=>(const LedgerKey&, const LedgerKey&) = default;
};

struct LedgerEntry {
  std::string label;
  std::uint64_t transitions = 0;
  double energy = 0.0;  ///< [J]
};

/// Per-element transition counts and ½·C·ΔV² energies.
class EnergyLedger {
 public:
  void record(const LedgerKey& key, double capacitance, double delta_v, std::uint64_t times = 1) {
    if (!(capacitance >= 0.0)) throw std::invalid_argument("capacitance must be non-negative");
    auto& e = entries_[key];
    if (e.label.empty()) e.label = default_label(key);
    e.transitions += times;
    e.energy += static_cast<double>(times) * 0.5 * capacitance * delta_v * delta_v;
  }

  void label(const LedgerKey& key, std::string name) { entries_[key].label = std::move(name); }

  [[nodiscard]] const std::map<LedgerKey, LedgerEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

  [[nodiscard]] double energy(Partition p) const {
    double s = 0.0;
    for (const auto& [k, e] : entries_)
      if (partition_of(k.family) == p) s += e.energy;
    return s;
  }
  [[nodiscard]] double energy(Family f) const {
    double s = 0.0;
    for (const auto& [k, e] : entries_)
      if (k.family == f) s += e.energy;
    return s;
  }
  [[nodiscard]] std::uint64_t transitions(Partition p) const {
    std::uint64_t s = 0;
    for (const auto& [k, e] : entries_)
      if (partition_of(k.family) == p) s += e.transitions;
    return s;
  }
  [[nodiscard]] std::uint64_t transitions(Family f) const {
    std::uint64_t s = 0;
    for (const auto& [k, e] : entries_)
      if (k.family == f) s += e.transitions;
    return s;
  }
  [[nodiscard]] double mux_energy() const { return energy(Partition::mux); }
  [[nodiscard]] double switch_energy() const { return energy(Partition::transistor); }
  [[nodiscard]] double recharge_energy() const { return energy(Partition::recharge); }
  [[nodiscard]] double total_energy() const { return mux_energy() + switch_energy() + recharge_energy(); }

 private:
  static std::string default_label(const LedgerKey& k) {
    switch (k.family) {
      case Family::mux_gate:
      case Family::column_mux_gate:
      case Family::row_mux_gate: return fmt::format("{}:L{}G{}", family_prefix(k.family), k.a + 1, k.b);
      default: return fmt::format("{}[{}]", family_prefix(k.family), k.a);
    }
  }

  std::map<LedgerKey, LedgerEntry> entries_;
};

/// Swing per gate family. Missing entries are an error once a ledger needs them.
struct SwingAssignment {
  std::optional<double> parallel_mux;  ///< typically V_g
  std::optional<double> serial_mux;    ///< typically 2·V_g
  std::optional<double> transistor;    ///< typically V_g

  static SwingAssignment standard(double v_gate, double relock_multiplier = 2.0) {
    return {v_gate, relock_multiplier * v_gate, v_gate};
  }
};

namespace detail {
inline double need(const std::optional<double>& v, const char* family) {
  if (!v || !(*v > 0.0)) throw std::invalid_argument(std::string("unassigned voltage swing for ") + family);
  return *v;
}
}  // namespace detail

/// Record MUX gate transitions. Events must carry a positive swing.
inline void record_transitions(EnergyLedger& ledger, Family family, const MuxTopology& topo,
                               std::span<const TransitionEvent> events) {
  for (const auto& e : events) {
    if (!topo.contains(e.gate)) throw std::invalid_argument("event references gate outside topology");
    if (!(e.delta_v > 0.0)) throw std::invalid_argument("unassigned voltage swing on transition event");
    const LedgerKey key{family, e.gate.level, e.gate.index};
    if (!ledger.entries().contains(key))
      ledger.label(key, fmt::format("{}:{}", family_prefix(family), topo.gate_label(e.gate)));
    ledger.record(key, topo.gate_capacitance(e.gate.level), e.delta_v);
  }
}

/// A full on/off cycle of a control line: two transitions.
inline void record_line_cycle(EnergyLedger& ledger, Family family, std::uint64_t index, double capacitance,
                              double swing) {
  ledger.record({family, index, 0}, capacitance, swing, 2);
}

/// Sweep transitions of a parallel schedule (initialisation and final lock
/// excluded unless asked for).
inline void record_sweep(EnergyLedger& ledger, Family family, const ChargeLockSchedule& s,
                         bool include_boundary = false) {
  for (std::size_t i = include_boundary ? 0 : 1; i < s.steps.size(); ++i)
    record_transitions(ledger, family, s.topology, s.steps[i].events);
  if (include_boundary) record_transitions(ledger, family, s.topology, s.final_lock);
}

struct LineCycle {
  std::uint64_t index = 0;
  double capacitance = 0.0;
};

struct TransistorLinePlan {
  Family family = Family::hold_line;
  std::vector<LineCycle> lines;
};

/// One parallel sweep plus the transistor lines cycled once each.
inline EnergyLedger simulate_energy(const ChargeLockSchedule& sweep, const TransistorLinePlan& lines,
                                    const SwingAssignment& swings) {
  EnergyLedger ledger;
  if (sweep.steps.size() > 1) {
    (void)detail::need(swings.parallel_mux, "parallel MUX");
    record_sweep(ledger, Family::mux_gate, sweep);
  }
  if (!lines.lines.empty()) {
    const double dv = detail::need(swings.transistor, "transistor lines");
    for (const auto& l : lines.lines) record_line_cycle(ledger, lines.family, l.index, l.capacitance, dv);
  }
  return ledger;
}

/// Serial selections of the listed outputs plus their unit gate cycles.
inline EnergyLedger simulate_energy(const MuxTopology& topo, std::span<const OutputIndex> serial_outputs,
                                    double c_gate, const SwingAssignment& swings) {
  EnergyLedger ledger;
  if (serial_outputs.empty()) return ledger;
  const double mux_dv = detail::need(swings.serial_mux, "serial MUX");
  const double sw_dv = detail::need(swings.transistor, "transistor lines");
  for (auto o : serial_outputs) {
    const auto events = serial_selection_schedule(topo, o, mux_dv, 1.0);
    record_transitions(ledger, Family::mux_gate, topo, events);
    record_line_cycle(ledger, Family::unit_gate, o, c_gate, sw_dv);
  }
  return ledger;
}

/// Serial 1D pass: every output selected once.
inline EnergyLedger ledger_serial_1d(const MuxTopology& topo, double c_gate, const SwingAssignment& swings) {
  std::vector<OutputIndex> all(topo.output_count());
  for (OutputIndex i = 0; i < all.size(); ++i) all[i] = i;
  return simulate_energy(topo, all, c_gate, swings);
}

/// Parallel 1D pass: one Gray sweep, then a single GH cycle across N gates.
inline EnergyLedger ledger_parallel_1d(const MuxTopology& topo, double c_gate, const SwingAssignment& swings) {
  const double dv = detail::need(swings.parallel_mux, "parallel MUX");
  const auto sweep = generate_schedule(topo, dv);
  TransistorLinePlan gh{Family::hold_line, {{0, static_cast<double>(topo.output_count()) * c_gate}}};
  return simulate_energy(sweep, gh, swings);
}

/// Serial cross-bar 2D pass: for every unit, column and row selections plus
/// one cycle of its column line (M gates) and row line (N gates).
inline EnergyLedger ledger_serial_2d(const MuxTopology& columns, const MuxTopology& rows, double c_gate,
                                     const SwingAssignment& swings) {
  const double mux_dv = detail::need(swings.serial_mux, "serial MUX");
  const double sw_dv = detail::need(swings.transistor, "transistor lines");
  const auto n = columns.output_count();
  const auto m = rows.output_count();
  EnergyLedger ledger;
  for (OutputIndex r = 0; r < m; ++r) {
    const auto row_sel = serial_selection_schedule(rows, r, mux_dv, 1.0);
    for (OutputIndex c = 0; c < n; ++c) {
      record_transitions(ledger, Family::column_mux_gate, columns, serial_selection_schedule(columns, c, mux_dv, 1.0));
      record_transitions(ledger, Family::row_mux_gate, rows, row_sel);
      record_line_cycle(ledger, Family::column_line, c, static_cast<double>(m) * c_gate, sw_dv);
      record_line_cycle(ledger, Family::row_line, r, static_cast<double>(n) * c_gate, sw_dv);
    }
  }
  return ledger;
}

/// Parallel 2D pass, per row m: column Gray sweep preparing the recharging
/// capacitors, serial row-MUX selection of row m, one GH_m cycle. When
/// `targets` (row-major M×N volts) is non-empty, each recharging capacitor
/// is charged from the previous row's voltage in its column (cyclically),
/// costing ½·C_R·ΔV².
inline EnergyLedger ledger_parallel_2d(const MuxTopology& columns, const MuxTopology& rows, double c_gate,
                                       double c_recharge, std::span<const double> targets,
                                       const SwingAssignment& swings) {
  const double col_dv = detail::need(swings.parallel_mux, "parallel MUX");
  const double row_dv = detail::need(swings.serial_mux, "serial MUX");
  const double sw_dv = detail::need(swings.transistor, "transistor lines");
  const auto n = columns.output_count();
  const auto m = rows.output_count();
  if (!targets.empty() && targets.size() != n * m)
    throw std::invalid_argument("target matrix must hold M x N voltages");

  const auto sweep = generate_schedule(columns, col_dv);
  EnergyLedger ledger;
  for (OutputIndex r = 0; r < m; ++r) {
    record_sweep(ledger, Family::column_mux_gate, sweep);
    record_transitions(ledger, Family::row_mux_gate, rows, serial_selection_schedule(rows, r, row_dv, 1.0));
    record_line_cycle(ledger, Family::hold_line, r, static_cast<double>(n) * c_gate, sw_dv);
    if (!targets.empty()) {
      const auto prev = (r + m - 1) % m;
      for (OutputIndex c = 0; c < n; ++c)
        ledger.record({Family::recharge_cap, c, 0}, c_recharge, targets[r * n + c] - targets[prev * n + c]);
    }
  }
  return ledger;
}

// ---------------------------------------------------------------------------
// Export

inline std::string breakdown_csv(std::span<const PowerBreakdown> breakdowns) {
  std::string out = "scheme,component,value,unit\n";
  for (const auto& b : breakdowns)
    for (const auto& c : b.components) out += fmt::format("{},{},{},{}\n", b.scheme, c.name, c.value, c.unit);
  return out;
}

inline std::string ledger_csv(const EnergyLedger& ledger) {
  std::string out = "component,partition,count,joules\n";
  for (const auto& [k, e] : ledger.entries())
    out += fmt::format("{},{},{},{}\n", e.label, to_string(partition_of(k.family)), e.transitions, e.energy);
  for (auto p : {Partition::mux, Partition::transistor, Partition::recharge})
    out += fmt::format("total_{},{},{},{}\n", to_string(p), to_string(p), ledger.transitions(p), ledger.energy(p));
  return out;
}

}  // namespace qlocksim
