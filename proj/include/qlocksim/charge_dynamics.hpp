#pragma once

// Single-electron resolution model of holding (C_H) and recharging (C_R)
// capacitors.
//
// Sign convention: a capacitor stores an integer number of elementary
// charges q, positive or negative, and sits at V = q·e/C. Negative lock
// voltages are negative counts relative to ground. Leakage and charge
// injection both lower the stored count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qlocksim/constants.hpp"

namespace qlocksim {

using ElectronCount = std::int64_t;

namespace detail {

// Floor/ceil that treat values within a relative 1e-9 of an integer as that
// integer, so x = n·e/C·C/e does not drift to n±1.
inline ElectronCount snap_floor(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<ElectronCount>(r);
  return static_cast<ElectronCount>(std::floor(x));
}

inline ElectronCount snap_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<ElectronCount>(r);
  return static_cast<ElectronCount>(std::ceil(x));
}

}  // namespace detail

struct CapacitorState {
  double capacitance = 0.0;  ///< [F]
  ElectronCount charge = 0;  ///< elementary charges

  [[nodiscard]] double voltage() const noexcept { return static_cast<double>(charge) * kElementaryCharge / capacitance; }
  [[nodiscard]] double step() const noexcept { return kElementaryCharge / capacitance; }

  /// Nearest representable state to a voltage.
  static CapacitorState at_voltage(double capacitance, double volts) {
    if (!(capacitance > 0.0)) throw std::invalid_argument("capacitance must be positive");
    return {capacitance, static_cast<ElectronCount>(std::llround(volts * capacitance / kElementaryCharge))};
  }
};

/// kT/C noise source. Identical seeds give identical sample streams.
class NoiseModel {
 public:
  NoiseModel(double temperature, std::uint64_t seed) : temperature_(temperature), seed_(seed), rng_(seed) {
    if (temperature < 0.0) throw std::invalid_argument("temperature must be non-negative");
  }

  [[nodiscard]] double temperature() const noexcept { return temperature_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  /// Charge noise sampled when a capacitor is isolated, in whole electrons.
  ElectronCount sample_electrons(double capacitance) {
    if (temperature_ == 0.0) return 0;
    const double sigma_q = std::sqrt(kBoltzmann * temperature_ * capacitance) / kElementaryCharge;
    std::normal_distribution<double> dist(0.0, sigma_q);
    return static_cast<ElectronCount>(std::llround(dist(rng_)));
  }

 private:
  double temperature_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

/// Constant leakage current per holding capacitor.
struct LeakageModel {
  double current = 0.0;  ///< [A], >= 0

  [[nodiscard]] ElectronCount drift_electrons(double interval) const {
    if (current < 0.0) throw std::invalid_argument("leakage current must be non-negative");
    return static_cast<ElectronCount>(std::llround(current * interval / kElementaryCharge));
  }
};

struct RechargePlan {
  double target_voltage = 0.0;       ///< V_H
  double drift = 0.0;                ///< δV_H to compensate
  ElectronCount deficit = 0;         ///< N_H
  double recharge_capacitance = 0.0; ///< C_R
  double rounded_target = 0.0;       ///< Round(V_H) on the e/C_R grid
  double recharge_voltage = 0.0;     ///< V_R
  double injection_offset = 0.0;     ///< systematic offset expected on lock [V]

  [[nodiscard]] double resolution() const noexcept { return kElementaryCharge / recharge_capacitance; }
  [[nodiscard]] double surcharge() const noexcept { return recharge_voltage - rounded_target; }
  /// Electrons to load onto C_R so that it sits exactly at V_R.
  [[nodiscard]] ElectronCount recharge_electrons() const noexcept {
    return static_cast<ElectronCount>(std::llround(recharge_voltage * recharge_capacitance / kElementaryCharge));
  }
};

/// RMS thermal voltage noise sqrt(k_B·T/C).
inline double thermal_sigma(double capacitance, double temperature) {
  if (!(capacitance > 0.0)) throw std::invalid_argument("capacitance must be positive");
  if (temperature < 0.0) throw std::invalid_argument("temperature must be non-negative");
  return std::sqrt(kBoltzmann * temperature / capacitance);
}

/// Voltage after connecting C_R at v_recharge to C_H at v_holding.
inline double equilibrium_voltage(double v_recharge, double c_recharge, double v_holding, double c_holding) {
  if (!(c_recharge > 0.0) || !(c_holding > 0.0)) throw std::invalid_argument("capacitances must be positive");
  return (v_recharge * c_recharge + v_holding * c_holding) / (c_recharge + c_holding);
}

/// Round a voltage down onto the e/C grid.
inline double round_to_grid(double volts, double capacitance) {
  const double step = kElementaryCharge / capacitance;
  return static_cast<double>(detail::snap_floor(volts / step)) * step;
}

/// Plan for restoring a holding capacitor from a known deficit in electrons.
inline RechargePlan plan_from_deficit(double target_voltage, ElectronCount deficit, double c_holding,
                                      double c_recharge) {
  if (!(c_recharge > 0.0) || !(c_holding > 0.0)) throw std::invalid_argument("capacitances must be positive");
  RechargePlan p;
  p.target_voltage = target_voltage;
  p.deficit = deficit;
  p.drift = static_cast<double>(deficit) * kElementaryCharge / c_holding;
  p.recharge_capacitance = c_recharge;
  p.rounded_target = round_to_grid(target_voltage, c_recharge);
  p.recharge_voltage = p.rounded_target + static_cast<double>(deficit) * p.resolution();
  return p;
}

/// N_H = ceil(C_H·δV_H/e); V_R = Round(V_H) + N_H·e/C_R.
inline RechargePlan required_recharge_voltage(double target_voltage, double drift, double c_holding,
                                              double c_recharge) {
  if (drift < 0.0) throw std::invalid_argument("drift must be non-negative");
  if (!(c_holding > 0.0)) throw std::invalid_argument("capacitances must be positive");
  const auto deficit = detail::snap_ceil(c_holding * drift / kElementaryCharge);
  auto p = plan_from_deficit(target_voltage, deficit, c_holding, c_recharge);
  p.drift = drift;
  return p;
}

struct RedistributionResult {
  CapacitorState recharge;
  CapacitorState holding;
  ElectronCount moved = 0;  ///< electrons gained by the holding capacitor (negative if it lost charge)
};

/// Connect two capacitors and let whole electrons flow to the minimum-energy
/// split. Both end within one electron step of the continuous equilibrium;
/// the total count is conserved exactly. Ties keep the split closer to the
/// starting state.
inline RedistributionResult redistribute(const CapacitorState& recharge, const CapacitorState& holding) {
  if (!(recharge.capacitance > 0.0) || !(holding.capacitance > 0.0))
    throw std::invalid_argument("capacitances must be positive");
  const ElectronCount total = recharge.charge + holding.charge;
  const double ideal = static_cast<double>(total) * holding.capacitance / (recharge.capacitance + holding.capacitance);
  const auto lo = static_cast<ElectronCount>(std::floor(ideal));
  const auto hi = lo + 1;
  ElectronCount q_h = (ideal - static_cast<double>(lo) < static_cast<double>(hi) - ideal) ? lo : hi;
  if (ideal - static_cast<double>(lo) == static_cast<double>(hi) - ideal)
    q_h = (std::abs(lo - holding.charge) <= std::abs(hi - holding.charge)) ? lo : hi;
  return {{recharge.capacitance, total - q_h}, {holding.capacitance, q_h}, q_h - holding.charge};
}

/// Electrons held in a transistor channel at gate voltage v_gate.
inline ElectronCount channel_electrons(double c_gate, double v_gate) {
  return static_cast<ElectronCount>(std::llround(v_gate * c_gate / kElementaryCharge));
}

/// Electrons pushed into C_H when the switch opens.
inline ElectronCount injected_electrons(double c_gate, double v_gate, double fraction) {
  if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("injected fraction must lie in [0, 1]");
  return static_cast<ElectronCount>(std::llround(fraction * static_cast<double>(channel_electrons(c_gate, v_gate))));
}

/// Magnitude of the systematic voltage offset from charge injection [V].
inline double charge_injection_offset(double c_gate, double v_gate, double c_holding, double fraction) {
  if (!(c_holding > 0.0)) throw std::invalid_argument("holding capacitance must be positive");
  return static_cast<double>(injected_electrons(c_gate, v_gate, fraction)) * kElementaryCharge / c_holding;
}

// ---------------------------------------------------------------------------
// Multi-cycle hold simulation

/// Row-major array of holding capacitors and their target voltages.
struct HoldArray {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double c_holding = 0.0;
  std::vector<double> targets;          ///< requested voltages [V]
  std::vector<ElectronCount> charge;    ///< current state, elementary charges

  [[nodiscard]] std::size_t size() const noexcept { return rows * cols; }

  /// Every capacitor starts exactly at its target snapped to the e/C_H grid.
  static HoldArray initialised(std::size_t rows, std::size_t cols, double c_holding, std::vector<double> targets) {
    if (targets.size() != rows * cols) throw std::invalid_argument("target count does not match array size");
    HoldArray a{rows, cols, c_holding, std::move(targets), {}};
    a.charge.reserve(a.targets.size());
    for (double v : a.targets) a.charge.push_back(CapacitorState::at_voltage(c_holding, v).charge);
    return a;
  }

  [[nodiscard]] ElectronCount target_electrons(std::size_t i) const {
    return CapacitorState::at_voltage(c_holding, targets[i]).charge;
  }
};

struct HoldCycleParams {
  double c_recharge = 0.0;          ///< C_R [F]
  double c_gate = 0.0;              ///< transistor gate [F]
  double v_gate = 1.0;              ///< switch drive [V]
  double injection_fraction = 0.5;  ///< fraction of channel electrons injected on lock
  double refresh_frequency = 1e3;   ///< f_c [Hz]
  std::size_t cycles = 1;
  /// Relative error of the drift estimate used for planning (0 = perfect calibration).
  double calibration_error = 0.0;
  bool keep_trace = true;
};

struct TraceRow {
  std::size_t cycle = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  double pre_refresh = 0.0;
  double post_refresh = 0.0;
  ElectronCount moved = 0;
};

struct HoldCycleResult {
  std::vector<TraceRow> trace;
  std::uint64_t seed = 0;
  double max_post_error = 0.0;  ///< max |post-refresh V - snapped target|
  double max_pre_error = 0.0;
  std::size_t conservation_violations = 0;
  std::int64_t electrons_moved = 0;
};

/// Per cycle and capacitor: leak for 1/f_c, record, plan from the calibrated
/// deficit, prepare C_R (with kT/C noise), redistribute, record, then open the
/// switch (charge injection plus kT/C noise on C_H).
inline HoldCycleResult simulate_hold_cycle(HoldArray& array, const LeakageModel& leakage, NoiseModel& noise,
                                           const HoldCycleParams& params) {
  if (array.charge.size() != array.size() || array.targets.size() != array.size())
    throw std::invalid_argument("plan/array size mismatch");
  if (!(params.refresh_frequency > 0.0)) throw std::invalid_argument("refresh frequency must be positive");
  if (!(params.c_recharge > 0.0) || !(array.c_holding > 0.0))
    throw std::invalid_argument("capacitances must be positive");

  const double c_h = array.c_holding;
  const double step_h = kElementaryCharge / c_h;
  const auto leak = leakage.drift_electrons(1.0 / params.refresh_frequency);
  const auto injected = params.c_gate > 0.0
                            ? injected_electrons(params.c_gate, params.v_gate, params.injection_fraction)
                            : ElectronCount{0};

  std::vector<ElectronCount> target(array.size());
  for (std::size_t i = 0; i < array.size(); ++i) target[i] = array.target_electrons(i);

  HoldCycleResult result;
  result.seed = noise.seed();
  if (params.keep_trace) result.trace.reserve(params.cycles * array.size());

  for (std::size_t cycle = 0; cycle < params.cycles; ++cycle) {
    for (std::size_t i = 0; i < array.size(); ++i) {
      auto& q = array.charge[i];
      q -= leak;
      const double pre = static_cast<double>(q) * step_h;

      const ElectronCount true_deficit = target[i] - q;
      const auto planned = static_cast<ElectronCount>(
          std::llround(static_cast<double>(true_deficit) * (1.0 + params.calibration_error)));
      const double v_target = static_cast<double>(target[i]) * step_h;
      const auto plan = plan_from_deficit(v_target, planned, c_h, params.c_recharge);

      CapacitorState rc{params.c_recharge, plan.recharge_electrons() + noise.sample_electrons(params.c_recharge)};
      CapacitorState hc{c_h, q};
      const auto r = redistribute(rc, hc);
      if (r.recharge.charge + r.holding.charge != rc.charge + hc.charge) ++result.conservation_violations;
      q = r.holding.charge;
      const double post = static_cast<double>(q) * step_h;

      result.max_pre_error = std::max(result.max_pre_error, std::abs(pre - v_target));
      result.max_post_error = std::max(result.max_post_error, std::abs(post - v_target));
      result.electrons_moved += r.moved;
      if (params.keep_trace)
        result.trace.push_back({cycle, i / array.cols, i % array.cols, pre, post, r.moved});

      q -= injected;
      q += noise.sample_electrons(c_h);
    }
  }
  return result;
}

inline std::string trace_csv(const HoldCycleResult& r) {
  std::string out = fmt::format("# seed={}\n", r.seed);
  out += "cycle,row,column,pre_refresh_volts,post_refresh_volts,electrons_moved\n";
  for (const auto& t : r.trace)
    out += fmt::format("{},{},{},{},{},{}\n", t.cycle, t.row, t.col, t.pre_refresh, t.post_refresh, t.moved);
  return out;
}

}  // namespace qlocksim
