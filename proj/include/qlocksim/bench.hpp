#pragma once

// Subcommands behind the qlocksim CLI. Each returns its text/CSV artifacts
// and an exit code instead of touching the filesystem, so runs can be
// compared byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qlocksim/charge_dynamics.hpp"
#include "qlocksim/config.hpp"
#include "qlocksim/constants.hpp"
#include "qlocksim/csv.hpp"
#include "qlocksim/energy_timing.hpp"
#include "qlocksim/golden_tables.hpp"
#include "qlocksim/mux_topology.hpp"
#include "qlocksim/report.hpp"
#include "qlocksim/sequence_engine.hpp"
#include "qlocksim/targets.hpp"

namespace qlocksim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Raised for requests that are well-formed but must not run (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string command;
  ScenarioConfig config;
  bool csv = false;
  std::string sweep;              ///< power: "N=2^4..2^14"
  std::string bases;              ///< sequence/verify: override the column stack
  bool force = false;             ///< simulate: allow more than 10 levels per dimension
  std::size_t random_stacks = 200;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string output;  ///< what goes to stdout
  std::vector<Artifact> artifacts;
};

inline constexpr std::size_t kSimulateMaxLevels = 10;

// ---------------------------------------------------------------------------
// Shared check builders

/// Compare generated schedules to the reference tables row by row.
inline std::vector<Check> golden_table_checks() {
  std::vector<Check> checks;
  for (const auto& table : golden::kTables) {
    const auto topo = build_topology(BaseStack({table.bases.begin(), table.bases.end()}), 1.0);
    const auto s = generate_schedule(topo);
    std::size_t bad_rows = 0;
    if (s.visitation.size() != table.rows.size()) bad_rows = table.rows.size();
    for (std::size_t i = 0; i < std::min(s.visitation.size(), table.rows.size()); ++i) {
      const auto& row = table.rows[i];
      const auto d = topo.digits_of(s.visitation[i]);
      std::string digits, gates;
      for (std::size_t l = 0; l < d.size(); ++l) {
        digits += std::to_string(d[l]);
        for (std::size_t g = 0; g < topo.base(l); ++g) gates += (g == d[l]) ? '0' : '1';
      }
      if (static_cast<OutputIndex>(row.output) != s.visitation[i] || digits != row.digits || gates != row.gates)
        ++bad_rows;
    }
    const bool verified = verify_schedule(s).passed();
    checks.push_back({fmt::format("sequence {}", table.name), fmt::format("{} rows", table.rows.size()),
                      fmt::format("{} mismatched rows, replay {}", bad_rows, verified ? "clean" : "violations"), "",
                      bad_rows == 0 && verified});
  }
  return checks;
}

/// Random stacks with N <= max_outputs, bases 2..8.
inline std::vector<BaseStack> random_stacks(std::size_t count, std::uint64_t max_outputs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> base_dist(2, 8);
  std::vector<BaseStack> out;
  out.reserve(count);
  while (out.size() < count) {
    std::vector<std::uint32_t> bases;
    std::uint64_t n = 1;
    std::uniform_int_distribution<std::size_t> levels_dist(1, 12);
    const auto want = levels_dist(rng);
    while (bases.size() < want) {
      const auto b = base_dist(rng);
      if (n * b > max_outputs) break;
      bases.push_back(b);
      n *= b;
    }
    if (bases.empty()) continue;
    out.emplace_back(std::move(bases));
  }
  return out;
}

inline std::vector<Check> isolation_checks(std::size_t stacks, std::uint64_t seed) {
  std::size_t failures = 0;
  for (const auto& stack : random_stacks(stacks, 4096, seed))
    if (!verify_schedule(generate_schedule(build_topology(stack, 1.0))).passed()) ++failures;
  std::size_t naive_caught = 0, naive_total = 0;
  for (std::size_t k = 2; k <= 12; ++k, ++naive_total)
    if (verify_schedule(sequential_schedule(build_topology(BaseStack::uniform(2, k), 1.0))).count(
            ViolationKind::isolation) > 0)
      ++naive_caught;
  return {
      {"isolation on random stacks", fmt::format("{} stacks pass", stacks),
       fmt::format("{} failing", failures), "", failures == 0},
      {"sequential order rejected", fmt::format("{} base-2 stacks K=2..12 fail", naive_total),
       fmt::format("{} rejected", naive_caught), "", naive_caught == naive_total},
  };
}

inline Check exact_relation(std::string name, double computed, double reference, double rel_tol = 1e-12) {
  const double dev = reference == 0.0 ? std::abs(computed) : std::abs(computed - reference) / std::abs(reference);
  return {std::move(name), si(reference, "J", 12), si(computed, "J", 12), fmt::format("{:.2g}", dev), dev <= rel_tol};
}

inline std::vector<Check> ledger_checks(double c_gate, double v_gate) {
  const auto swings = SwingAssignment::standard(v_gate);
  double worst_serial = 0.0, worst_parallel = 0.0, worst_switch = 0.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const auto topo = build_topology(BaseStack::uniform(2, k), c_gate);
    const double n = static_cast<double>(topo.output_count());
    const auto serial = ledger_serial_1d(topo, c_gate, swings);
    const auto parallel = ledger_parallel_1d(topo, c_gate, swings);
    const auto cf_s = p_serial_1d(n, c_gate, v_gate, 1.0);
    const auto cf_p = p_parallel_1d(n, static_cast<double>(k), c_gate, v_gate, 1.0);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    worst_serial = std::max(worst_serial, rel(serial.mux_energy(), cf_s.value("E_S-MUX1D")));
    worst_parallel = std::max(worst_parallel, rel(parallel.mux_energy(), 0.5 * cf_p.value("E_P-MUX1D")));
    worst_switch = std::max({worst_switch, rel(serial.switch_energy(), cf_s.value("E_S-SW1D")),
                             rel(parallel.switch_energy(), cf_p.value("E_P-SW1D"))});
  }
  auto mk = [](std::string name, std::string ref, double worst) {
    return Check{std::move(name), std::move(ref), fmt::format("worst rel err {:.2g}", worst), "", worst <= 1e-12};
  };
  return {mk("ledger serial 1D MUX, K=1..10", "4N(N-1) C_g V_g^2", worst_serial),
          mk("ledger parallel 1D MUX, K=1..10", "K N C_g V_g^2 / 2", worst_parallel),
          mk("ledger switch energy, K=1..10", "N C_g V_g^2", worst_switch)};
}

struct HoldRun {
  HoldCycleResult result;
  double bound = 0.0;
};

inline HoldRun run_hold(const ScenarioConfig& c, std::size_t rows, std::size_t cols, std::size_t cycles,
                        bool keep_trace) {
  auto array = HoldArray::initialised(rows, cols, c.c_holding, uniform_targets(rows, cols, -2.0, 0.0, c.seed));
  NoiseModel noise(c.temperature, c.seed);
  HoldCycleParams p;
  p.c_recharge = c.c_recharge;
  p.c_gate = c.c_gate;
  p.v_gate = c.v_gate;
  p.injection_fraction = c.injection_fraction;
  p.refresh_frequency = c.f_c;
  p.cycles = cycles;
  p.calibration_error = c.calibration_error;
  p.keep_trace = keep_trace;
  HoldRun run{simulate_hold_cycle(array, LeakageModel{c.i_leak}, noise, p), 0.0};
  run.bound = kElementaryCharge / c.c_holding + 3.0 * thermal_sigma(c.c_holding, c.temperature);
  return run;
}

/// Every numeric claim the model is expected to reproduce, evaluated with
/// the physical constants of `c` at the 2^14 x 2^14 reference scale.
inline std::vector<Check> reference_checks(const ScenarioConfig& c) {
  std::vector<Check> checks;
  const double cg = c.c_gate, vg = c.v_gate, fc = c.f_c, ch = c.c_holding;
  const double n = 16384.0;
  auto within = [](double computed, double reference, double tol) {
    return std::abs(computed - reference) <= tol * std::abs(reference);
  };

  const double ps = p_serial_2d(n, n, cg, vg, fc).total_power;
  checks.push_back({"serial 2D power (tol 1%)", "61.5 mW", si(ps, "W"), relative_deviation(ps, 61.5e-3),
                    within(ps, 61.5e-3, 0.01)});
  const double pp10 = p_parallel_2d(n, n, 14.0, cg, ch / 1000.0, vg, 0.1, fc).total_power;
  const double pp1 = p_parallel_2d(n, n, 14.0, cg, ch / 100.0, vg, 0.01, fc).total_power;
  checks.push_back({"parallel 2D power, Q=10 (tol 5%)", "11 uW", si(pp10, "W"), relative_deviation(pp10, 11e-6),
                    within(pp10, 11e-6, 0.05)});
  checks.push_back({"parallel 2D power, Q=1 (tol 5%)", "7.5 uW", si(pp1, "W"), relative_deviation(pp1, 7.5e-6),
                    within(pp1, 7.5e-6, 0.05)});
  checks.push_back({"serial/parallel reduction", "> 5000", fmt::format("{:.5g}", ps / pp10), "", ps / pp10 > 5000.0});

  for (auto& g : golden_table_checks()) checks.push_back(std::move(g));
  for (auto& g : isolation_checks(200, c.seed)) checks.push_back(std::move(g));
  for (auto& g : ledger_checks(cg, vg)) checks.push_back(std::move(g));

  const double sigma = thermal_sigma(ch, c.temperature);
  checks.push_back({"thermal noise floor", "[0.9, 1.1] uV", si(sigma, "V"), "", sigma >= 0.9e-6 && sigma <= 1.1e-6});
  const double step = kElementaryCharge / ch;
  checks.push_back({"charge step e/C_H", "[0.10, 0.12] uV", si(step, "V"), "", step >= 0.10e-6 && step <= 0.12e-6});
  const double ratio = p_gate(cg, vg, fc) / p_hold(ch, c.dv_holding, fc);
  checks.push_back({"P_g / P_H (tol 1%)", "1e4", fmt::format("{:.5g}", ratio), relative_deviation(ratio, 1e4),
                    within(ratio, 1e4, 0.01)});

  {
    const auto run = run_hold(c, 32, 32, 1000, false);
    checks.push_back({"hold 32x32, 1000 cycles", fmt::format("|V - target| <= {}", si(run.bound, "V")),
                      fmt::format("max {}, {} conservation errors", si(run.result.max_post_error, "V"),
                                  run.result.conservation_violations),
                      "",
                      run.result.max_post_error <= run.bound && run.result.conservation_violations == 0});
  }

  for (const double div : {100.0, 1000.0}) {
    const auto plan = required_recharge_voltage(-0.5, 10e-6, ch, ch / div);
    const double expect = div / 100.0 * 1e-3;
    checks.push_back({fmt::format("surcharge, C_R = C_H/{}", div), si(expect, "V"), si(plan.surcharge(), "V"),
                      fmt::format("{:.2g} steps", std::abs(plan.surcharge() - expect) / plan.resolution()),
                      std::abs(plan.surcharge() - expect) <= plan.resolution()});
  }

  for (const double k : {10.0, 14.0, 18.0}) {
    for (const double div : {100.0, 1000.0}) {
      const double side = std::exp2(k);
      const double cgt = 1e-6 * ch, cr = ch / div;
      const double r = t_serial_2d(side, side, ch, cgt, 1.0) / t_parallel_2d(side, side, k, cgt, cr, 1.0);
      checks.push_back({fmt::format("recharge time ratio, N=2^{}, C_R=C_H/{} (tol 10%)", k, div),
                        fmt::format("{}", div), fmt::format("{:.5g}", r), relative_deviation(r, div),
                        within(r, div, 0.10)});
    }
  }

  {
    const auto mux = build_topology(BaseStack::uniform(2, 14), cg);
    const std::vector<MuxTopology> pair{mux, mux};
    const std::vector<std::uint32_t> inputs{1, 1};
    const auto wires = wire_count(pair, inputs);
    checks.push_back({"wire count, two 14-level base-2 MUXes", "58", fmt::format("{}", wires), "", wires == 58});
    const double rate_ratio = switching_rate(n, n, fc, 16) / switching_rate(n, n, fc, 1);
    checks.push_back({"switching rate ratio, 16 inputs", "1/16", fmt::format("{}", rate_ratio), "",
                      rate_ratio == 1.0 / 16.0});
    const double b4 = p_parallel_2d(n, n, BaseStack::uniform(4, 7), cg, ch / 100.0, vg, 0.01, fc).total_power;
    const double b4_ratio = b4 / pp1;
    checks.push_back({"base-4 / base-2 power, Q=1", "0.65 +/- 0.01", fmt::format("{:.4f}", b4_ratio), "",
                      std::abs(b4_ratio - 0.65) <= 0.01});
  }
  return checks;
}

// ---------------------------------------------------------------------------
// Subcommands

inline MuxTopology sequence_topology(const RunOptions& o) {
  if (!o.bases.empty()) return build_topology(parse_bases(o.bases), o.config.mux_unit());
  return o.config.column_topology();
}

inline RunResult run_sequence(const RunOptions& o) {
  const auto topo = sequence_topology(o);
  if (2 * topo.output_count() + topo.stack().total_gates() > o.config.event_cap)
    throw UsageError("schedule exceeds event_cap; raise event_cap or choose a smaller stack");
  const auto s = generate_schedule(topo, o.config.v_gate);
  RunResult r;
  r.artifacts.push_back({"sequence_table.txt", schedule_table_text(s)});
  r.artifacts.push_back({"schedule.csv", schedule_csv(s)});
  r.output = o.csv ? r.artifacts[1].content : r.artifacts[0].content;
  return r;
}

inline RunResult run_verify(const RunOptions& o) {
  std::vector<Check> checks = golden_table_checks();
  const auto topo = sequence_topology(o);
  if (2 * topo.output_count() <= o.config.event_cap) {
    const auto report = verify_schedule(generate_schedule(topo, o.config.v_gate));
    checks.push_back({fmt::format("schedule replay, bases {}", format_bases(topo.stack())), "no violations",
                      fmt::format("{} violations", report.violations.size()), "", report.passed()});
  }
  for (auto& c : isolation_checks(o.random_stacks, o.config.seed)) checks.push_back(std::move(c));

  // Serial selection must connect exactly the requested output.
  {
    std::size_t bad = 0;
    const auto small = build_topology(BaseStack::uniform(2, 4), 1.0);
    for (OutputIndex out = 0; out < small.output_count(); ++out) {
      auto state = GateStateVector::fully_locked(small);
      const auto events = serial_selection_schedule(small, out);
      for (std::size_t i = 0; i < events.size(); ++i) {
        state.set(events[i].gate, events[i].direction == Direction::activate);
        if (i + 1 == small.levels()) {
          const auto conn = connected_outputs(small, state);
          if (conn.size() != 1 || conn.front() != out) ++bad;
        }
      }
      if (!state.is_fully_locked()) ++bad;
    }
    checks.push_back({"serial selection replay, 4-level base-2", "16 outputs selected singly",
                      fmt::format("{} failures", bad), "", bad == 0});
  }

  RunResult r;
  std::string csv = "check,passed,reference,computed\n";
  for (const auto& c : checks)
    csv += fmt::format("{},{},{},{}\n", csv_field(c.name), c.passed ? 1 : 0, csv_field(c.reference),
                       csv_field(c.computed));
  r.artifacts.push_back({"verify_report.txt", format_checks(checks)});
  r.artifacts.push_back({"verify.csv", csv});
  r.output = o.csv ? csv : r.artifacts[0].content;
  r.exit_code = all_passed(checks) ? kExitOk : kExitCheckFailed;
  return r;
}

struct SweepRange {
  int lo = 4;
  int hi = 14;
};

/// "N=2^4..2^14" or "K=4..14"
inline SweepRange parse_sweep(std::string_view text) {
  auto fail = [&] { return UsageError("sweep must look like N=2^4..2^14 or K=4..14, got '" + std::string(text) + "'"); };
  auto eq = text.find('=');
  if (eq == std::string_view::npos) throw fail();
  const auto var = detail::trim(text.substr(0, eq));
  auto rest = detail::trim(text.substr(eq + 1));
  const auto dots = rest.find("..");
  if (dots == std::string_view::npos) throw fail();
  auto lhs = detail::trim(rest.substr(0, dots));
  auto rhs = detail::trim(rest.substr(dots + 2));
  if (var == "N") {
    if (!lhs.starts_with("2^") || !rhs.starts_with("2^")) throw fail();
    lhs.remove_prefix(2);
    rhs.remove_prefix(2);
  } else if (var != "K") {
    throw fail();
  }
  SweepRange s;
  auto num = [&](std::string_view v, int& out) {
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw fail();
  };
  num(lhs, s.lo);
  num(rhs, s.hi);
  if (s.lo < 1 || s.hi < s.lo || s.hi > 40) throw fail();
  return s;
}

inline std::string power_sweep_csv(const ScenarioConfig& c, SweepRange range) {
  struct Point {
    int k;
    double ps1, pp1, ps2, pp2;
  };
  std::vector<std::future<Point>> jobs;
  for (int k = range.lo; k <= range.hi; ++k) {
    jobs.push_back(std::async(std::launch::async, [&c, k] {
      const double n = std::exp2(k);
      return Point{k, p_serial_1d(n, c.c_gate, c.v_gate, c.f_c).total_power,
                   p_parallel_1d(n, static_cast<double>(k), c.c_gate, c.v_gate, c.f_c).total_power,
                   p_serial_2d(n, n, c.c_gate, c.v_gate, c.f_c).total_power,
                   p_parallel_2d(n, n, static_cast<double>(k), c.c_gate, c.c_recharge, c.v_gate, c.dv_recharge, c.f_c)
                       .total_power};
    }));
  }
  std::string out =
      "log2_N,N,log2_units_2d,P_S-1D_W,P_P-1D_W,P_S-2D_W,P_P-2D_W,log2_P_S-1D,log2_P_P-1D,log2_P_S-2D,log2_P_P-2D\n";
  for (auto& j : jobs) {
    const auto p = j.get();
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", p.k, std::exp2(p.k), 2 * p.k, p.ps1, p.pp1, p.ps2, p.pp2,
                       std::log2(p.ps1), std::log2(p.pp1), std::log2(p.ps2), std::log2(p.pp2));
  }
  return out;
}

inline RunResult run_power(const RunOptions& o) {
  const auto& c = o.config;
  const double n = static_cast<double>(c.n()), m = static_cast<double>(c.m());
  const double k = static_cast<double>(c.column_bases.levels());
  const std::vector<PowerBreakdown> breakdowns{
      p_serial_1d(n, c.c_gate, c.v_gate, c.f_c),
      p_parallel_1d(c.column_bases, c.c_gate, c.v_gate, c.f_c),
      p_serial_2d(n, m, c.c_gate, c.v_gate, c.f_c),
      p_parallel_2d(n, m, c.column_bases, c.c_gate, c.c_recharge, c.v_gate, c.dv_recharge, c.f_c),
  };
  const double ts = t_serial_2d(n, m, c.c_holding, c.c_gate, c.r_scale);
  const double tp = t_parallel_2d(n, m, k, c.c_gate, c.c_recharge, c.r_scale);

  std::string text = fmt::format("array {} x {} (columns {}, rows {}), f_c = {}\n\n", c.n(), c.m(),
                                 format_bases(c.column_bases), format_bases(c.row_bases), si(c.f_c, "Hz"));
  for (const auto& b : breakdowns) {
    text += fmt::format("{}\n", b.scheme);
    for (const auto& comp : b.components)
      text += fmt::format("  {:<10} {}\n", comp.name, comp.unit == "1" ? fmt::format("{:.6g}", comp.value)
                                                                        : si(comp.value, comp.unit, 6));
  }
  text += fmt::format("\nP_S-2D / P_P-2D = {:.6g}\n", breakdowns[2].total_power / breakdowns[3].total_power);
  text += fmt::format("recharge time: serial 2D {}, parallel 2D {}, ratio {:.6g} (R = {})\n", si(ts, "s"),
                      si(tp, "s"), ts / tp, si(c.r_scale, "Ohm"));

  RunResult r;
  r.artifacts.push_back({"power_report.txt", text});
  r.artifacts.push_back({"power.csv", breakdown_csv(breakdowns)});
  if (!o.sweep.empty()) {
    r.artifacts.push_back({"power_sweep.csv", power_sweep_csv(c, parse_sweep(o.sweep))});
    r.output = o.csv ? r.artifacts.back().content : text + "\n" + r.artifacts.back().content;
  } else {
    r.output = o.csv ? r.artifacts[1].content : text;
  }
  return r;
}

inline std::uint64_t simulate_event_estimate(const ScenarioConfig& c) {
  const auto n = c.n(), m = c.m();
  const auto kc = c.column_bases.levels(), kr = c.row_bases.levels();
  const std::uint64_t serial = n * m * (2 * kc + 2 * kr + 4);
  const std::uint64_t parallel = m * (2 * (n - 1) + 2 * kr + 2 + n);
  const std::uint64_t hold = c.hold_rows * c.hold_cols * c.hold_cycles;
  return serial + parallel + hold;
}

inline RunResult run_simulate(const RunOptions& o) {
  const auto& c = o.config;
  if (!o.force && (c.column_bases.levels() > kSimulateMaxLevels || c.row_bases.levels() > kSimulateMaxLevels))
    throw UsageError(fmt::format("simulate is limited to {} levels per dimension (got {} x {}); pass --force to override",
                                 kSimulateMaxLevels, c.column_bases.levels(), c.row_bases.levels()));
  if (const auto events = simulate_event_estimate(c); events > c.event_cap)
    throw UsageError(fmt::format("simulate needs ~{} events, above event_cap = {}", events, c.event_cap));

  const auto cols = build_topology(c.column_bases, c.c_gate);
  const auto rows = build_topology(c.row_bases, c.c_gate);
  const auto swings = SwingAssignment::standard(c.v_gate, c.relock_multiplier);
  const auto targets = c.targets_file.empty() ? column_gaussian_targets(c.m(), c.n(), c.dv_recharge, c.seed + 1)
                                              : load_targets(c.targets_file, c.m(), c.n());

  const auto par = ledger_parallel_2d(cols, rows, c.c_gate, c.c_recharge, targets, swings);
  const auto ser = ledger_serial_2d(cols, rows, c.c_gate, swings);
  const double n = static_cast<double>(c.n()), m = static_cast<double>(c.m());
  const auto cf_p = p_parallel_2d(n, m, c.column_bases, c.c_gate, c.c_recharge, c.v_gate, c.dv_recharge, 1.0);
  const auto cf_s = p_serial_2d(n, m, c.c_gate, c.v_gate, 1.0);

  std::vector<Check> checks;
  checks.push_back(exact_relation("parallel switch = E_P-SW2D", par.switch_energy(), cf_p.value("E_P-SW2D")));
  const bool binary = c.column_bases.is_uniform(2) && c.row_bases.is_uniform(2);
  const bool standard_relock = c.relock_multiplier == 2.0;
  if (binary) {
    checks.push_back(exact_relation("parallel column MUX x 2 = E_P-col", 2.0 * par.energy(Family::column_mux_gate),
                                    cf_p.value("E_P-col")));
    if (standard_relock) {
      checks.push_back(exact_relation("parallel row MUX = E_P-row", par.energy(Family::row_mux_gate),
                                      cf_p.value("E_P-row")));
      checks.push_back(exact_relation("serial MUX = E_S-MUX2D", ser.mux_energy(), cf_s.value("E_S-MUX2D")));
    }
  }
  checks.push_back(exact_relation("serial switch = E_S-SW2D", ser.switch_energy(), cf_s.value("E_S-SW2D")));

  const auto hold = run_hold(c, c.hold_rows, c.hold_cols, c.hold_cycles, true);
  checks.push_back({fmt::format("hold {}x{}, {} cycles", c.hold_rows, c.hold_cols, c.hold_cycles),
                    fmt::format("|V - target| <= {}", si(hold.bound, "V")),
                    fmt::format("max {}", si(hold.result.max_post_error, "V")), "",
                    hold.result.max_post_error <= hold.bound});
  checks.push_back({"charge conservation", "0 violations",
                    fmt::format("{} violations", hold.result.conservation_violations), "",
                    hold.result.conservation_violations == 0});

  std::string text = fmt::format("seed {}\nparallel 2D ledger: mux {}, switch {}, recharge {} (closed-form E_RC {})\n",
                                 c.seed, si(par.mux_energy(), "J", 6), si(par.switch_energy(), "J", 6),
                                 si(par.recharge_energy(), "J", 6), si(cf_p.value("E_RC"), "J", 6));
  text += fmt::format("serial 2D ledger: mux {}, switch {}\n", si(ser.mux_energy(), "J", 6),
                      si(ser.switch_energy(), "J", 6));
  text += format_checks(checks);

  RunResult r;
  r.artifacts.push_back({"simulate_report.txt", text});
  r.artifacts.push_back({"ledger_parallel_2d.csv", ledger_csv(par)});
  r.artifacts.push_back({"ledger_serial_2d.csv", ledger_csv(ser)});
  r.artifacts.push_back({"trace.csv", trace_csv(hold.result)});
  r.output = o.csv ? r.artifacts[1].content : text;
  r.exit_code = all_passed(checks) ? kExitOk : kExitCheckFailed;
  return r;
}

inline RunResult run_plan(const RunOptions& o) {
  const auto& c = o.config;
  const double n = static_cast<double>(c.n()), m = static_cast<double>(c.m());
  const std::vector<MuxTopology> muxes{c.column_topology(), c.row_topology()};
  const std::vector<std::uint32_t> inputs{c.n_inputs, 1};
  const auto wires = wire_count(muxes, inputs);
  const double rate = switching_rate(n, m, c.f_c, c.n_inputs);
  const double rate1 = switching_rate(n, m, c.f_c, 1);
  const double pp = p_parallel_2d(n, m, c.column_bases, c.c_gate, c.c_recharge, c.v_gate, c.dv_recharge, c.f_c)
                        .total_power;
  const double ps = p_serial_2d(n, m, c.c_gate, c.v_gate, c.f_c).total_power;
  const auto bp = cooling_budget_check(pp, c.cooling_budget);
  const auto bs = cooling_budget_check(ps, c.cooling_budget);
  const double fc_max = c.cooling_budget / (pp / c.f_c);

  std::string csv = "quantity,value,unit\n";
  csv += fmt::format("wires,{},1\n", wires);
  csv += fmt::format("column_inputs,{},1\n", c.n_inputs);
  csv += fmt::format("switching_rate,{},Hz\n", rate);
  csv += fmt::format("switching_rate_single_input,{},Hz\n", rate1);
  csv += fmt::format("P_P-2D,{},W\n", pp);
  csv += fmt::format("P_S-2D,{},W\n", ps);
  csv += fmt::format("cooling_budget,{},W\n", c.cooling_budget);
  csv += fmt::format("parallel_fits,{},1\n", bp.fits ? 1 : 0);
  csv += fmt::format("parallel_margin,{},1\n", bp.margin);
  csv += fmt::format("serial_fits,{},1\n", bs.fits ? 1 : 0);
  csv += fmt::format("serial_margin,{},1\n", bs.margin);
  csv += fmt::format("parallel_max_f_c,{},Hz\n", fc_max);

  std::string text = fmt::format("array {} x {}, {} column input(s)\n", c.n(), c.m(), c.n_inputs);
  text += fmt::format("  wires from warmer stage   {}\n", wires);
  text += fmt::format("  switching rate per input  {} (single input: {})\n", si(rate, "Hz"), si(rate1, "Hz"));
  text += fmt::format("  parallel 2D power         {}  {} budget {} (margin {:.4g}%)\n", si(pp, "W"),
                      bp.fits ? "fits" : "exceeds", si(c.cooling_budget, "W"), 100.0 * bp.margin);
  text += fmt::format("  serial 2D power           {}  {} budget {} (margin {:.4g}%)\n", si(ps, "W"),
                      bs.fits ? "fits" : "exceeds", si(c.cooling_budget, "W"), 100.0 * bs.margin);
  text += fmt::format("  max parallel f_c          {}\n", si(fc_max, "Hz"));

  RunResult r;
  r.artifacts.push_back({"plan_report.txt", text});
  r.artifacts.push_back({"plan.csv", csv});
  r.output = o.csv ? csv : text;
  return r;
}

inline RunResult run_reference_check(const RunOptions& o) {
  const auto checks = reference_checks(o.config);
  std::string csv = "check,passed,reference,computed,deviation\n";
  for (const auto& c : checks)
    csv += fmt::format("{},{},{},{},{}\n", csv_field(c.name), c.passed ? 1 : 0, csv_field(c.reference),
                       csv_field(c.computed), csv_field(c.deviation));
  RunResult r;
  r.artifacts.push_back({"reference_check.txt", format_checks(checks)});
  r.artifacts.push_back({"reference_check.csv", csv});
  r.output = o.csv ? csv : r.artifacts[0].content;
  r.exit_code = all_passed(checks) ? kExitOk : kExitCheckFailed;
  return r;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"sequence", "verify", "power", "simulate", "plan", "paper-check"};
  return names;
}

/// Dispatch; UsageError/ConfigError/invalid_argument map to exit code 2.
inline RunResult run_subcommand(const RunOptions& o) {
  try {
    if (o.command == "sequence") return run_sequence(o);
    if (o.command == "verify") return run_verify(o);
    if (o.command == "power") return run_power(o);
    if (o.command == "simulate") return run_simulate(o);
    if (o.command == "plan") return run_plan(o);
    if (o.command == "paper-check") return run_reference_check(o);
    return {kExitUsage, fmt::format("unknown subcommand '{}'\n", o.command), {}};
  } catch (const UsageError& e) {
    return {kExitUsage, fmt::format("error: {}\n", e.what()), {}};
  } catch (const ConfigError& e) {
    return {kExitUsage, fmt::format("config error: {}\n", e.what()), {}};
  } catch (const std::invalid_argument& e) {
    return {kExitUsage, fmt::format("error: {}\n", e.what()), {}};
  } catch (const std::out_of_range& e) {
    return {kExitUsage, fmt::format("error: {}\n", e.what()), {}};
  }
}

}  // namespace qlocksim
