#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "qlocksim/charge_dynamics.hpp"

using namespace qlocksim;

namespace {

constexpr double kE = 1.602176634e-19;
constexpr double kKb = 1.380649e-23;
constexpr double kCH = 1.4e-12;

// Minimum-energy integer split by exhaustive search. Capacitances are small
// integers so (T-q)^2*C_H + q^2*C_R is exact; ties go to the split nearest
// the starting holding charge.
std::int64_t brute_force_holding_charge(std::int64_t q_r, std::int64_t q_h, std::int64_t c_r, std::int64_t c_h) {
  const std::int64_t total = q_r + q_h;
  const std::int64_t lo = std::min<std::int64_t>(0, total) - 1, hi = std::max<std::int64_t>(0, total) + 1;
  std::int64_t best = lo;
  __int128 best_e = -1;
  for (std::int64_t q = lo; q <= hi; ++q) {
    const __int128 e = static_cast<__int128>(total - q) * (total - q) * c_h + static_cast<__int128>(q) * q * c_r;
    if (best_e < 0 || e < best_e || (e == best_e && std::llabs(q - q_h) < std::llabs(best - q_h))) {
      best = q;
      best_e = e;
    }
  }
  return best;
}

HoldCycleParams quiet_params(std::size_t cycles) {
  HoldCycleParams p;
  p.c_recharge = kCH / 100.0;
  p.c_gate = 0.0;
  p.refresh_frequency = 1e3;
  p.cycles = cycles;
  return p;
}

}  // namespace

TEST(ThermalSigma, Examples) {
  const double s = thermal_sigma(kCH, 0.1);
  EXPECT_NEAR(s, std::sqrt(kKb * 0.1 / kCH), 1e-18);
  EXPECT_NEAR(s, 0.99e-6, 0.01e-6);
  EXPECT_EQ(thermal_sigma(1e-15, 0.0), 0.0);
  EXPECT_NEAR(thermal_sigma(14e-12, 0.1), s / std::sqrt(10.0), 1e-15 * s);
  EXPECT_THROW(thermal_sigma(0.0, 0.1), std::invalid_argument);
}

TEST(EquilibriumVoltage, Examples) {
  EXPECT_DOUBLE_EQ(equilibrium_voltage(-0.3, 1e-15, -0.3, 1e-12), -0.3);
  EXPECT_DOUBLE_EQ(equilibrium_voltage(2.0, 1e-12, 0.0, 1e-12), 1.0);
  const double vh = -0.73, d = 10e-6;
  EXPECT_NEAR(equilibrium_voltage(vh + 100.0 * d, kCH / 100.0, vh - d, kCH), vh, 1e-15);
}

TEST(RechargePlan, SurchargeExamples) {
  for (const double div : {100.0, 1000.0}) {
    const auto p = required_recharge_voltage(-0.5, 10e-6, kCH, kCH / div);
    const double n_h = std::ceil(kCH * 10e-6 / kE);
    EXPECT_EQ(p.deficit, static_cast<ElectronCount>(n_h));
    EXPECT_NEAR(p.surcharge(), n_h * kE / (kCH / div), 1e-15);
    EXPECT_NEAR(p.surcharge(), div * 1e-5, p.resolution()) << "C_R = C_H/" << div;
  }
  const auto zero = required_recharge_voltage(-0.5, 0.0, kCH, kCH / 100.0);
  EXPECT_EQ(zero.deficit, 0);
  EXPECT_DOUBLE_EQ(zero.recharge_voltage, zero.rounded_target);
  EXPECT_THROW(required_recharge_voltage(-0.5, -1e-6, kCH, kCH / 100.0), std::invalid_argument);
}

TEST(RechargePlan, RoundIsFloorOntoGrid) {
  const double c = kCH / 100.0, step = kE / c;
  for (double v : {-1.2345, -0.5, 0.0, 0.0014111, 0.7}) {
    const double r = round_to_grid(v, c);
    EXPECT_LE(r, v + 1e-12 * step);
    EXPECT_GT(r, v - step);
    EXPECT_NEAR(r / step, std::round(r / step), 1e-6);
  }
  // Exact grid points stay put.
  EXPECT_DOUBLE_EQ(round_to_grid(37 * step, c), 37 * step);
}

TEST(RechargePlan, ResolutionBounds) {
  EXPECT_NEAR(kE / kCH, 0.114e-6, 0.001e-6);
  const auto p = required_recharge_voltage(0.0, 0.0, kCH, kCH / 100.0);
  EXPECT_NEAR(p.resolution(), 11.44e-6, 0.01e-6);
  EXPECT_GT(p.resolution(), 10e-6);
}

TEST(Redistribute, Examples) {
  const CapacitorState a{1e-15, 40}, b{1e-12, 40000};
  EXPECT_EQ(redistribute(a, b).moved, 0);
  const auto r = redistribute({1e-15, 2}, {1e-15, 0});
  EXPECT_EQ(r.moved, 1);
  EXPECT_EQ(r.holding.charge, 1);
  EXPECT_EQ(r.recharge.charge, 1);
  EXPECT_THROW(redistribute({0.0, 1}, {1e-15, 0}), std::invalid_argument);
}

TEST(Redistribute, MatchesBruteForceOracle) {
  std::mt19937_64 rng(gen::kSeed + 20);
  std::uniform_int_distribution<std::int64_t> charge(-300, 300), cap(1, 60);
  for (int trial = 0; trial < 20000; ++trial) {
    const auto qr = charge(rng), qh = charge(rng), cr = cap(rng), ch = cap(rng);
    const auto r = redistribute({static_cast<double>(cr), qr}, {static_cast<double>(ch), qh});
    ASSERT_EQ(r.holding.charge, brute_force_holding_charge(qr, qh, cr, ch))
        << qr << " " << qh << " " << cr << " " << ch;
    ASSERT_EQ(r.recharge.charge + r.holding.charge, qr + qh);
  }
}

TEST(Redistribute, WithinOneStepOfContinuousEquilibrium) {
  std::mt19937_64 rng(gen::kSeed + 21);
  std::uniform_real_distribution<double> volts(-2.0, 0.5), ratio(1.0, 1000.0);
  for (int trial = 0; trial < 5000; ++trial) {
    const double cr = kCH / ratio(rng);
    const auto rc = CapacitorState::at_voltage(cr, volts(rng));
    const auto hc = CapacitorState::at_voltage(kCH, volts(rng));
    const double v_eq = equilibrium_voltage(rc.voltage(), cr, hc.voltage(), kCH);
    const auto r = redistribute(rc, hc);
    EXPECT_LE(std::abs(r.holding.voltage() - v_eq), kE / kCH);
    EXPECT_LE(std::abs(r.recharge.voltage() - v_eq), kE / cr);
  }
}

TEST(ChargeInjection, Examples) {
  const auto n = channel_electrons(1.4e-18, 1.0);
  EXPECT_GE(n, 8);
  EXPECT_LE(n, 10);
  EXPECT_EQ(n, std::llround(1.4e-18 / kE));
  const double off = charge_injection_offset(1.4e-18, 1.0, kCH, 0.5);
  EXPECT_NEAR(off, 0.57e-6, 0.01e-6);
  EXPECT_EQ(charge_injection_offset(1.4e-18, 1.0, kCH, 0.0), 0.0);
  EXPECT_THROW(charge_injection_offset(1.4e-18, 1.0, kCH, 1.5), std::invalid_argument);
}

TEST(Leakage, DriftPerCycle) {
  const auto n = LeakageModel{14e-15}.drift_electrons(1e-3);
  EXPECT_EQ(n, std::llround(14e-15 * 1e-3 / kE));
  EXPECT_NEAR(static_cast<double>(n) * kE / kCH, 10e-6, 0.1e-6);
  EXPECT_EQ(LeakageModel{0.0}.drift_electrons(1.0), 0);
}

TEST(HoldCycle, QuietArrayStaysAtTargets) {
  auto array = HoldArray::initialised(4, 4, kCH, std::vector<double>(16, -0.8));
  const auto before = array.charge;
  NoiseModel noise(0.0, 7);
  const auto r = simulate_hold_cycle(array, LeakageModel{0.0}, noise, quiet_params(10));
  EXPECT_EQ(array.charge, before);
  for (const auto& row : r.trace) {
    EXPECT_EQ(row.pre_refresh, row.post_refresh);
    EXPECT_EQ(row.moved, 0);
  }
}

TEST(HoldCycle, DriftBeforeRefreshIsTenMicrovolts) {
  auto array = HoldArray::initialised(2, 2, kCH, std::vector<double>(4, -0.5));
  NoiseModel noise(0.0, 1);
  const auto r = simulate_hold_cycle(array, LeakageModel{14e-15}, noise, quiet_params(5));
  const double expected = std::llround(14e-15 * 1e-3 / kE) * kE / kCH;
  EXPECT_NEAR(r.max_pre_error, expected, 1e-12);
  EXPECT_NEAR(r.max_pre_error, 10e-6, 0.1e-6);
  EXPECT_LE(r.max_post_error, kE / kCH);
}

TEST(HoldCycle, ThousandCyclesWithinBound) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(-2.0, 0.0);
  std::vector<double> targets(32 * 32);
  for (auto& t : targets) t = v(rng);
  auto array = HoldArray::initialised(32, 32, kCH, targets);
  NoiseModel noise(0.1, 42);
  HoldCycleParams p = quiet_params(1000);
  p.c_gate = 1.4e-18;
  p.keep_trace = false;
  const auto r = simulate_hold_cycle(array, LeakageModel{14e-15}, noise, p);
  EXPECT_EQ(r.conservation_violations, 0u);
  EXPECT_LE(r.max_post_error, kE / kCH + 3.0 * std::sqrt(kKb * 0.1 / kCH));
}

TEST(HoldCycle, SizeMismatchThrows) {
  auto array = HoldArray::initialised(2, 2, kCH, std::vector<double>(4, 0.0));
  array.charge.pop_back();
  NoiseModel noise(0.0, 1);
  EXPECT_THROW(simulate_hold_cycle(array, LeakageModel{0.0}, noise, quiet_params(1)), std::invalid_argument);
  EXPECT_THROW(HoldArray::initialised(2, 2, kCH, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST(HoldCycle, CalibrationErrorDegradesRestoration) {
  auto run = [](double err) {
    auto array = HoldArray::initialised(4, 4, kCH, std::vector<double>(16, -1.0));
    NoiseModel noise(0.0, 1);
    auto p = quiet_params(20);
    p.calibration_error = err;
    return simulate_hold_cycle(array, LeakageModel{14e-15}, noise, p).max_post_error;
  };
  EXPECT_LE(run(0.0), kE / kCH);
  EXPECT_GT(run(0.2), 10.0 * kE / kCH);
}

// Properties

TEST(ChargeProperty, ConservationAlways) {
  std::mt19937_64 rng(gen::kSeed + 22);
  std::uniform_int_distribution<std::int64_t> q(-(1LL << 40), 1LL << 40);
  std::uniform_real_distribution<double> logc(-18.0, -11.0);
  for (int trial = 0; trial < 20000; ++trial) {
    const CapacitorState a{std::pow(10.0, logc(rng)), q(rng)}, b{std::pow(10.0, logc(rng)), q(rng)};
    const auto r = redistribute(a, b);
    ASSERT_EQ(r.recharge.charge + r.holding.charge, a.charge + b.charge);
    ASSERT_EQ(r.moved, r.holding.charge - b.charge);
  }
}

TEST(ChargeProperty, RestorationWithinOneElectron) {
  std::mt19937_64 rng(gen::kSeed + 23);
  std::uniform_real_distribution<double> v(-2.0, 0.0), frac(0.0, 1.0), logdiv(0.0, 3.0);
  for (int trial = 0; trial < 20000; ++trial) {
    const double c_r = kCH / std::pow(10.0, logdiv(rng));
    const double drift = frac(rng) * 100.0 * kE / kCH;
    const auto target = CapacitorState::at_voltage(kCH, v(rng));
    const auto plan = required_recharge_voltage(target.voltage(), drift, kCH, c_r);
    const CapacitorState drifted{kCH, target.charge - plan.deficit};
    const CapacitorState rc{c_r, plan.recharge_electrons()};
    // Round-consistent target: the continuous equilibrium of the plan as realised.
    const double consistent = equilibrium_voltage(rc.voltage(), c_r, drifted.voltage(), kCH);
    const auto r = redistribute(rc, drifted);
    ASSERT_LE(std::abs(r.holding.voltage() - consistent), kE / kCH) << "trial " << trial;
  }
}

TEST(ChargeProperty, DeficitMonotoneInDrift) {
  std::mt19937_64 rng(gen::kSeed + 24);
  std::uniform_real_distribution<double> d(0.0, 1e-3);
  for (int trial = 0; trial < 20000; ++trial) {
    double a = d(rng), b = d(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(required_recharge_voltage(-0.5, a, kCH, kCH / 100.0).deficit,
              required_recharge_voltage(-0.5, b, kCH, kCH / 100.0).deficit);
  }
}

TEST(ChargeProperty, SeededTracesAreIdentical) {
  auto run = [](std::uint64_t seed) {
    auto array = HoldArray::initialised(8, 8, kCH, std::vector<double>(64, -0.6));
    NoiseModel noise(0.1, seed);
    auto p = quiet_params(20);
    p.c_gate = 1.4e-18;
    return trace_csv(simulate_hold_cycle(array, LeakageModel{14e-15}, noise, p));
  };
  EXPECT_EQ(run(11), run(11));
  EXPECT_NE(run(11), run(12));
}
