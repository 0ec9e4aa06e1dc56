#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "qlocksim/csv.hpp"
#include "qlocksim/energy_timing.hpp"
#include "qlocksim/targets.hpp"

using namespace qlocksim;

namespace {

constexpr double kCg = 1.4e-18;
constexpr double kCH = 1.4e-12;
constexpr double kU = kCg;  // C_g·V_g² at V_g = 1 V

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

MuxTopology binary(std::size_t k, double c = kCg) { return build_topology(BaseStack::uniform(2, k), c); }

// Parallel sweep energy at swing v: level i changes (b_i - 1)·Π_{j>i} b_j times,
// each change costs two half-transitions on a gate of Π_{j<i} b_j unit gates.
double sweep_energy_oracle(const MuxTopology& t, double v) {
  double e = 0.0;
  for (std::size_t i = 0; i < t.levels(); ++i) {
    double slower = 1.0, faster = 1.0;
    for (std::size_t j = i + 1; j < t.levels(); ++j) slower *= t.base(j);
    for (std::size_t j = 0; j < i; ++j) faster *= t.base(j);
    e += (t.base(i) - 1.0) * slower * faster * t.unit_capacitance() * v * v;
  }
  return e;
}

}  // namespace

TEST(ClosedForm, HoldAndGate) {
  EXPECT_NEAR(p_hold(kCH, 10e-6, 1e3), 1.4e-19, 1e-33);
  EXPECT_EQ(p_hold(kCH, 0.0, 1e3), 0.0);
  EXPECT_NEAR(p_gate(kCg, 1.0, 1e3), 1.4e-15, 1e-29);
  EXPECT_EQ(p_gate(kCg, 0.0, 1e3), 0.0);
  EXPECT_NEAR(p_gate(kCg, 1.0, 1e3) / p_hold(kCH, 10e-6, 1e3), 1e4, 1e-8);
}

TEST(ClosedForm, Q) { EXPECT_NEAR(q_factor(1.4e-15, 0.1, 1.4e-18, 1.0), 10.0, 1e-12); }

TEST(ClosedForm, Serial1D) {
  EXPECT_NEAR(p_serial_1d(1, kCg, 1.0, 1.0).total_power, kU, 1e-12 * kU);
  EXPECT_NEAR(p_serial_1d(4, kCg, 1.0, 1.0).total_power, 52 * kU, 1e-12 * kU);
  for (double n : {2.0, 16.0, 1024.0})
    EXPECT_NEAR(p_serial_1d(n, kCg, 1.0, 1.0).total_power, (4 * n * n - 3 * n) * kU, 1e-12 * n * n * kU);
}

TEST(ClosedForm, Serial2D) {
  const double n = 16384.0;
  const auto p = p_serial_2d(n, n, kCg, 1.0, 1e3);
  EXPECT_NEAR(p.total_power, 5 * n * n * (2 * n - 1.6) * kU * 1e3, 1e-12 * p.total_power);
  EXPECT_NEAR(p.total_power, 61.5e-3, 0.01 * 61.5e-3);
  // 5NM(N+M-8/5) at N=M=1 is 2u (the two-switch, zero-MUX limit).
  EXPECT_NEAR(p_serial_2d(1, 1, kCg, 1.0, 1.0).total_power, 2 * kU, 1e-12 * kU);
  // Superlinear exponent 3/2 in the unit count N²; cubic in the side N.
  const double s = 1024.0;
  const double base = p_serial_2d(s, s, kCg, 1.0, 1.0).total_power;
  EXPECT_NEAR(p_serial_2d(s * std::sqrt(2.0), s * std::sqrt(2.0), kCg, 1.0, 1.0).total_power / base,
              2 * std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(p_serial_2d(2 * s, 2 * s, kCg, 1.0, 1.0).total_power / base, 8.0, 1e-2);
}

TEST(ClosedForm, Parallel1D) {
  EXPECT_NEAR(p_parallel_1d(2.0, kCg, 1.0, 1.0).total_power, 4 * kU, 1e-12 * kU);
  EXPECT_NEAR(p_parallel_1d(16.0, kCg, 1.0, 1.0).total_power, 80 * kU, 1e-12 * kU);
  EXPECT_NEAR(p_parallel_1d(BaseStack::uniform(2, 4), kCg, 1.0, 1.0).total_power, 80 * kU, 1e-12 * kU);
  const double r = p_parallel_1d(std::exp2(30), kCg, 1.0, 1.0).total_power /
                   p_parallel_1d(std::exp2(29), kCg, 1.0, 1.0).total_power;
  EXPECT_NEAR(r, 2.0 * 31.0 / 30.0, 1e-12);
}

TEST(ClosedForm, Parallel2D) {
  const double n = 16384.0;
  const auto q10 = p_parallel_2d(n, n, 14.0, kCg, 1.4e-15, 1.0, 0.1, 1e3);
  const double oracle = (n * n * (1 + 14) + 4 * n * (n - 1)) * kU * 1e3 + n * n * 1.4e-15 * 0.01 * 1e3;
  EXPECT_NEAR(q10.total_power, oracle, 1e-12 * oracle);
  EXPECT_NEAR(q10.value("Q"), 10.0, 1e-12);
  EXPECT_NEAR(q10.total_power, 11e-6, 0.05 * 11e-6);
  const auto q1 = p_parallel_2d(n, n, 14.0, kCg, 1.4e-14, 1.0, 0.01, 1e3);
  EXPECT_NEAR(q1.total_power, 7.5e-6, 0.05 * 7.5e-6);
  EXPECT_LT(q10.total_power / p_serial_2d(n, n, kCg, 1.0, 1e3).total_power, 1.0 / 5000.0);
  // Large-N form.
  EXPECT_NEAR(p_parallel_2d_approx(n, 14.0, 10.0, kCg, 1.0, 1e3) / q10.total_power, 1.0, 1e-3);
}

TEST(ClosedForm, Base4VersusBase2) {
  const double n = 16384.0;
  const double b2 = p_parallel_2d(n, n, BaseStack::uniform(2, 14), kCg, 1.4e-14, 1.0, 0.01, 1e3).total_power;
  const double b4 = p_parallel_2d(n, n, BaseStack::uniform(4, 7), kCg, 1.4e-14, 1.0, 0.01, 1e3).total_power;
  EXPECT_NEAR(b4 / b2, 13.0 / 20.0, 0.01);
}

TEST(ClosedForm, ScalesLinearlyInFcQuadraticallyInVg) {
  const double n = 512.0, m = 256.0;
  auto all = [&](double v, double f) {
    return std::vector<double>{
        p_serial_1d(n, kCg, v, f).total_power,
        p_parallel_1d(n, kCg, v, f).total_power,
        p_serial_2d(n, m, kCg, v, f).total_power,
        // δV_R scaled with V_g keeps Q fixed, so E_RC scales alongside.
        p_parallel_2d(n, m, 9.0, kCg, 1e-15, v, 0.1 * v, f).total_power,
        p_gate(kCg, v, f),
    };
  };
  const auto base = all(1.0, 1e3), f3 = all(1.0, 3e3), v2 = all(2.0, 1e3);
  for (std::size_t i = 0; i < base.size(); ++i) {
    EXPECT_NEAR(f3[i] / base[i], 3.0, 1e-12) << i;
    EXPECT_NEAR(v2[i] / base[i], 4.0, 1e-12) << i;
  }
}

TEST(Timing, RatioApproachesCapacitanceRatio) {
  for (const double k : {10.0, 14.0}) {
    for (const double div : {100.0, 1000.0}) {
      const double n = std::exp2(k), cg = 1e-6 * kCH, cr = kCH / div;
      const double r = t_serial_2d(n, n, kCH, cg, 1.0) / t_parallel_2d(n, n, k, cg, cr, 1.0);
      EXPECT_NEAR(r, div, 0.10 * div) << "N=2^" << k;
    }
  }
  // Independent substitution of the proportionalities.
  const double n = 1024.0, cg = 1e-6 * kCH, cr = kCH / 100.0;
  const double ts = n * n * kCH + n * n * n * cg + n * n * n * cg / 2;
  const double tp = n * (n * cg + n * cr + 10 * n * cg) + n * n * cg / 2;
  EXPECT_NEAR(t_serial_2d(n, n, kCH, cg, 1e3), 1e3 * ts, 1e-12 * 1e3 * ts);
  EXPECT_NEAR(t_parallel_2d(n, n, 10, cg, cr, 1e3), 1e3 * tp, 1e-12 * 1e3 * tp);
}

TEST(Timing, SingleUnitDominatedByStorage) {
  const double cg = 1e-6 * kCH, cr = kCH / 100.0;
  EXPECT_NEAR(t_serial_2d(1, 1, kCH, cg, 1.0) / kCH, 1.0, 1e-5);
  EXPECT_NEAR(t_parallel_2d(1, 1, 0, cg, cr, 1.0) / cr, 1.0, 1e-3);
  EXPECT_NEAR(t_parallel_1d(1, 0, cg, cr, 2.0), 2.0 * (cg + cr), 1e-30);
}

TEST(Planning, SwitchingRate) {
  const double n = 16384.0;
  const double r1 = switching_rate(n, n, 1e3, 1);
  EXPECT_NEAR(r1, 268.435456e9, 1.0);
  EXPECT_EQ(switching_rate(n, n, 1e3, 16), r1 / 16.0);
  EXPECT_EQ(switching_rate(n, n, 0.0, 1), 0.0);
  EXPECT_THROW(switching_rate(n, n, 1e3, 0), std::invalid_argument);
}

TEST(Planning, CoolingBudget) {
  const auto ok = cooling_budget_check(11e-6, 1e-3);
  EXPECT_TRUE(ok.fits);
  EXPECT_NEAR(ok.margin, 0.989, 1e-3);
  EXPECT_FALSE(cooling_budget_check(61.5e-3, 1e-3).fits);
  EXPECT_TRUE(cooling_budget_check(0.0, 1e-3).fits);
}

TEST(Ledger, Serial1DMatchesClosedForm) {
  const auto sw = SwingAssignment::standard(1.0);
  for (std::size_t k = 1; k <= 10; ++k) {
    const auto t = binary(k);
    const double n = static_cast<double>(t.output_count());
    const auto l = ledger_serial_1d(t, kCg, sw);
    EXPECT_LE(rel(l.mux_energy(), 4 * n * (n - 1) * kU), 1e-12) << "K=" << k;
    EXPECT_LE(rel(l.switch_energy(), n * kU), 1e-12);
    EXPECT_EQ(l.transitions(Family::mux_gate), 2 * t.output_count() * k);
  }
}

TEST(Ledger, Parallel1DIsHalfClosedForm) {
  const auto sw = SwingAssignment::standard(1.0);
  for (std::size_t k = 1; k <= 10; ++k) {
    const auto t = binary(k);
    const double n = static_cast<double>(t.output_count());
    const auto l = ledger_parallel_1d(t, kCg, sw);
    const auto cf = p_parallel_1d(n, kCg, 1.0, 1.0);
    EXPECT_LE(rel(l.mux_energy(), 0.5 * k * n * kU), 1e-12) << "K=" << k;
    EXPECT_LE(rel(l.mux_energy(), 0.5 * cf.value("E_P-MUX1D")), 1e-12);
    EXPECT_LE(rel(l.switch_energy(), cf.value("E_P-SW1D")), 1e-12);
    EXPECT_EQ(l.transitions(Family::mux_gate), 2 * (t.output_count() - 1));
  }
}

TEST(Ledger, GeneralStackSweepEnergy) {
  std::mt19937_64 rng(gen::kSeed + 30);
  const auto sw = SwingAssignment::standard(0.8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = build_topology(gen::stack(rng, 4096), kCg);
    const auto l = ledger_parallel_1d(t, kCg, sw);
    EXPECT_LE(rel(l.mux_energy(), sweep_energy_oracle(t, 0.8)), 1e-12);
    EXPECT_EQ(l.transitions(Family::mux_gate), 2 * (t.output_count() - 1));
  }
  // Uniform base b: (b-1)/b·N·C·V² per level, not the log_b N substitution.
  const auto t4 = build_topology(BaseStack::uniform(4, 5), kCg);
  const double n = 1024.0;
  EXPECT_LE(rel(ledger_parallel_1d(t4, kCg, SwingAssignment::standard(1.0)).mux_energy(), 5 * 0.75 * n * kU), 1e-12);
}

TEST(Ledger, Parallel2DComponents) {
  const auto cols = binary(6), rows = binary(5);
  const double n = 64, m = 32, cr = 1e-15, dv = 0.05;
  const auto targets = column_gaussian_targets(32, 64, dv, 9);
  const auto l = ledger_parallel_2d(cols, rows, kCg, cr, targets, SwingAssignment::standard(1.0));
  const auto cf = p_parallel_2d(n, m, 6.0, kCg, cr, 1.0, dv, 1.0);
  EXPECT_LE(rel(l.switch_energy(), cf.value("E_P-SW2D")), 1e-12);
  EXPECT_LE(rel(2 * l.energy(Family::column_mux_gate), cf.value("E_P-col")), 1e-12);
  EXPECT_LE(rel(l.energy(Family::row_mux_gate), cf.value("E_P-row")), 1e-12);
  // Direct recharge oracle: cyclic differences down each column.
  double erc = 0.0;
  for (std::size_t r = 0; r < 32; ++r)
    for (std::size_t c = 0; c < 64; ++c) {
      const double d = targets[r * 64 + c] - targets[((r + 31) % 32) * 64 + c];
      erc += 0.5 * cr * d * d;
    }
  EXPECT_LE(rel(l.recharge_energy(), erc), 1e-12);
  EXPECT_DOUBLE_EQ(l.total_energy(), l.mux_energy() + l.switch_energy() + l.recharge_energy());
}

TEST(Ledger, RechargeEnergyMatchesClosedFormStatistically) {
  const auto cols = binary(8), rows = binary(8);
  const double cr = 1.4e-15, dv = 0.1;
  const auto targets = column_gaussian_targets(256, 256, dv, 4242);
  const auto l = ledger_parallel_2d(cols, rows, kCg, cr, targets, SwingAssignment::standard(1.0));
  EXPECT_LE(rel(l.recharge_energy(), 256.0 * 256.0 * cr * dv * dv), 0.05);
}

TEST(Ledger, Serial2DMatchesClosedForm) {
  const auto cols = binary(4), rows = binary(3);
  const auto l = ledger_serial_2d(cols, rows, kCg, SwingAssignment::standard(1.0));
  const auto cf = p_serial_2d(16, 8, kCg, 1.0, 1.0);
  EXPECT_LE(rel(l.mux_energy(), cf.value("E_S-MUX2D")), 1e-12);
  EXPECT_LE(rel(l.switch_energy(), cf.value("E_S-SW2D")), 1e-12);
}

TEST(Ledger, EmptyAndUnassigned) {
  const auto t = binary(3);
  const std::vector<OutputIndex> none;
  EXPECT_TRUE(simulate_energy(t, none, kCg, SwingAssignment::standard(1.0)).empty());
  auto s = generate_schedule(t);
  s.steps.resize(1);
  EXPECT_TRUE(simulate_energy(s, TransistorLinePlan{}, SwingAssignment{}).empty());
  EXPECT_THROW(ledger_parallel_1d(t, kCg, SwingAssignment{}), std::invalid_argument);
  const std::vector<OutputIndex> one{3};
  SwingAssignment partial{1.0, std::nullopt, 1.0};
  EXPECT_THROW(simulate_energy(t, one, kCg, partial), std::invalid_argument);
}

TEST(Export, CsvRoundTrip) {
  const std::vector<PowerBreakdown> b{p_serial_1d(64, kCg, 1, 1e3), p_parallel_2d(64, 64, 6, kCg, 1e-15, 1, 0.1, 1e3)};
  const auto t = parse_csv(breakdown_csv(b));
  std::size_t comps = 0;
  for (const auto& x : b) comps += x.components.size();
  ASSERT_EQ(t.rows.size(), comps);
  for (const auto& r : t.rows) {
    const auto& src = (r[0] == b[0].scheme ? b[0] : b[1]);
    EXPECT_EQ(csv_number(r[t.column("value")]), src.value(r[t.column("component")]));
  }

  const auto l = ledger_parallel_1d(binary(5), kCg, SwingAssignment::standard(1.0));
  const auto lt = parse_csv(ledger_csv(l));
  double mux = -1.0;
  for (const auto& r : lt.rows)
    if (r[0] == "total_mux") mux = csv_number(r[lt.column("joules")]);
  EXPECT_EQ(mux, l.mux_energy());
}
