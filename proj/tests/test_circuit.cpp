#include <gtest/gtest.h>

#include <cmath>

#include "fmsm/circuit.hpp"
#include "fmsm/errors.hpp"

namespace {

using namespace fmsm;

TEST(Bridge, UnitPointIsExact) {
  const CircuitParams p;
  EXPECT_EQ(bridge_emf(p.I_c_bridge, p).voltage, p.E_c * p.bridge_length);
  EXPECT_FALSE(bridge_emf(p.I_c_bridge, p).clamped);
  EXPECT_EQ(bridge_emf(0.0, p).voltage, 0.0);
}

TEST(Bridge, PowerLawAndOddness) {
  const CircuitParams p;
  const double v = bridge_emf(1.2 * p.I_c_bridge, p).voltage;
  EXPECT_NEAR(v / (p.E_c * p.bridge_length), std::pow(1.2, 25), 1e-9);
  EXPECT_NEAR(std::pow(1.2, 25), 95.396, 1e-3);
  EXPECT_DOUBLE_EQ(bridge_emf(-1.2 * p.I_c_bridge, p).voltage, -v);
  EXPECT_LT(bridge_emf(0.5 * p.I_c_bridge, p).voltage, 1e-9 * v);
}

TEST(Bridge, ClampBeyondTwiceCritical) {
  const CircuitParams p;
  const auto a = bridge_emf(2.0 * p.I_c_bridge, p);
  const auto b = bridge_emf(3.0 * p.I_c_bridge, p);
  EXPECT_FALSE(a.clamped);
  EXPECT_TRUE(b.clamped);
  EXPECT_EQ(a.voltage, b.voltage);
}

TEST(Circuit, Validation) {
  CircuitParams p;
  p.n_value = 4.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = CircuitParams{};
  p.R_loop = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = CircuitParams{};
  p.R_loop = 0.0;
  EXPECT_NO_THROW(p.validate());
  EXPECT_TRUE(std::isinf(p.tau()));
  EXPECT_NEAR(CircuitParams{}.tau(), 860.0, 1e-9);
}

TEST(Pump, DriveEdgesAndCurrent) {
  PumpConfig cfg;
  const PumpDrive d = pump_command_to_drive(+1, cfg, 2.0);
  EXPECT_TRUE(d.active());
  EXPECT_EQ(d.next_edge(1.0), 2.0);
  EXPECT_NEAR(d.next_edge(2.0), 2.1, 1e-15);
  EXPECT_NEAR(d.next_edge(2.1), 2.5, 1e-15);
  EXPECT_NEAR(d.next_edge(2.3), 2.5, 1e-15);
  EXPECT_TRUE(d.pulsing(2.05));
  EXPECT_FALSE(d.pulsing(2.2));
  EXPECT_FALSE(d.pulsing(1.9));
  EXPECT_DOUBLE_EQ(d.bridge_current(2.55, 413.0), 1.2 * 413.0);
  EXPECT_EQ(pump_command_to_drive(-1, cfg).polarity, -1);
  const PumpDrive off = pump_command_to_drive(0, cfg);
  EXPECT_FALSE(off.active());
  EXPECT_TRUE(std::isinf(off.next_edge(0.0)));
  EXPECT_EQ(off.bridge_current(0.0, 413.0), 0.0);
}

TEST(Pump, PulseArea) {
  const CircuitParams p;
  const PumpDrive d = pump_command_to_drive(1, PumpConfig{});
  EXPECT_NEAR(d.pulse_area(p), 1e-5 * std::pow(1.2, 25) * 0.1, 1e-15);
}

TEST(Pump, ConfigValidation) {
  PumpConfig c;
  c.pulse_width = 0.6;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PumpConfig{};
  c.null_tolerance = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Pump, NullScreeningScalesWithError) {
  const PumpConfig cfg;
  const auto big = null_screening({-5.0, 0.0, 0.0}, 0.0, cfg);
  EXPECT_EQ(big.polarity, +1);
  EXPECT_EQ(big.mode, PumpMode::Null);
  EXPECT_DOUBLE_EQ(big.pulse_width, cfg.pulse_width);
  const auto small = null_screening({0.5, 0.0, 0.0}, 0.0, cfg);
  EXPECT_EQ(small.polarity, -1);
  EXPECT_DOUBLE_EQ(small.pulse_width, 0.5 * cfg.pulse_width);
  EXPECT_FALSE(null_screening({0.01, 0.0, 0.0}, 0.0, cfg).active());
}

TEST(Circuit, LinkageRoundTrip) {
  const CircuitParams p;
  const CouplingSample c{2.5e-5, -1.2e-3, 900.0};
  for (double i : {-12.0, 0.0, 3.3}) {
    EXPECT_NEAR(current_from_linkage(flux_linkage(i, c, p), c, p), i, 1e-12);
  }
}

TEST(Circuit, RateBalance) {
  const CircuitParams p;
  const CouplingSample c{2.5e-5, -1.2e-3, 900.0};
  const CircuitState s{4.0, 0.0, 0.0};
  const double di = coil_rhs(s, 0.002, PumpDrive{}, c, p);
  EXPECT_NEAR(di, (-900.0 * -1.2e-3 * 0.002 - p.R_loop * 4.0) / p.L_coil, 1e-12);
  const PumpDrive d = pump_command_to_drive(1, PumpConfig{});
  const double pumped = coil_rhs(s, 0.0, d, c, p);
  EXPECT_NEAR(pumped, (-p.R_loop * 4.0 + 1e-5 * std::pow(1.2, 25)) / p.L_coil, 1e-9);
  EXPECT_NEAR(transport_current({0.0, 2.7e-3, 0.0}, p), 2.0, 1e-12);
}

}  // namespace
