#include <gtest/gtest.h>

#include <cmath>

#include "fmsm/controller.hpp"
#include "fmsm/errors.hpp"

namespace {

using namespace fmsm;

TEST(HeightHold, BandsAndLatching) {
  ControllerConfig cfg;  // 0.5 mm band, 0.25 mm inner band
  const double h0 = 0.0185;
  EXPECT_EQ(height_hold_step(h0 + 0.6e-3, h0, cfg), +1);
  EXPECT_EQ(height_hold_step(h0 - 0.6e-3, h0, cfg), -1);
  EXPECT_EQ(height_hold_step(h0 + 0.4e-3, h0, cfg), 0);
  EXPECT_EQ(height_hold_step(h0 + 0.4e-3, h0, cfg, +1), +1);
  EXPECT_EQ(height_hold_step(h0 + 0.2e-3, h0, cfg, +1), 0);
  EXPECT_EQ(height_hold_step(h0 - 0.4e-3, h0, cfg, -1), -1);
  EXPECT_EQ(height_hold_step(h0 - 0.2e-3, h0, cfg, -1), 0);
  EXPECT_EQ(height_hold_step(h0 - 0.4e-3, h0, cfg, +1), 0);
}

TEST(HeightHold, ConfigValidation) {
  ControllerConfig cfg;
  cfg.inner_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ControllerConfig{};
  cfg.filter_time = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ControllerConfig{};
  cfg.delta_h = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(GapFilter, ExactFirstOrderResponse) {
  GapFilter f(0.5, 0.05);
  EXPECT_TRUE(std::isnan(f.value()));
  EXPECT_EQ(f.update(0.02), 0.02);
  double v = 0.0;
  for (int k = 0; k < 10; ++k) v = f.update(0.03);
  // After 0.5 s (one time constant) the step response reaches 1 - 1/e.
  EXPECT_NEAR((v - 0.02) / 0.01, 1.0 - std::exp(-1.0), 1e-12);
  f.reset();
  EXPECT_EQ(f.update(0.04), 0.04);
  GapFilter raw(0.0, 0.05);
  raw.update(0.01);
  EXPECT_EQ(raw.update(0.02), 0.02);
}

SetpointProgram two_step() { return {{{0.025, 10.0}, {0.021, 5.0}}}; }

TEST(Program, CaptureThenHoldThenAdvance) {
  ControllerConfig cfg;
  cfg.capture_dwell = 1.0;
  ProgramRunner run(two_step(), cfg);
  EXPECT_EQ(run.target(), 0.025);
  for (double t = 0.0; t <= 3.0; t += 0.5) run.observe(t, 0.030, true);
  EXPECT_TRUE(std::isnan(run.log()[0].captured));
  for (double t = 3.5; t <= 4.5; t += 0.5) run.observe(t, 0.0252, true);
  EXPECT_DOUBLE_EQ(run.log()[0].captured, 3.5);
  for (double t = 5.0; t < 13.5; t += 0.5) run.observe(t, 0.0252, true);
  EXPECT_TRUE(std::isnan(run.log()[0].completed));
  run.observe(13.5, 0.0252, true);
  EXPECT_DOUBLE_EQ(run.log()[0].completed, 13.5);
  EXPECT_EQ(run.target(), 0.021);
  ASSERT_EQ(run.log().size(), 2u);
  EXPECT_DOUBLE_EQ(run.log()[1].issued, 13.5);
  for (double t = 14.0; t <= 21.0; t += 0.5) run.observe(t, 0.021, true);
  EXPECT_TRUE(run.finished());
  EXPECT_EQ(run.timeline().size(), 2u);
}

TEST(Program, SupportedSamplesDoNotCapture) {
  ProgramRunner run(two_step(), ControllerConfig{});
  for (double t = 0.0; t <= 5.0; t += 0.5) run.observe(t, 0.025, false);
  EXPECT_TRUE(std::isnan(run.log()[0].captured));
}

TEST(Program, LeavingBandRestartsDwell) {
  ProgramRunner run(two_step(), ControllerConfig{});
  run.observe(0.0, 0.025, true);
  run.observe(0.5, 0.025, true);
  run.observe(0.9, 0.030, true);
  run.observe(1.0, 0.025, true);
  run.observe(1.5, 0.025, true);
  EXPECT_TRUE(std::isnan(run.log()[0].captured));
  run.observe(2.0, 0.025, true);
  EXPECT_DOUBLE_EQ(run.log()[0].captured, 1.0);
}

TEST(Program, TimeoutRaisesUnreachable) {
  ControllerConfig cfg;
  cfg.timeout = 10.0;
  ProgramRunner run({{{0.040, 10.0}}}, cfg);
  try {
    for (double t = 0.0; t < 20.0; t += 0.5) run.observe(t, 0.02, true);
    FAIL() << "expected UnreachableSetpoint";
  } catch (const UnreachableSetpoint& e) {
    EXPECT_EQ(e.target_gap(), 0.040);
    EXPECT_GT(e.time(), 10.0);
  }
}

TEST(Program, Validation) {
  EXPECT_THROW(ProgramRunner(SetpointProgram{}, ControllerConfig{}), ConfigError);
  EXPECT_THROW(ProgramRunner({{{0.02, 0.0}}}, ControllerConfig{}), ConfigError);
  EXPECT_DOUBLE_EQ((SetpointProgram{{{0.02, 3.0}, {0.03, 4.0}}}).total_hold(), 7.0);
}

TEST(Zfc, PhasesAndNulling) {
  const ZfcPlan plan{172.0, 322.0};
  EXPECT_EQ(zfc_phase(0.0, plan), ZfcPhase::Approach);
  EXPECT_EQ(zfc_phase(172.0, plan), ZfcPhase::Hold);
  EXPECT_EQ(zfc_phase(322.0, plan), ZfcPhase::Retract);
  const PumpConfig pump;
  const CircuitState screened{-15.0, 0.0, 200.0};
  EXPECT_TRUE(zfc_supervisor(ZfcPhase::Hold, screened, ZfcVariant::Null, pump).active());
  EXPECT_EQ(zfc_supervisor(ZfcPhase::Hold, screened, ZfcVariant::Null, pump).polarity, +1);
  EXPECT_FALSE(zfc_supervisor(ZfcPhase::Approach, screened, ZfcVariant::Null, pump).active());
  EXPECT_FALSE(zfc_supervisor(ZfcPhase::Retract, screened, ZfcVariant::Null, pump).active());
  EXPECT_FALSE(zfc_supervisor(ZfcPhase::Hold, screened, ZfcVariant::NoModulation, pump).active());
  EXPECT_FALSE(zfc_supervisor(ZfcPhase::Hold, screened, ZfcVariant::PrePump, pump).active());
}

}  // namespace
