#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "fmsm/errors.hpp"
#include "fmsm/record_io.hpp"
#include "fmsm/sim.hpp"

namespace {

using namespace fmsm;

class SimTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const MagnetModel magnet = calibrate_pm(MagnetModel{}, 0.3137);
    model_ = std::make_unique<SystemModel>(
        make_system(CoilGeometry{}, magnet, CircuitParams{}, BodyParams{}, 0.12));
  }
  static void TearDownTestSuite() { model_.reset(); }

  static SystemModel variant(const CircuitParams& circuit, const BodyParams& body) {
    SystemModel m = *model_;
    m.circuit = circuit;
    m.body = body;
    return m;
  }

  static std::unique_ptr<SystemModel> model_;
};

std::unique_ptr<SystemModel> SimTest::model_;

class ConstantCommand final : public Supervisor {
 public:
  explicit ConstantCommand(int command, PumpConfig pump = {}) : command_(command), pump_(pump) {}
  Action sample(const Observation& obs) override {
    return {pump_command_to_drive(command_, pump_, obs.t), command_, false};
  }

 private:
  int command_;
  PumpConfig pump_;
};

TEST_F(SimTest, DischargeFollowsExponential) {
  SimConfig cfg;
  cfg.t_end = 200.0;
  cfg.record_period = 1.0;
  Simulation sim(*model_, SupportTrajectory({{0.0, 0.1}}), cfg);
  sim.set_initial_linkage(model_->linkage(0.1, 10.0));
  IdleSupervisor idle;
  const auto rec = sim.run(idle);
  ASSERT_FALSE(rec.rows.empty());
  const double tau = model_->circuit.tau();
  for (const auto& r : rec.rows) {
    EXPECT_NEAR(r.i_coil, 10.0 * std::exp(-r.t / tau), 1e-8) << "t=" << r.t;
    EXPECT_EQ(r.contact_flag, 1);
  }
  EXPECT_DOUBLE_EQ(rec.rows.back().t, 200.0);
}

TEST_F(SimTest, BallisticDropWithoutDamping) {
  MagnetModel weak = model_->magnet;
  weak.sheet_current_per_loop = 1e-9;
  BodyParams body;
  body.damping = 0.0;
  SystemModel m = variant(CircuitParams{}, body);
  m.magnet = weak;
  m.table = CouplingTable::build(m.coil, weak, kMinimumGap, 0.06, 1e-3);
  SimConfig cfg;
  cfg.t_end = 0.2;
  cfg.record_period = 0.001;
  Simulation sim(m, SupportTrajectory({{0.0, 0.05}}), cfg);
  sim.set_initial_free(0.02, 0.0, 0.0);
  IdleSupervisor idle;
  const auto rec = sim.run(idle);
  const double t_hit = std::sqrt(2.0 * 0.03 / body.g);
  ASSERT_EQ(rec.events.size(), 1u);
  EXPECT_EQ(rec.events[0].kind, EventKind::Capture);
  EXPECT_NEAR(rec.events[0].t, t_hit, 2e-6);
  for (const auto& r : rec.rows) {
    if (r.t < t_hit - 1e-3) {
      EXPECT_NEAR(r.z, 0.02 + 0.5 * body.g * r.t * r.t, 1e-9);
    } else if (r.t > t_hit + 1e-3) {
      EXPECT_EQ(r.z, 0.05);
    }
  }
}

TEST_F(SimTest, DampedDropApproachesTerminalSpeed) {
  MagnetModel weak = model_->magnet;
  weak.sheet_current_per_loop = 1e-9;
  BodyParams body;
  body.damping = 2.0;
  SystemModel m = variant(CircuitParams{}, body);
  m.magnet = weak;
  m.table = CouplingTable::build(m.coil, weak, kMinimumGap, 0.06, 1e-3);
  SimConfig cfg;
  cfg.t_end = 0.05;
  Simulation sim(m, SupportTrajectory({{0.0, 0.059}}), cfg);
  sim.set_initial_free(0.02, 0.0, 0.0);
  IdleSupervisor idle;
  (void)sim.run(idle);
  const double rate = body.damping / body.mass;
  const double t = 0.05;
  const double v = body.g / rate * (1.0 - std::exp(-rate * t));
  const double z = 0.02 + body.g / rate * (t - (1.0 - std::exp(-rate * t)) / rate);
  EXPECT_NEAR(sim.state()[1], v, 1e-9);
  EXPECT_NEAR(sim.state()[0], z, 1e-10);
}

TEST_F(SimTest, LiftoffEventMatchesForceBalance) {
  CircuitParams lossless;
  lossless.R_loop = 0.0;
  const SystemModel m = variant(lossless, BodyParams{});
  const double lambda = m.linkage(0.013, 0.0);
  const double speed = 0.5e-3;
  // Bisection on the required normal force along the descending table.
  const auto normal = [&](double z) { return normal_force(m.em_force(z, lambda), speed, m.body); };
  double lo = 0.013, hi = 0.020;
  ASSERT_GT(normal(lo), 0.0);
  ASSERT_LT(normal(hi), 0.0);
  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + hi);
    (normal(mid) < 0.0 ? hi : lo) = mid;
  }
  const double t_expected = (hi - 0.013) / speed;

  SimConfig cfg;
  cfg.t_end = t_expected + 5.0;
  Simulation sim(m, SupportTrajectory::moves(0.013, {{0.045, 0.0}}), cfg);
  sim.set_initial_linkage(lambda);
  IdleSupervisor idle;
  const auto rec = sim.run(idle);
  ASSERT_FALSE(rec.events.empty());
  EXPECT_EQ(rec.events[0].kind, EventKind::Liftoff);
  EXPECT_NEAR(rec.events[0].t, t_expected, 1e-5);
  EXPECT_NEAR(rec.events[0].z, hi, 1e-8);
  for (std::size_t k = 1; k < rec.rows.size(); ++k) {
    EXPECT_GT(rec.rows[k].t, rec.rows[k - 1].t);
  }
}

TEST_F(SimTest, EnergyIsConservedWithoutLosses) {
  CircuitParams lossless;
  lossless.R_loop = 0.0;
  BodyParams body;
  body.damping = 0.0;
  const SystemModel m = variant(lossless, body);
  const double lambda = m.linkage(0.013, 0.0);
  SimConfig cfg;
  cfg.t_end = 5.0;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = {1e-12, 1e-11, 1e-14, 1e-14};
  Simulation sim(m, SupportTrajectory({{0.0, 0.045}}), cfg);
  sim.set_initial_free(0.016, 0.0, lambda);
  const auto energy = [&](const std::array<double, 4>& y) {
    const double i = m.current(y[0], y[2]);
    return 0.5 * body.mass * y[1] * y[1] - body.weight() * y[0] + 0.5 * lossless.L_coil * i * i;
  };
  double e0 = NAN, worst = 0.0, z_min = INFINITY, z_max = -INFINITY;
  IdleSupervisor idle;
  const auto rec = sim.run(idle, [&](const StepInfo& s) {
    if (std::isnan(e0)) e0 = energy(s.y0);
    worst = std::max(worst, std::abs(energy(s.y1) - e0));
    z_min = std::min(z_min, s.y1[0]);
    z_max = std::max(z_max, s.y1[0]);
  });
  EXPECT_TRUE(rec.events.empty());
  EXPECT_GT(z_max - z_min, 1e-3);  // it oscillates
  EXPECT_LT(worst, 1e-9);
}

TEST_F(SimTest, CommandedPumpingRaisesTransportCurrent) {
  SimConfig cfg;
  cfg.t_end = 2.0;
  Simulation sim(*model_, SupportTrajectory({{0.0, 0.1}}), cfg);
  sim.set_initial_linkage(model_->linkage(0.1, 0.0));
  ConstantCommand pump(+1);
  const auto rec = sim.run(pump);
  const double area = pump_command_to_drive(1, PumpConfig{}).pulse_area(model_->circuit);
  EXPECT_NEAR(sim.state()[3], 4.0 * area, 1e-12);
  EXPECT_GT(rec.rows.back().i_transport, 0.0);
  EXPECT_EQ(rec.rows.back().cmd, 1);
}

TEST_F(SimTest, StepUnderflowRaisesStiffnessError) {
  // A tolerance far below what the minimum step can deliver.
  SimConfig cfg;
  cfg.t_end = 1.0;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = {1e-16, 1e-16, 1e-18, 1e-18};
  cfg.min_step = 5e-3;
  Simulation sim(*model_, SupportTrajectory({{0.0, 0.045}}), cfg);
  sim.set_initial_free(0.016, 0.0, model_->linkage(0.013, 0.0));
  IdleSupervisor idle;
  try {
    (void)sim.run(idle);
    FAIL() << "expected StiffnessError";
  } catch (const StiffnessError& e) {
    EXPECT_LT(e.step(), cfg.min_step);
    EXPECT_GE(e.time(), 0.0);
  }
}

TEST_F(SimTest, StiffnessIsRestoringAtLevitation) {
  const double lambda = model_->linkage(0.013, 0.0);
  // Force rises with gap at fixed linkage near the levitation point.
  EXPECT_GT(model_->stiffness(0.0175, lambda), 0.0);
  EXPECT_LT(model_->em_force(0.016, lambda), model_->em_force(0.019, lambda));
}

TEST_F(SimTest, RunsAreDeterministic) {
  SimConfig cfg;
  cfg.t_end = 30.0;
  const auto once = [&] {
    Simulation sim(*model_, SupportTrajectory::moves(0.013, {{0.045, 0.0}}), cfg);
    sim.set_initial_linkage(model_->linkage(0.013, 0.0));
    IdleSupervisor idle;
    return to_csv(sim.run(idle));
  };
  EXPECT_EQ(once(), once());
}

TEST(SimConfig, Validation) {
  SimConfig cfg;
  cfg.rel_tol = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SimConfig{};
  cfg.abs_tol[2] = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SimConfig{};
  cfg.record_period = 1e-9;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
