#include <gtest/gtest.h>

#include <cmath>

#include "fmsm/integrator.hpp"

namespace {

using fmsm::DormandPrince54;

using Stepper1 = DormandPrince54<1>;
using Stepper2 = DormandPrince54<2>;

const auto decay = [](double, const Stepper1::State& y, Stepper1::State& dy) { dy[0] = -y[0]; };
const auto oscillator = [](double, const Stepper2::State& y, Stepper2::State& dy) {
  dy[0] = y[1];
  dy[1] = -y[0];
};

double step_error(double h) {
  Stepper1 s({1e-8, {1e-12}});
  return std::abs(s.attempt(decay, 0.0, {1.0}, h).y[0] - std::exp(-h));
}

TEST(DormandPrince, LocalErrorIsSixthOrderInStep) {
  const double ratio = step_error(0.1) / step_error(0.05);
  EXPECT_NEAR(std::log2(ratio), 6.0, 0.3);
}

TEST(DormandPrince, AdaptiveExponentialDecay) {
  Stepper1 s({1e-10, {1e-14}});
  Stepper1::State y{1.0};
  double t = 0.0, h = 1e-3;
  while (t < 5.0) {
    h = std::min(h, 5.0 - t);
    const auto trial = s.attempt(decay, t, y, h);
    if (trial.error_norm <= 1.0) {
      t += h;
      y = trial.y;
    }
    h = Stepper1::propose(h, trial.error_norm, trial.error_norm <= 1.0);
  }
  EXPECT_NEAR(y[0], std::exp(-5.0), 1e-11);
}

TEST(DormandPrince, OscillatorConservesAmplitude) {
  Stepper2 s({1e-10, {1e-12, 1e-12}});
  Stepper2::State y{1.0, 0.0};
  double t = 0.0, h = 1e-2;
  const double T = 20.0 * M_PI;
  while (t < T) {
    h = std::min(h, T - t);
    const auto trial = s.attempt(oscillator, t, y, h);
    if (trial.error_norm <= 1.0) {
      t += h;
      y = trial.y;
    }
    h = Stepper2::propose(h, trial.error_norm, trial.error_norm <= 1.0);
  }
  EXPECT_NEAR(y[0], 1.0, 1e-8);
  EXPECT_NEAR(y[1], 0.0, 1e-8);
}

TEST(DormandPrince, DenseOutputEndpointsAndAccuracy) {
  Stepper1 s({1e-8, {1e-12}});
  const auto trial = s.attempt(decay, 1.0, {2.0}, 0.2);
  EXPECT_DOUBLE_EQ(s.interpolate(0.0)[0], 2.0);
  EXPECT_DOUBLE_EQ(s.interpolate(1.0)[0], trial.y[0]);
  for (double theta : {0.25, 0.5, 0.8}) {
    EXPECT_NEAR(s.interpolate(theta)[0], 2.0 * std::exp(-0.2 * theta), 5e-7);
  }
  EXPECT_EQ(s.last_start(), 1.0);
  EXPECT_EQ(s.last_step(), 0.2);
}

TEST(DormandPrince, ProposalClamps) {
  EXPECT_DOUBLE_EQ(Stepper1::propose(1.0, 0.0, true), 5.0);
  EXPECT_DOUBLE_EQ(Stepper1::propose(1.0, 1e-12, true), 5.0);
  EXPECT_DOUBLE_EQ(Stepper1::propose(1.0, 1e12, false), 0.2);
  EXPECT_LE(Stepper1::propose(1.0, 0.5, false), 1.0);
  EXPECT_NEAR(Stepper1::propose(1.0, 1.0, true), 0.9, 1e-15);
}

}  // namespace
