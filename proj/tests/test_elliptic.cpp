#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fmsm/elliptic.hpp"
#include "fmsm/errors.hpp"
#include "fmsm/oracles.hpp"

namespace {

using fmsm::elliptic_kernel;
using fmsm::elliptic_KE;
using fmsm::kPi;

TEST(Elliptic, ZeroParameterGivesQuarterCircle) {
  const auto r = elliptic_KE(0.0);
  EXPECT_DOUBLE_EQ(r.K, kPi / 2);
  EXPECT_DOUBLE_EQ(r.E, kPi / 2);
  EXPECT_EQ(elliptic_kernel(0.0).D, 0.0);
}

TEST(Elliptic, TabulatedHalfParameter) {
  const auto r = elliptic_KE(0.5);
  EXPECT_NEAR(r.K, 1.854074677301372, 1e-14);
  EXPECT_NEAR(r.E, 1.350643881047675, 1e-14);
}

TEST(Elliptic, MatchesQuadratureAcrossRange) {
  for (double m : {1e-8, 1e-3, 0.1, 0.3, 0.6, 0.9, 0.99, 0.999, 0.999999}) {
    const auto [K, E] = fmsm::oracle::elliptic_KE(m);
    const auto r = elliptic_KE(m);
    EXPECT_NEAR(r.K / K, 1.0, 1e-12) << "m=" << m;
    EXPECT_NEAR(r.E / E, 1.0, 1e-12) << "m=" << m;
  }
}

TEST(Elliptic, LegendreRelation) {
  // E K' + E' K - K K' = pi / 2 with primes at the complementary parameter.
  for (double m : {0.05, 0.2, 0.5, 0.77, 0.95}) {
    const auto a = elliptic_KE(m);
    const auto b = elliptic_KE(1.0 - m);
    EXPECT_NEAR(a.E * b.K + b.E * a.K - a.K * b.K, kPi / 2, 1e-14) << "m=" << m;
  }
}

TEST(Elliptic, KernelIsAccurateForTinyParameter) {
  // (1 - m/2) K - E = pi m^2 / 32 (1 + 3m/4 + O(m^2)).
  for (double m : {1e-3, 1e-5, 1e-7}) {
    const double series = kPi * m * m / 32.0 * (1.0 + 3.0 * m / 4.0);
    EXPECT_NEAR(elliptic_kernel(m).D / series, 1.0, 1e-5) << "m=" << m;
  }
}

TEST(Elliptic, KernelAgreesWithDirectFormulaAwayFromZero) {
  for (double m : {0.3, 0.6, 0.9}) {
    const auto k = elliptic_kernel(m);
    EXPECT_NEAR(k.D, (1.0 - 0.5 * m) * k.K - k.E, 1e-14);
  }
}

TEST(Elliptic, KGrowsLogarithmicallyNearOne) {
  // K ~ ln(4 / sqrt(1 - m)) as m -> 1.
  const double m = 1.0 - 1e-12;
  EXPECT_NEAR(elliptic_KE(m).K, std::log(4.0 / std::sqrt(1.0 - m)), 1e-9);
}

TEST(Elliptic, RejectsParametersOutsideDomain) {
  EXPECT_THROW((void)elliptic_KE(-1e-12), fmsm::DomainError);
  EXPECT_THROW((void)elliptic_KE(1.0), fmsm::DomainError);
  EXPECT_THROW((void)elliptic_KE(2.0), fmsm::DomainError);
  EXPECT_THROW((void)elliptic_KE(std::numeric_limits<double>::quiet_NaN()), fmsm::DomainError);
}

}  // namespace
