#include <gtest/gtest.h>

#include <cmath>

#include "fmsm/coupling_table.hpp"
#include "fmsm/errors.hpp"

namespace {

using namespace fmsm;

class CouplingTableTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    magnet_ = calibrate_pm(MagnetModel{}, 0.3137);
    table_ = new CouplingTable(CouplingTable::build(CoilGeometry{}, magnet_, kMinimumGap, 0.08));
  }
  static void TearDownTestSuite() {
    delete table_;
    table_ = nullptr;
  }
  static MagnetModel magnet_;
  static CouplingTable* table_;
};

MagnetModel CouplingTableTest::magnet_;
CouplingTable* CouplingTableTest::table_ = nullptr;

TEST_F(CouplingTableTest, ReproducesNodes) {
  const auto& z = table_->z_samples();
  for (std::size_t k = 0; k < z.size(); k += 13) {
    EXPECT_DOUBLE_EQ(table_->value(z[k]), table_->mutual_values()[k]);
    EXPECT_NEAR(table_->slope(z[k]), table_->gradient_values()[k],
                1e-12 * std::abs(table_->gradient_values()[k]));
  }
}

TEST_F(CouplingTableTest, MidpointInterpolationError) {
  const CoilGeometry coil;
  const auto& z = table_->z_samples();
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < z.size(); k += 7) {
    const double mid = 0.5 * (z[k] + z[k + 1]);
    const double exact = pm_coil_coupling(coil, magnet_, mid).mutual_total;
    worst = std::max(worst, std::abs(table_->value(mid) / exact - 1.0));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST_F(CouplingTableTest, SlopeIsDerivativeOfValue) {
  for (double z : {0.0052, 0.0137, 0.0291, 0.0566}) {
    const double h = 1e-7;
    const double fd = (table_->value(z + h) - table_->value(z - h)) / (2 * h);
    EXPECT_NEAR(table_->slope(z) / fd, 1.0, 1e-6) << "z=" << z;
  }
}

TEST_F(CouplingTableTest, RangeIsEnforced) {
  EXPECT_DOUBLE_EQ(table_->z_min(), kMinimumGap);
  EXPECT_NEAR(table_->z_max(), 0.08, 1e-12);
  EXPECT_THROW((void)table_->at(0.5e-3), ConfigError);
  EXPECT_THROW((void)table_->at(0.0801), ConfigError);
  EXPECT_THROW((void)table_->at(NAN), ConfigError);
}

TEST(CouplingTable, ConstructorValidation) {
  EXPECT_THROW(CouplingTable({0.0}, {1.0}, {1.0}), ConfigError);
  EXPECT_THROW(CouplingTable({0.0, 1.0}, {1.0}, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(CouplingTable({1.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}), ConfigError);
  EXPECT_THROW((void)CouplingTable::build(CoilGeometry{}, MagnetModel{}, 0.01, 0.005), ConfigError);
}

TEST(CouplingTable, CubicDataIsExact) {
  // Hermite segments reproduce a cubic given exact values and slopes.
  std::vector<double> z, v, s;
  for (int k = 0; k <= 4; ++k) {
    const double x = 0.25 * k;
    z.push_back(x);
    v.push_back(x * x * x - x);
    s.push_back(3 * x * x - 1);
  }
  const CouplingTable t(z, v, s);
  for (double x : {0.1, 0.33, 0.6, 0.99}) {
    EXPECT_NEAR(t.value(x), x * x * x - x, 1e-14);
    EXPECT_NEAR(t.slope(x), 3 * x * x - 1, 1e-13);
  }
}

}  // namespace
