#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fmsm/errors.hpp"
#include "fmsm/magnetics.hpp"

namespace fmsm {

/// Precomputed M_total(z) and dM/dz(z) on a uniform gap grid, interpolated by
/// cubic Hermite segments. The interpolant is C1, and slope() returns its exact
/// derivative, so a trajectory integrated against (value, slope) sees
/// d/dt value(z(t)) == slope(z) * z_dot exactly.
class CouplingTable {
 public:
  struct Sample {
    double mutual;    // [H]
    double gradient;  // [H/m]
  };

  CouplingTable() = default;

  CouplingTable(std::vector<double> z, std::vector<double> mutual, std::vector<double> gradient)
      : z_(std::move(z)), mutual_(std::move(mutual)), gradient_(std::move(gradient)) {
    if (z_.size() < 2 || mutual_.size() != z_.size() || gradient_.size() != z_.size()) {
      throw ConfigError("coupling table: inconsistent sample arrays");
    }
    for (std::size_t i = 1; i < z_.size(); ++i) {
      if (!(z_[i] > z_[i - 1])) {
        throw ConfigError("coupling table: z samples must be strictly increasing");
      }
    }
    step_ = (z_.back() - z_.front()) / static_cast<double>(z_.size() - 1);
  }

  static CouplingTable build(const CoilGeometry& coil, const MagnetModel& magnet,
                             double z_min = kMinimumGap, double z_max = 0.25,
                             double step = 0.5e-3) {
    if (!(z_max > z_min) || !(step > 0.0)) {
      throw ConfigError("coupling table: require z_max > z_min and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::llround((z_max - z_min) / step)) + 1;
    std::vector<double> z(count);
    std::vector<double> mutual(count);
    std::vector<double> gradient(count);
    for (std::size_t i = 0; i < count; ++i) {
      z[i] = z_min + static_cast<double>(i) * step;
      mutual[i] = pm_coil_coupling(coil, magnet, z[i]).mutual_total;
      gradient[i] = coupling_gradient(coil, magnet, z[i]).value;
    }
    return CouplingTable(std::move(z), std::move(mutual), std::move(gradient));
  }

  [[nodiscard]] const std::vector<double>& z_samples() const { return z_; }
  [[nodiscard]] const std::vector<double>& mutual_values() const { return mutual_; }
  [[nodiscard]] const std::vector<double>& gradient_values() const { return gradient_; }
  [[nodiscard]] double z_min() const { return z_.front(); }
  [[nodiscard]] double z_max() const { return z_.back(); }

  [[nodiscard]] Sample at(double z) const {
    if (!(z >= z_.front()) || !(z <= z_.back())) {
      throw ConfigError("coupling table: gap " + std::to_string(z) + " m outside [" +
                        std::to_string(z_.front()) + ", " + std::to_string(z_.back()) + "]");
    }
    auto i = static_cast<std::size_t>((z - z_.front()) / step_);
    i = std::min(i, z_.size() - 2);
    // Uniform grid index guess; correct for rounding at segment ends.
    while (i > 0 && z < z_[i]) --i;
    while (i + 2 < z_.size() && z > z_[i + 1]) ++i;
    const double h = z_[i + 1] - z_[i];
    const double s = (z - z_[i]) / h;
    const double y0 = mutual_[i];
    const double y1 = mutual_[i + 1];
    const double m0 = gradient_[i] * h;
    const double m1 = gradient_[i + 1] * h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double value = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 +
                         (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
    const double slope = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 +
                          (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * m1) /
                         h;
    return {value, slope};
  }

  [[nodiscard]] double value(double z) const { return at(z).mutual; }
  [[nodiscard]] double slope(double z) const { return at(z).gradient; }

 private:
  std::vector<double> z_;
  std::vector<double> mutual_;
  std::vector<double> gradient_;
  double step_ = 0.0;
};

}  // namespace fmsm
