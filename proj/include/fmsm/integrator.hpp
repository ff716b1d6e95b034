#pragma once

// Dormand-Prince 5(4) embedded pair with the Hairer continuous extension.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace fmsm {

template <std::size_t N>
class DormandPrince54 {
 public:
  using State = std::array<double, N>;

  struct Tolerances {
    double rel = 1e-7;
    State abs{};
  };

  struct Trial {
    State y;
    double error_norm;
  };

  explicit DormandPrince54(Tolerances tol) : tol_(tol) {}

  [[nodiscard]] const Tolerances& tolerances() const { return tol_; }

  /// One trial step of size h from (t, y). The stages are retained for
  /// interpolate() until the next call.
  template <class Rhs>
  Trial attempt(const Rhs& rhs, double t, const State& y, double h) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    t0_ = t;
    h_ = h;
    y0_ = y;
    State tmp;
    rhs(t, y, k1_);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1_[i];
    rhs(t + c2 * h, tmp, k2_);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    rhs(t + c3 * h, tmp, k3_);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    rhs(t + c4 * h, tmp, k4_);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    rhs(t + c5 * h, tmp, k5_);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                           a65 * k5_[i]);
    rhs(t + h, tmp, k6_);
    for (std::size_t i = 0; i < N; ++i)
      y1_[i] = y[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
    rhs(t + h, y1_, k7_);

    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double err = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                              e6 * k6_[i] + e7 * k7_[i]);
      const double scale = tol_.abs[i] + tol_.rel * std::max(std::abs(y[i]), std::abs(y1_[i]));
      const double r = err / scale;
      sum += r * r;
    }
    return {y1_, std::sqrt(sum / static_cast<double>(N))};
  }

  /// Fourth-order dense output of the last attempt at t0 + theta h.
  [[nodiscard]] State interpolate(double theta) const {
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
    const double theta1 = 1.0 - theta;
    State out;
    for (std::size_t i = 0; i < N; ++i) {
      const double r2 = y1_[i] - y0_[i];
      const double r3 = h_ * k1_[i] - r2;
      const double r4 = r2 - h_ * k7_[i] - r3;
      const double r5 =
          h_ * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
      out[i] = y0_[i] + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
    }
    return out;
  }

  [[nodiscard]] double last_start() const { return t0_; }
  [[nodiscard]] double last_step() const { return h_; }

  /// Step-size proposal after a trial with the given error norm.
  [[nodiscard]] static double propose(double h, double error_norm, bool accepted) {
    double factor = error_norm > 0.0 ? 0.9 * std::pow(error_norm, -0.2) : 5.0;
    factor = std::clamp(factor, 0.2, accepted ? 5.0 : 1.0);
    return h * factor;
  }

 private:
  Tolerances tol_;
  double t0_ = 0.0;
  double h_ = 0.0;
  State y0_{}, y1_{}, k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
};

}  // namespace fmsm
