#pragma once

// Reference computations that share no code with the production magnetics:
// adaptive Gauss-Kronrod quadrature of the elliptic integrals and of the
// Neumann double line integral for coaxial loops.

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "fmsm/constants.hpp"
#include "fmsm/magnetics.hpp"

namespace fmsm::oracle {

/// Adaptive 7/15-point Gauss-Kronrod quadrature on [a, b] with a global
/// error budget max(abs_tol, rel_tol |I|).
template <class F>
[[nodiscard]] double integrate(const F& f, double a, double b, double rel_tol = 1e-13,
                               double abs_tol = 0.0, int max_intervals = 20000) {
  static constexpr std::array<double, 8> xk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  struct Segment {
    double a, b, value, error;
  };
  const auto rule = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const double fc = f(c);
    double kronrod = wk[7] * fc;
    double gauss = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
      const double dx = h * xk[j];
      const double sum = f(c - dx) + f(c + dx);
      kronrod += wk[j] * sum;
      if (j % 2 == 1) gauss += wg[j / 2] * sum;
    }
    return Segment{lo, hi, kronrod * h, std::abs((kronrod - gauss) * h)};
  };

  std::vector<Segment> segments{rule(a, b)};
  while (true) {
    double total = 0.0, error = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      total += segments[i].value;
      error += segments[i].error;
      if (segments[i].error > segments[worst].error) worst = i;
    }
    if (error <= std::max(abs_tol, rel_tol * std::abs(total)) ||
        static_cast<int>(segments.size()) >= max_intervals) {
      return total;
    }
    const Segment s = segments[worst];
    const double mid = 0.5 * (s.a + s.b);
    segments[worst] = rule(s.a, mid);
    segments.push_back(rule(mid, s.b));
  }
}

/// K(m) and E(m) by direct quadrature of their defining integrals.
[[nodiscard]] inline std::pair<double, double> elliptic_KE(double m) {
  const double K = integrate(
      [m](double t) { return 1.0 / std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); }, 0.0,
      0.5 * kPi, 1e-14);
  const double E = integrate(
      [m](double t) { return std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); }, 0.0, 0.5 * kPi,
      1e-14);
  return {K, E};
}

/// Neumann formula for coaxial loops:
/// M = mu0 a b / 2 * int_0^{2 pi} cos(phi) / R(phi) dphi, with the
/// integrand even about pi.
[[nodiscard]] inline double neumann_mutual(double a, double b, double d) {
  const double s = a * a + b * b + d * d;
  const auto integrand = [&](double phi) {
    return std::cos(phi) / std::sqrt(s - 2.0 * a * b * std::cos(phi));
  };
  return kMu0 * a * b * integrate(integrand, 0.0, kPi, 1e-14);
}

/// d M / d d from the differentiated Neumann integrand.
[[nodiscard]] inline double neumann_mutual_derivative(double a, double b, double d) {
  const double s = a * a + b * b + d * d;
  const auto integrand = [&](double phi) {
    const double r2 = s - 2.0 * a * b * std::cos(phi);
    return -d * std::cos(phi) / (r2 * std::sqrt(r2));
  };
  return kMu0 * a * b * integrate(integrand, 0.0, kPi, 1e-13);
}

/// Total coil/magnet mutual inductance at gap z by the Neumann integral.
[[nodiscard]] inline double coupling_mutual_neumann(const CoilGeometry& coil, const MagnetModel& magnet,
                                            double gap) {
  double total = 0.0;
  for (const auto& turn : coil.filaments()) {
    for (const auto& loop : magnet.filaments(gap)) {
      total += neumann_mutual(turn.radius, loop.radius, turn.axial_position - loop.axial_position);
    }
  }
  return total;
}

/// d M_total / d gap by the differentiated Neumann integrand. The magnet
/// loops move down (away from the coil) as the gap grows.
[[nodiscard]] inline double coupling_gradient_neumann(const CoilGeometry& coil, const MagnetModel& magnet,
                                              double gap) {
  double total = 0.0;
  for (const auto& turn : coil.filaments()) {
    for (const auto& loop : magnet.filaments(gap)) {
      total += neumann_mutual_derivative(turn.radius, loop.radius,
                                         turn.axial_position - loop.axial_position);
    }
  }
  return total;
}

/// Upward force on the magnet, -dU/dx along the upward axis x = -gap, with
/// U = -i I M_total the interaction energy at fixed currents.
[[nodiscard]] inline double axial_force_neumann(double coil_current, const CoilGeometry& coil,
                                            const MagnetModel& magnet, double gap) {
  return -coil_current * magnet.sheet_current_per_loop * coupling_gradient_neumann(coil, magnet, gap);
}

/// Top-face field of a continuous, uniformly magnetized cylinder with
/// remanence br: (br / 2) h / sqrt(h^2 + a^2).
[[nodiscard]] inline double solid_cylinder_face_field(double br, double radius, double height) {
  return 0.5 * br * height / std::sqrt(height * height + radius * radius);
}

}  // namespace fmsm::oracle
