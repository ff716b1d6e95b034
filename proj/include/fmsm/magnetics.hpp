#pragma once

// Coaxial filament-loop electromagnetics for the coil / permanent-magnet pair.
//
// Axial coordinate x points upward with the coil bottom face at x = 0. The
// separation z used throughout is the gap from the magnet's top face up to the
// coil bottom face, so the magnet top face sits at x = -z.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fmsm/constants.hpp"
#include "fmsm/elliptic.hpp"
#include "fmsm/errors.hpp"

namespace fmsm {

struct FilamentLoop {
  double radius = 0.0;          // [m]
  double axial_position = 0.0;  // [m]
  double current = 0.0;         // [A]
};

inline void validate(const FilamentLoop& loop) {
  if (!std::isfinite(loop.radius) || !std::isfinite(loop.axial_position) ||
      !std::isfinite(loop.current)) {
    throw ConfigError("filament loop: non-finite field");
  }
  if (!(loop.radius > 0.0)) {
    throw ConfigError("filament loop: radius must be positive");
  }
}

/// Smallest admissible gap [m]; the filament model is not used closer.
inline constexpr double kMinimumGap = 1.0e-3;

/// Double-pancake coil wound from tape; one filament per turn.
struct CoilGeometry {
  double inner_radius = 0.030;
  double outer_radius = 0.065290 / 2.0;
  int turns_total = 120;
  int pancakes = 2;
  double tape_width = 0.004;
  double pancake_gap = 0.5e-3;
  /// Cross-section surrogate for the self term and near-neighbour pairs,
  /// tuned so the default coil_self_inductance lands on 1.35 mH.
  double effective_strand_radius = 1.78e-3;

  void validate() const {
    if (!(inner_radius > 0.0) || !(outer_radius > inner_radius)) {
      throw ConfigError("coil: require 0 < inner_radius < outer_radius");
    }
    if (turns_total <= 0 || pancakes <= 0 || turns_total % pancakes != 0) {
      throw ConfigError("coil: turns_total must be a positive multiple of pancakes");
    }
    if (!(tape_width > 0.0) || !(pancake_gap >= 0.0)) {
      throw ConfigError("coil: tape_width must be positive and pancake_gap non-negative");
    }
    if (!(effective_strand_radius > 0.0) || !(effective_strand_radius < inner_radius)) {
      throw ConfigError("coil: effective_strand_radius must lie in (0, inner_radius)");
    }
  }

  [[nodiscard]] int turns_per_pancake() const { return turns_total / pancakes; }

  /// Axial extent of the winding pack.
  [[nodiscard]] double height() const {
    return pancakes * tape_width + (pancakes - 1) * pancake_gap;
  }

  /// Turn filaments at the middle of each radial slot and tape width, ordered
  /// pancake by pancake with radii increasing inside each pancake.
  [[nodiscard]] std::vector<FilamentLoop> filaments(double current = 0.0) const {
    validate();
    const int per = turns_per_pancake();
    const double pitch = (outer_radius - inner_radius) / per;
    std::vector<FilamentLoop> loops;
    loops.reserve(static_cast<std::size_t>(turns_total));
    for (int p = 0; p < pancakes; ++p) {
      const double x = p * (tape_width + pancake_gap) + 0.5 * tape_width;
      for (int j = 0; j < per; ++j) {
        loops.push_back({inner_radius + (j + 0.5) * pitch, x, current});
      }
    }
    return loops;
  }
};

/// Cylindrical magnet represented by its equivalent surface current sheet.
struct MagnetModel {
  double radius = 0.025;
  double height = 0.030;
  int sheet_loops = 30;
  double sheet_current_per_loop = 0.0;  // set by calibrate_pm
  double mass = 0.450;

  void validate() const {
    if (!(radius > 0.0) || !(height > 0.0)) {
      throw ConfigError("magnet: radius and height must be positive");
    }
    if (sheet_loops < 2) {
      throw ConfigError("magnet: sheet_loops must be at least 2");
    }
    if (!std::isfinite(sheet_current_per_loop) || !(mass > 0.0)) {
      throw ConfigError("magnet: invalid sheet current or mass");
    }
  }

  [[nodiscard]] double ampere_turns() const { return sheet_loops * sheet_current_per_loop; }

  /// Depth of sheet loop k below the top face (midpoints of equal slices).
  [[nodiscard]] double loop_depth(int k) const { return (k + 0.5) * height / sheet_loops; }

  /// Sheet loops with the top face at gap z below the coil bottom face.
  [[nodiscard]] std::vector<FilamentLoop> filaments(double gap) const {
    validate();
    std::vector<FilamentLoop> loops;
    loops.reserve(static_cast<std::size_t>(sheet_loops));
    for (int k = 0; k < sheet_loops; ++k) {
      loops.push_back({radius, -gap - loop_depth(k), sheet_current_per_loop});
    }
    return loops;
  }
};

/// Maxwell's formula for two coaxial circular filaments given radii and
/// axial separation.
[[nodiscard]] inline double mutual_inductance(double radius_a, double radius_b,
                                              double separation) {
  const double d = std::abs(separation);
  if (radius_a == radius_b && d == 0.0) {
    throw SingularityError(
        "mutual_inductance: coincident filaments; use self_inductance_filament");
  }
  const double sum = radius_a + radius_b;
  const double m = 4.0 * radius_a * radius_b / (sum * sum + d * d);
  const auto kernel = elliptic_kernel(m);
  // M = mu0 sqrt(ab) [(2/k - k) K - (2/k) E] = mu0 sqrt(ab) (2/k) D
  return kMu0 * std::sqrt(radius_a * radius_b) * 2.0 / std::sqrt(m) * kernel.D;
}

[[nodiscard]] inline double mutual_inductance(const FilamentLoop& a, const FilamentLoop& b) {
  validate(a);
  validate(b);
  return mutual_inductance(a.radius, b.radius, a.axial_position - b.axial_position);
}

/// Thin round-wire loop: L = mu0 a (ln(8a / r) - 7/4).
[[nodiscard]] inline double self_inductance_filament(const FilamentLoop& loop,
                                                     double strand_radius) {
  validate(loop);
  if (!(strand_radius > 0.0) || !(strand_radius < loop.radius)) {
    throw DomainError("self_inductance_filament: strand radius must lie in (0, loop radius)");
  }
  return kMu0 * loop.radius * (std::log(8.0 * loop.radius / strand_radius) - 1.75);
}

/// Self-inductance of an arbitrary set of turns. Pair separations are
/// regularised as sqrt(d^2 + r_s^2): two adjacent tape turns 44 um apart couple
/// like filaments a geometric-mean distance apart, not like touching wires.
[[nodiscard]] inline double winding_self_inductance(std::span<const FilamentLoop> turns,
                                                    double strand_radius) {
  double total = 0.0;
  const double r2 = strand_radius * strand_radius;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    total += self_inductance_filament(turns[i], strand_radius);
    for (std::size_t j = i + 1; j < turns.size(); ++j) {
      const double d = turns[i].axial_position - turns[j].axial_position;
      total += 2.0 * mutual_inductance(turns[i].radius, turns[j].radius, std::sqrt(d * d + r2));
    }
  }
  return total;
}

[[nodiscard]] inline double coil_self_inductance(const CoilGeometry& coil) {
  const auto turns = coil.filaments();
  return winding_self_inductance(turns, coil.effective_strand_radius);
}

inline void check_gap(double gap) {
  if (!std::isfinite(gap) || gap < kMinimumGap) {
    throw ConfigError("coil and magnet overlap: gap " + std::to_string(gap) +
                      " m is below the 1 mm guard");
  }
}

struct Coupling {
  /// Flux into the coil per ampere-turn of magnet sheet current [Wb/A].
  double flux_per_ampere_turn;
  /// Sum over coil turns j and sheet loops k of M_jk [H]. Flux linked into the
  /// coil by the magnet is mutual_total * sheet_current_per_loop.
  double mutual_total;
};

namespace detail {

[[nodiscard]] inline double mutual_total(std::span<const FilamentLoop> turns,
                                         const MagnetModel& magnet, double gap) {
  double total = 0.0;
  for (int k = 0; k < magnet.sheet_loops; ++k) {
    const double xk = -gap - magnet.loop_depth(k);
    for (const auto& turn : turns) {
      total += mutual_inductance(turn.radius, magnet.radius, turn.axial_position - xk);
    }
  }
  return total;
}

}  // namespace detail

[[nodiscard]] inline Coupling pm_coil_coupling(const CoilGeometry& coil,
                                               const MagnetModel& magnet, double gap) {
  check_gap(gap);
  magnet.validate();
  const auto turns = coil.filaments();
  const double total = detail::mutual_total(turns, magnet, gap);
  return {total / magnet.sheet_loops, total};
}

struct Gradient {
  double value;             // dM/dz [H/m]
  double error_estimate;    // relative change against the step-halved estimate
  bool one_sided;           // gap too close to the guard for a central stencil
};

inline constexpr double kGradientStep = 1.0e-5;

/// dM_total/dz by Richardson-extrapolated finite differences (step 1e-5 m).
[[nodiscard]] inline Gradient coupling_gradient(const CoilGeometry& coil,
                                                const MagnetModel& magnet, double gap) {
  check_gap(gap);
  magnet.validate();
  const auto turns = coil.filaments();
  const auto M = [&](double z) { return detail::mutual_total(turns, magnet, z); };
  const double h = kGradientStep;
  if (gap - h >= kMinimumGap) {
    const auto central = [&](double step) { return (M(gap + step) - M(gap - step)) / (2.0 * step); };
    const double coarse = central(h);
    const double fine = central(0.5 * h);
    const double value = (4.0 * fine - coarse) / 3.0;
    return {value, std::abs(value - fine) / std::abs(value), false};
  }
  const double m0 = M(gap);
  const auto forward = [&](double step) {
    return (-3.0 * m0 + 4.0 * M(gap + step) - M(gap + 2.0 * step)) / (2.0 * step);
  };
  const double coarse = forward(h);
  const double fine = forward(0.5 * h);
  const double value = (4.0 * fine - coarse) / 3.0;
  return {value, std::abs(value - fine) / std::abs(value), true};
}

/// Upward axial force on the magnet [N]: F = -d/dz (i * M_total(z) * I_sheet).
/// Positive when coil and sheet currents share a sign (attraction, coil above).
[[nodiscard]] inline double axial_force(double coil_current, const CoilGeometry& coil,
                                        const MagnetModel& magnet, double gap) {
  if (coil_current == 0.0) {
    check_gap(gap);
    return 0.0;
  }
  return -coil_current * magnet.sheet_current_per_loop *
         coupling_gradient(coil, magnet, gap).value;
}

/// Upward axial force on the coil [N], computed with the magnet sheet as the
/// source and the coil displaced. Equal and opposite to axial_force.
[[nodiscard]] inline double axial_force_on_coil(double coil_current, const CoilGeometry& coil,
                                                const MagnetModel& magnet, double gap) {
  check_gap(gap);
  const auto sheet = magnet.filaments(gap);
  const auto turns = coil.filaments();
  // Coupling with the coil raised by `shift`.
  const auto coupling = [&](double shift) {
    double total = 0.0;
    for (const auto& loop : sheet) {
      for (const auto& turn : turns) {
        total += mutual_inductance(loop.radius, turn.radius,
                                   loop.axial_position - (turn.axial_position + shift));
      }
    }
    return total;
  };
  const double h = kGradientStep;
  const auto central = [&](double step) { return (coupling(step) - coupling(-step)) / (2.0 * step); };
  const double slope = (4.0 * central(0.5 * h) - central(h)) / 3.0;
  return coil_current * magnet.sheet_current_per_loop * slope;
}

/// On-axis B_z of one loop at axial position x.
[[nodiscard]] inline double loop_axial_field(double radius, double loop_x, double current,
                                             double x) {
  const double d = x - loop_x;
  const double r2 = radius * radius;
  return kMu0 * r2 * current / (2.0 * std::pow(r2 + d * d, 1.5));
}

/// On-axis B_z at the coil's geometric centre from coil turns and magnet sheet.
[[nodiscard]] inline double center_field(double coil_current, const CoilGeometry& coil,
                                         const MagnetModel& magnet, double gap) {
  const double probe = 0.5 * coil.height();
  double field = 0.0;
  for (const auto& turn : coil.filaments()) {
    field += loop_axial_field(turn.radius, turn.axial_position, coil_current, probe);
  }
  for (const auto& loop : magnet.filaments(gap)) {
    field += loop_axial_field(loop.radius, loop.axial_position, loop.current, probe);
  }
  return field;
}

/// Field at the centre of the magnet's top face per ampere of sheet current.
[[nodiscard]] inline double face_field_per_ampere(const MagnetModel& magnet) {
  double field = 0.0;
  for (int k = 0; k < magnet.sheet_loops; ++k) {
    field += loop_axial_field(magnet.radius, -magnet.loop_depth(k), 1.0, 0.0);
  }
  return field;
}

/// Sets the sheet current so the on-axis top-face field equals the target.
[[nodiscard]] inline MagnetModel calibrate_pm(MagnetModel magnet, double target_face_field) {
  if (!(target_face_field > 0.0) || !std::isfinite(target_face_field)) {
    throw DomainError("calibrate_pm: target face field must be positive");
  }
  magnet.sheet_current_per_loop = 1.0;
  magnet.validate();
  magnet.sheet_current_per_loop = target_face_field / face_field_per_ampere(magnet);
  return magnet;
}

/// Ideal-solenoid remanence implied by the sheet: B_r = mu0 N I / h.
[[nodiscard]] inline double equivalent_remanence(const MagnetModel& magnet) {
  return kMu0 * magnet.ampere_turns() / magnet.height;
}

}  // namespace fmsm
