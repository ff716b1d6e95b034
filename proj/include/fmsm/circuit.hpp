#pragma once

// Closed-loop coil circuit: flux-linkage balance with loop resistance, motional
// coupling to the magnet and flux injection from an overdriven bridge.

#include <algorithm>
#include <cmath>

#include "fmsm/errors.hpp"

namespace fmsm {

struct CircuitParams {
  double L_coil = 1.35e-3;            // [H]
  double R_loop = 1.35e-3 / 860.0;    // [Ohm], L / tau with the measured decay constant
  double E_c = 1.0e-4;                // [V/m]
  double bridge_length = 0.10;        // [m]
  double I_c_bridge = 413.0;          // [A]
  double n_value = 25.0;
  double I_c_coil = 53.9;             // [A], monitoring only

  void validate() const {
    if (!(L_coil > 0.0) || !(R_loop >= 0.0) || !(E_c > 0.0) || !(bridge_length > 0.0) ||
        !(I_c_bridge > 0.0) || !(I_c_coil > 0.0)) {
      throw ConfigError("circuit: parameters must be positive (R_loop may be zero)");
    }
    if (!(n_value >= 5.0)) {
      throw ConfigError("circuit: n_value must be at least 5");
    }
  }

  /// Decay time constant L/R; infinite for a lossless loop.
  [[nodiscard]] double tau() const {
    return R_loop > 0.0 ? L_coil / R_loop : INFINITY;
  }
};

struct CircuitState {
  double i_coil = 0.0;      // [A]
  double phi_pumped = 0.0;  // [Wb], integral of the bridge EMF
  double t = 0.0;           // [s]
};

/// Ratio |i_b| / I_c above which the power law is clamped.
inline constexpr double kBridgeOvercurrentClamp = 2.0;

struct BridgeEmf {
  double voltage;  // [V]
  bool clamped;
};

/// Power-law bridge EMF, odd in the bridge current:
/// v = sign(i_b) E_c l (|i_b| / I_c)^n.
[[nodiscard]] inline BridgeEmf bridge_emf(double bridge_current, const CircuitParams& params) {
  if (bridge_current == 0.0) {
    return {0.0, false};
  }
  double ratio = std::abs(bridge_current) / params.I_c_bridge;
  const bool clamped = ratio > kBridgeOvercurrentClamp;
  ratio = std::min(ratio, kBridgeOvercurrentClamp);
  const double magnitude = params.E_c * params.bridge_length * std::pow(ratio, params.n_value);
  return {std::copysign(magnitude, bridge_current), clamped};
}

struct PumpConfig {
  double amplitude_ratio = 1.2;  // peak i_b / I_c_bridge
  double pulse_width = 0.1;      // [s]
  double period = 0.5;           // [s]
  double null_gain = 1.0;        // [1/A], full-width pulses above 1/gain error
  double null_tolerance = 0.05;  // [A]

  void validate() const {
    if (!(amplitude_ratio > 0.0) || !(pulse_width > 0.0) || !(period > pulse_width)) {
      throw ConfigError("pump: require amplitude_ratio > 0 and 0 < pulse_width < period");
    }
    if (!(null_gain > 0.0) || !(null_tolerance > 0.0)) {
      throw ConfigError("pump: null gain and tolerance must be positive");
    }
  }
};

enum class PumpMode { Off, EffectiveBridge, Null };

/// Prescribed rectangular bridge-overcurrent pulse train. Pulses start at
/// origin + k * period and last pulse_width; between pulses i_b = 0.
struct PumpDrive {
  PumpMode mode = PumpMode::Off;
  double amplitude_ratio = 0.0;
  double pulse_width = 0.0;
  double period = 1.0;
  int polarity = 0;
  double origin = 0.0;
  // Null mode bookkeeping.
  double target_current = 0.0;
  double gain = 0.0;

  [[nodiscard]] bool active() const { return mode != PumpMode::Off && polarity != 0; }

  /// Phase inside the current period, in [0, period).
  [[nodiscard]] double phase(double t) const {
    const double elapsed = t - origin;
    const double k = std::floor(elapsed / period);
    return elapsed - k * period;
  }

  [[nodiscard]] bool pulsing(double t) const {
    return active() && t >= origin && phase(t) < pulse_width;
  }

  /// Bridge current [A] at time t.
  [[nodiscard]] double bridge_current(double t, double I_c_bridge) const {
    return pulsing(t) ? polarity * amplitude_ratio * I_c_bridge : 0.0;
  }

  /// First pulse edge strictly after t (INFINITY when off).
  [[nodiscard]] double next_edge(double t) const {
    if (!active()) {
      return INFINITY;
    }
    if (t < origin) {
      return origin;
    }
    const double k = std::floor((t - origin) / period);
    const double start = origin + k * period;
    const double candidates[] = {start + pulse_width, start + period, start + period + pulse_width};
    for (double edge : candidates) {
      if (edge > t) {
        return edge;
      }
    }
    return start + 2.0 * period;
  }

  /// Flux delivered by one full pulse [V s].
  [[nodiscard]] double pulse_area(const CircuitParams& params) const {
    return std::abs(bridge_emf(amplitude_ratio * params.I_c_bridge, params).voltage) * pulse_width;
  }
};

/// Controller command {+1, 0, -1} to a pulse train of matching polarity.
[[nodiscard]] inline PumpDrive pump_command_to_drive(int command, const PumpConfig& config,
                                                     double origin = 0.0) {
  PumpDrive drive;
  if (command == 0) {
    return drive;
  }
  drive.mode = PumpMode::EffectiveBridge;
  drive.amplitude_ratio = config.amplitude_ratio;
  drive.pulse_width = config.pulse_width;
  drive.period = config.period;
  drive.polarity = command > 0 ? 1 : -1;
  drive.origin = origin;
  return drive;
}

/// Proportional screening-current nulling: polarity follows the sign of the
/// error and the pulse width scales with gain * |error|, saturating at the
/// configured width. Returns Off once |i - target| < tolerance.
[[nodiscard]] inline PumpDrive null_screening(const CircuitState& state, double target_current,
                                              const PumpConfig& config, double origin = 0.0) {
  const double error = target_current - state.i_coil;
  PumpDrive drive;
  drive.target_current = target_current;
  drive.gain = config.null_gain;
  if (std::abs(error) < config.null_tolerance) {
    return drive;
  }
  drive.mode = PumpMode::Null;
  drive.amplitude_ratio = config.amplitude_ratio;
  drive.period = config.period;
  drive.pulse_width = config.pulse_width * std::min(1.0, config.null_gain * std::abs(error));
  drive.polarity = error > 0.0 ? 1 : -1;
  drive.origin = origin;
  return drive;
}

/// Magnet-side quantities the circuit needs at the present gap.
struct CouplingSample {
  double mutual;         // M_total [H]
  double gradient;       // dM/dz [H/m]
  double sheet_current;  // magnet equivalent current per sheet loop [A]
};

/// Total flux linkage lambda = L i + M(z) I_eq.
[[nodiscard]] inline double flux_linkage(double i_coil, const CouplingSample& c,
                                         const CircuitParams& params) {
  return params.L_coil * i_coil + c.mutual * c.sheet_current;
}

[[nodiscard]] inline double current_from_linkage(double linkage, const CouplingSample& c,
                                                 const CircuitParams& params) {
  return (linkage - c.mutual * c.sheet_current) / params.L_coil;
}

/// L di/dt = -I_eq dM/dz z_dot - R i + v_bridge(t).
[[nodiscard]] inline double coil_rhs(const CircuitState& state, double z_dot,
                                     const PumpDrive& drive, const CouplingSample& c,
                                     const CircuitParams& params) {
  const double v = bridge_emf(drive.bridge_current(state.t, params.I_c_bridge), params).voltage;
  return (-c.sheet_current * c.gradient * z_dot - params.R_loop * state.i_coil + v) /
         params.L_coil;
}

/// Pumped ("transport") part of the coil current: phi_pumped / L.
[[nodiscard]] inline double transport_current(const CircuitState& state,
                                              const CircuitParams& params) {
  return state.phi_pumped / params.L_coil;
}

}  // namespace fmsm
