#pragma once

// Hysteresis height regulation, setpoint programs and the zero-field-cooled
// screening-current supervisor. Heights are gaps (positive, growing downward).

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fmsm/circuit.hpp"
#include "fmsm/errors.hpp"

namespace fmsm {

enum class ControllerMode { Off, HeightHold, SetpointProgram, ZfcNull };

struct ControllerConfig {
  double delta_h = 0.5e-3;       // trigger half-band [m]
  double sample_period = 0.05;   // [s]
  double inner_fraction = 0.5;   // re-entry band = inner_fraction * delta_h
  double capture_dwell = 1.0;    // [s] continuous in-band time that counts as capture
  double timeout = 300.0;        // [s] per setpoint
  double filter_time = 0.5;      // [s] gap sensor low-pass time constant, 0 = raw
  ControllerMode mode = ControllerMode::Off;

  void validate() const {
    if (!(delta_h > 0.0) || !(sample_period > 0.0)) {
      throw ConfigError("controller: delta_h and sample_period must be positive");
    }
    if (!(inner_fraction >= 0.0) || !(inner_fraction < 1.0)) {
      throw ConfigError("controller: inner_fraction must lie in [0, 1)");
    }
    if (!(capture_dwell >= 0.0) || !(timeout > 0.0)) {
      throw ConfigError("controller: capture_dwell >= 0 and timeout > 0 required");
    }
    if (!(filter_time >= 0.0)) throw ConfigError("controller: filter_time must be >= 0");
  }
};

/// First-order low-pass on the sampled gap, discretized exactly for the
/// sample period.
class GapFilter {
 public:
  GapFilter(double time_constant, double sample_period)
      : alpha_(time_constant > 0.0 ? 1.0 - std::exp(-sample_period / time_constant) : 1.0) {}

  double update(double gap) {
    value_ = std::isnan(value_) ? gap : value_ + alpha_ * (gap - value_);
    return value_;
  }
  void reset() { value_ = NAN; }
  [[nodiscard]] double value() const { return value_; }

 private:
  double alpha_;
  double value_ = NAN;
};

/// One hysteresis decision. `latched` is the previous command. The magnet
/// below the band (gap too large) asks for +1, which pumps flux that raises it;
/// above the band asks for -1. A latched command persists until the gap is back
/// inside the inner band.
[[nodiscard]] inline int height_hold_step(double gap, double target_gap,
                                          const ControllerConfig& cfg, int latched = 0) {
  const double error = gap - target_gap;
  const double inner = cfg.inner_fraction * cfg.delta_h;
  if (error > cfg.delta_h) return +1;
  if (error < -cfg.delta_h) return -1;
  if (latched > 0 && error > inner) return +1;
  if (latched < 0 && error < -inner) return -1;
  return 0;
}

struct SetpointProgram {
  struct Segment {
    double gap;   // [m]
    double hold;  // [s]
  };
  std::vector<Segment> segments;

  void validate() const {
    if (segments.empty()) {
      throw ConfigError("setpoint program: at least one segment required");
    }
    for (const auto& s : segments) {
      if (!(s.hold > 0.0) || !(s.gap > 0.0)) {
        throw ConfigError("setpoint program: gaps and hold durations must be positive");
      }
    }
  }

  [[nodiscard]] double total_hold() const {
    double total = 0.0;
    for (const auto& s : segments) total += s.hold;
    return total;
  }
};

/// Steps through a setpoint program. Each hold clock starts when the magnet is
/// captured: free and inside the trigger band continuously for capture_dwell,
/// with the capture instant taken as the start of that interval.
class ProgramRunner {
 public:
  struct SegmentLog {
    double target;
    double issued = 0.0;
    double captured = NAN;
    double completed = NAN;
  };

  ProgramRunner(SetpointProgram program, ControllerConfig cfg)
      : program_(std::move(program)), cfg_(cfg) {
    program_.validate();
    cfg_.validate();
    log_.push_back({program_.segments.front().gap, 0.0});
  }

  [[nodiscard]] bool finished() const { return index_ >= program_.segments.size(); }

  /// Current target gap (last target once finished).
  [[nodiscard]] double target() const {
    return program_.segments[std::min(index_, program_.segments.size() - 1)].gap;
  }

  /// Feed one sample. Throws UnreachableSetpoint on timeout.
  void observe(double t, double gap, bool free) {
    if (finished()) return;
    const auto& segment = program_.segments[index_];
    auto& entry = log_.back();
    if (std::isnan(entry.captured)) {
      const bool in_band = free && std::abs(gap - segment.gap) <= cfg_.delta_h;
      if (in_band) {
        if (std::isnan(band_entry_)) band_entry_ = t;
        if (t - band_entry_ >= cfg_.capture_dwell) entry.captured = band_entry_;
      } else {
        band_entry_ = NAN;
      }
      if (std::isnan(entry.captured) && t - entry.issued > cfg_.timeout) {
        throw UnreachableSetpoint("setpoint " + std::to_string(segment.gap * 1e3) +
                                      " mm not captured within " + std::to_string(cfg_.timeout) +
                                      " s",
                                  segment.gap, t);
      }
      return;
    }
    if (t - entry.captured >= segment.hold) {
      entry.completed = t;
      ++index_;
      band_entry_ = NAN;
      if (!finished()) log_.push_back({program_.segments[index_].gap, t});
    }
  }

  [[nodiscard]] const std::vector<SegmentLog>& log() const { return log_; }
  [[nodiscard]] const SetpointProgram& program() const { return program_; }

  /// Piecewise-constant target: (time from which it applies, target gap).
  [[nodiscard]] std::vector<std::pair<double, double>> timeline() const {
    std::vector<std::pair<double, double>> out;
    for (const auto& e : log_) out.emplace_back(e.issued, e.target);
    return out;
  }

 private:
  SetpointProgram program_;
  ControllerConfig cfg_;
  std::size_t index_ = 0;
  double band_entry_ = NAN;
  std::vector<SegmentLog> log_;
};

/// Validates a program and returns its runner.
[[nodiscard]] inline ProgramRunner run_program(const SetpointProgram& program,
                                               const ControllerConfig& cfg) {
  return ProgramRunner(program, cfg);
}

enum class ZfcPhase { Approach, Hold, Retract };

enum class ZfcVariant {
  NoModulation,  // pump never fires
  Null,          // null the screening current during the hold
  PrePump,       // coil pre-charged with the predicted screening current
};

/// Table timing of a zero-field-cooled approach / hold / retract cycle.
struct ZfcPlan {
  double approach_end;  // [s]
  double hold_end;      // [s]
};

[[nodiscard]] inline ZfcPhase zfc_phase(double t, const ZfcPlan& plan) {
  if (t < plan.approach_end) return ZfcPhase::Approach;
  if (t < plan.hold_end) return ZfcPhase::Hold;
  return ZfcPhase::Retract;
}

/// Pump action for the ZFC cycle. Only the Null variant pumps, and only while
/// the magnet is held at the near position.
[[nodiscard]] inline PumpDrive zfc_supervisor(ZfcPhase phase, const CircuitState& state,
                                              ZfcVariant variant, const PumpConfig& pump,
                                              double origin = 0.0) {
  if (variant != ZfcVariant::Null || phase != ZfcPhase::Hold) {
    return {};
  }
  return null_screening(state, 0.0, pump, origin);
}

}  // namespace fmsm
