#pragma once

// Coupled circuit + mechanics + controller integration with event handling.
//
// State vector: gap z, gap rate z_dot, total flux linkage lambda and pumped
// flux phi. The coil current is algebraic, i = (lambda - M(z) I_eq) / L, so a
// lossless undriven loop keeps lambda fixed by construction.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fmsm/circuit.hpp"
#include "fmsm/controller.hpp"
#include "fmsm/coupling_table.hpp"
#include "fmsm/errors.hpp"
#include "fmsm/integrator.hpp"
#include "fmsm/magnetics.hpp"
#include "fmsm/mechanics.hpp"

namespace fmsm {

struct SimConfig {
  double rel_tol = 1e-7;
  /// Absolute tolerances for z [m], z_dot [m/s], lambda [Wb], phi [Wb].
  std::array<double, 4> abs_tol{1e-10, 1e-9, 1e-12, 1e-12};
  double max_step = 0.01;        // [s]
  double event_tol = 1e-6;       // [s]
  double min_step = 1e-9;        // [s]
  double t_end = 100.0;          // [s]
  double record_period = 0.1;    // [s]

  void validate() const {
    if (!(rel_tol > 0.0) || !(max_step > 0.0) || !(event_tol > 0.0) || !(min_step > 0.0) ||
        !(t_end > 0.0) || !(record_period > 0.0)) {
      throw ConfigError("sim: tolerances, steps, t_end and record_period must be positive");
    }
    for (double a : abs_tol) {
      if (!(a > 0.0)) throw ConfigError("sim: absolute tolerances must be positive");
    }
    if (record_period < event_tol) {
      throw ConfigError("sim: record_period must not be finer than event_tol");
    }
  }
};

/// Everything the right-hand side needs: geometry, calibrated magnet, the
/// coupling table and the lumped parameters.
struct SystemModel {
  CoilGeometry coil;
  MagnetModel magnet;
  CouplingTable table;
  CircuitParams circuit;
  BodyParams body;

  [[nodiscard]] CouplingSample coupling(double z) const {
    const auto s = table.at(z);
    return {s.mutual, s.gradient, magnet.sheet_current_per_loop};
  }
  [[nodiscard]] double current(double z, double linkage) const {
    return current_from_linkage(linkage, coupling(z), circuit);
  }
  [[nodiscard]] double linkage(double z, double i_coil) const {
    return flux_linkage(i_coil, coupling(z), circuit);
  }
  /// Upward force on the magnet at coil current i.
  [[nodiscard]] double em_force_at_current(double z, double i_coil) const {
    return -i_coil * magnet.sheet_current_per_loop * table.slope(z);
  }
  [[nodiscard]] double em_force(double z, double linkage) const {
    const auto c = coupling(z);
    return -current_from_linkage(linkage, c, circuit) * c.sheet_current * c.gradient;
  }
  /// Quasi-static stiffness at fixed linkage: minus the gradient of the
  /// downward net force along the gap, i.e. dF_em/dz. Positive is restoring.
  [[nodiscard]] double stiffness(double z, double linkage, double h = 1e-6) const {
    return (em_force(z + h, linkage) - em_force(z - h, linkage)) / (2.0 * h);
  }
  [[nodiscard]] double field_at_center(double z, double i_coil) const {
    return center_field(i_coil, coil, magnet, std::max(z, kMinimumGap));
  }
};

/// Build the coupling table for a calibrated magnet.
[[nodiscard]] inline SystemModel make_system(const CoilGeometry& coil, const MagnetModel& magnet,
                                             const CircuitParams& circuit, const BodyParams& body,
                                             double z_max = 0.25, double step = 0.5e-3) {
  coil.validate();
  magnet.validate();
  circuit.validate();
  body.validate();
  return {coil, magnet, CouplingTable::build(coil, magnet, kMinimumGap, z_max, step), circuit,
          body};
}

struct Observation {
  double t;
  double z;
  double z_dot;
  double i_coil;
  double i_transport;
  Contact contact;
  bool lifted;  // has left the table at least once
};

struct Action {
  PumpDrive drive;
  int command = 0;
  bool stop = false;
};

/// Sampled-data supervisor called at every controller instant.
class Supervisor {
 public:
  virtual ~Supervisor() = default;
  virtual Action sample(const Observation& obs) = 0;
};

/// Supervisor that never pumps.
class IdleSupervisor final : public Supervisor {
 public:
  Action sample(const Observation&) override { return {}; }
};

struct RecordRow {
  double t;
  double z;
  double z_dot;
  double i_coil;
  double i_transport;
  double phi_pumped;
  double B_center;
  double F_em;
  int contact_flag;  // 1 supported, 0 free
  int cmd;
};

enum class EventKind { Liftoff, Capture, Command };

struct SimEvent {
  EventKind kind;
  double t;
  double z;
  double i_coil;
  int command;
};

struct RunRecord {
  std::vector<RecordRow> rows;
  std::vector<SimEvent> events;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t clamped_steps = 0;
  double max_abs_current = 0.0;

  [[nodiscard]] std::string meta(const std::string& key) const {
    for (const auto& [k, v] : metadata) {
      if (k == key) return v;
    }
    return {};
  }
};

/// Per accepted step, for invariant checks.
struct StepInfo {
  double t0;
  double t1;
  std::array<double, 4> y0;
  std::array<double, 4> y1;
  double bridge_voltage;
  Contact contact;
};

using StepObserver = std::function<void(const StepInfo&)>;

class Simulation {
 public:
  using Stepper = DormandPrince54<4>;
  using State = Stepper::State;

  Simulation(const SystemModel& model, SupportTrajectory table, SimConfig cfg,
             double sample_period = 0.05)
      : model_(model), table_(std::move(table)), cfg_(cfg), sample_period_(sample_period) {
    cfg_.validate();
    if (!(sample_period_ > 0.0)) throw ConfigError("sim: sample period must be positive");
  }

  /// Magnet resting on the table at t = 0 with the given total linkage.
  void set_initial_linkage(double linkage) {
    y_ = {table_.position(0.0), table_.velocity(0.0), linkage, 0.0};
    contact_ = Contact::Supported;
  }

  /// Free magnet at (z, z_dot) with the given linkage.
  void set_initial_free(double z, double z_dot, double linkage) {
    y_ = {z, z_dot, linkage, 0.0};
    contact_ = Contact::Free;
  }

  RunRecord run(Supervisor& supervisor, const StepObserver& observer = {}) {
    RunRecord record;
    Stepper stepper({cfg_.rel_tol, cfg_.abs_tol});
    double t = 0.0;
    double t_end = cfg_.t_end;
    std::size_t sample_index = 0;
    std::size_t record_index = 0;
    bool lifted = contact_ == Contact::Free;
    double h_free = cfg_.max_step;  // step size before truncation to time events

    const auto sample_time = [&](std::size_t k) { return static_cast<double>(k) * sample_period_; };
    const auto record_time = [&](std::size_t k) { return static_cast<double>(k) * cfg_.record_period; };

    // Initial contact check and controller sample at t = 0.
    if (contact_ == Contact::Supported &&
        normal_force(model_.em_force(y_[0], y_[2]), y_[1], model_.body) < 0.0) {
      contact_ = Contact::Free;
      lifted = true;
      record.events.push_back({EventKind::Liftoff, 0.0, y_[0], current(), 0});
    }
    if (apply_sample(supervisor, t, lifted, record)) t_end = t;
    ++sample_index;
    emit_row(t, record);
    ++record_index;

    while (t < t_end) {
      const double t_next = std::min({sample_time(sample_index), record_time(record_index),
                                      drive_.next_edge(t), table_.next_kink(t), t_end});
      double h = std::min(h_free, t_next - t);
      const bool truncated = h < h_free;
      // The bridge level and the table velocity are constant on [t, t_next).
      const double mid = t + 0.5 * std::min(t_next - t, cfg_.max_step);
      const auto emf = bridge_emf(drive_.bridge_current(mid, model_.circuit.I_c_bridge),
                                  model_.circuit);
      const double v_bridge = emf.voltage;
      const double v_table = table_.velocity(mid);
      const Contact mode = contact_;
      const auto rhs = [&](double, const State& y, State& dy) {
        derivative(y, mode, v_bridge, v_table, dy);
      };

      Stepper::Trial trial{};
      while (true) {
        trial = stepper.attempt(rhs, t, y_, h);
        if (trial.error_norm <= 1.0) break;
        ++record.rejected_steps;
        h = Stepper::propose(h, trial.error_norm, false);
        h_free = h;
        if (h < cfg_.min_step) {
          throw StiffnessError(
              "integrator step underflow at t=" + std::to_string(t) +
                  " s; the bridge EMF is too stiff, lower pump amplitude ratio or n-value",
              t, h);
        }
      }
      ++record.accepted_steps;
      if (emf.clamped) ++record.clamped_steps;

      double t_new = (t_next - (t + h) <= 1e-12 * std::max(1.0, t_next)) ? t_next : t + h;
      State y_new = trial.y;
      bool transition = false;

      const double g0 = event_value(t, y_, mode);
      const double g1 = event_value(t_new, y_new, mode);
      if (crossed(g0, g1, mode)) {
        const double t_star = locate_event(stepper, t, t_new, mode);
        if (t_star < t_new) {
          stepper.attempt(rhs, t, y_, t_star - t);
          y_new = stepper.interpolate(1.0);
          t_new = t_star;
        }
        transition = true;
      }

      if (observer) observer({t, t_new, y_, y_new, v_bridge, mode});
      y_ = y_new;
      t = t_new;
      const double proposal = std::min(Stepper::propose(h, trial.error_norm, true), cfg_.max_step);
      h_free = truncated ? std::max(proposal, h_free) : proposal;

      if (contact_ == Contact::Supported) {
        y_[0] = table_.position(t);
        y_[1] = table_.velocity(t);
      }
      if (transition) {
        apply_transition(t, record, lifted);
      }
      record.max_abs_current = std::max(record.max_abs_current, std::abs(current()));

      if (t >= sample_time(sample_index)) {
        if (apply_sample(supervisor, t, lifted, record)) t_end = t;
        ++sample_index;
      }
      if (t >= record_time(record_index) || t >= t_end) {
        emit_row(t, record);
        if (t >= record_time(record_index)) ++record_index;
      }
    }
    return record;
  }

  [[nodiscard]] const State& state() const { return y_; }
  [[nodiscard]] Contact contact() const { return contact_; }
  [[nodiscard]] const PumpDrive& drive() const { return drive_; }
  [[nodiscard]] const SupportTrajectory& table() const { return table_; }

 private:
  [[nodiscard]] double current() const { return model_.current(y_[0], y_[2]); }

  void derivative(const State& y, Contact mode, double v_bridge, double v_table,
                  State& dy) const {
    const auto c = model_.coupling(y[0]);
    const double i = current_from_linkage(y[2], c, model_.circuit);
    dy[2] = -model_.circuit.R_loop * i + v_bridge;
    dy[3] = v_bridge;
    if (mode == Contact::Supported) {
      dy[0] = v_table;
      dy[1] = 0.0;
      return;
    }
    const double em = -i * c.sheet_current * c.gradient;
    const MotionState motion{y[0], y[1], Contact::Free};
    const auto d = mechanics_rhs(motion, net_force(motion, em, model_.body), model_.body);
    dy[0] = d.dz;
    dy[1] = d.dz_dot;
  }

  /// Supported: required normal force (liftoff when negative).
  /// Free: gap minus table gap (capture when non-negative).
  [[nodiscard]] double event_value(double t, const State& y, Contact mode) const {
    if (mode == Contact::Supported) {
      return normal_force(model_.em_force(table_.position(t), y[2]), table_.velocity(t),
                          model_.body);
    }
    return y[0] - table_.position(t);
  }

  [[nodiscard]] static bool crossed(double g0, double g1, Contact mode) {
    if (mode == Contact::Supported) return g0 >= 0.0 && g1 < 0.0;
    return g0 < 0.0 && g1 >= 0.0;
  }

  /// Bisection on the dense output; returns the earliest bracketed time at
  /// which the transition condition holds, to within event_tol.
  [[nodiscard]] double locate_event(const Stepper& stepper, double t0, double t1,
                                    Contact mode) const {
    double lo = 0.0;
    double hi = 1.0;
    const double span = t1 - t0;
    while ((hi - lo) * span > cfg_.event_tol) {
      const double mid = 0.5 * (lo + hi);
      const auto y = stepper.interpolate(mid);
      const double g = event_value(t0 + mid * span, y, mode);
      const bool holds = mode == Contact::Supported ? g < 0.0 : g >= 0.0;
      (holds ? hi : lo) = mid;
    }
    return hi >= 1.0 ? t1 : t0 + hi * span;
  }

  void apply_transition(double t, RunRecord& record, bool& lifted) {
    const double em = model_.em_force(y_[0], y_[2]);
    const MotionState before{y_[0], y_[1], contact_};
    MotionState after;
    if (contact_ == Contact::Free) {
      // Force the capture condition: the event located the crossing.
      MotionState at_table = before;
      at_table.z = std::max(before.z, table_.position(t));
      at_table.z_dot = std::max(before.z_dot, table_.velocity(t));
      after = contact_update(at_table, em, table_, t, model_.body);
    } else {
      after = contact_update(before, em, table_, t, model_.body);
      after.contact = Contact::Free;
    }
    y_[0] = after.z;
    y_[1] = after.z_dot;
    if (after.contact != contact_) {
      contact_ = after.contact;
      if (contact_ == Contact::Free) {
        lifted = true;
        record.events.push_back({EventKind::Liftoff, t, y_[0], current(), command_});
      } else {
        record.events.push_back({EventKind::Capture, t, y_[0], current(), command_});
      }
    }
  }

  bool apply_sample(Supervisor& supervisor, double t, bool lifted, RunRecord& record) {
    const double i = current();
    const Observation obs{t, y_[0], y_[1], i, y_[3] / model_.circuit.L_coil, contact_, lifted};
    Action action = supervisor.sample(obs);
    merge_drive(action.drive, t);
    if (action.command != command_) {
      record.events.push_back({EventKind::Command, t, y_[0], i, action.command});
      command_ = action.command;
    }
    return action.stop;
  }

  /// A drive with unchanged mode and polarity keeps its pulse phase; anything
  /// else restarts the train at t.
  void merge_drive(PumpDrive next, double t) {
    if (next.active() && drive_.active() && next.mode == drive_.mode &&
        next.polarity == drive_.polarity) {
      next.origin = drive_.origin;
    } else {
      next.origin = t;
    }
    drive_ = next;
  }

  void emit_row(double t, RunRecord& record) const {
    const double i = current();
    record.rows.push_back({t, y_[0], y_[1], i, y_[3] / model_.circuit.L_coil, y_[3],
                           model_.field_at_center(y_[0], i), model_.em_force(y_[0], y_[2]),
                           contact_ == Contact::Supported ? 1 : 0, command_});
  }

  const SystemModel& model_;
  SupportTrajectory table_;
  SimConfig cfg_;
  double sample_period_;
  State y_{};
  Contact contact_ = Contact::Supported;
  PumpDrive drive_{};
  int command_ = 0;
};

}  // namespace fmsm
