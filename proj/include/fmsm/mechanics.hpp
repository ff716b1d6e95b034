#pragma once

// Vertical rigid-body motion of the magnet. The state variable z is the gap
// below the coil and grows downward; forces are reported positive upward.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fmsm/constants.hpp"
#include "fmsm/errors.hpp"

namespace fmsm {

struct BodyParams {
  double mass = 0.450;                   // [kg]
  double g = kStandardGravity;           // [m/s^2]
  double damping = 0.5;                  // [N s/m]
  std::optional<double> weight_override; // [N]

  void validate() const {
    if (!(mass > 0.0) || !(g > 0.0) || !(damping >= 0.0)) {
      throw ConfigError("body: mass and g must be positive, damping non-negative");
    }
    if (weight_override && !(*weight_override > 0.0)) {
      throw ConfigError("body: weight_override must be positive");
    }
  }

  [[nodiscard]] double weight() const { return weight_override.value_or(mass * g); }
};

enum class Contact { Free, Supported };

struct MotionState {
  double z = 0.0;      // [m]
  double z_dot = 0.0;  // [m/s]
  Contact contact = Contact::Supported;
};

/// Piecewise-linear table gap versus time. The table sits under the magnet,
/// so the magnet gap never exceeds the table gap: z <= z_table(t).
class SupportTrajectory {
 public:
  struct Waypoint {
    double t;  // [s]
    double z;  // [m]
  };

  SupportTrajectory() = default;

  explicit SupportTrajectory(std::vector<Waypoint> points, double max_speed = 0.5e-3)
      : points_(std::move(points)), max_speed_(max_speed) {
    if (points_.empty()) {
      throw ConfigError("table: schedule needs at least one waypoint");
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double dt = points_[i].t - points_[i - 1].t;
      if (!(dt > 0.0)) {
        throw ConfigError("table: schedule times must be strictly increasing");
      }
      const double speed = std::abs(points_[i].z - points_[i - 1].z) / dt;
      if (speed > max_speed_ * (1.0 + 1e-9)) {
        throw ConfigError("table: segment speed " + std::to_string(speed) +
                          " m/s exceeds max speed " + std::to_string(max_speed_));
      }
    }
  }

  /// Schedule starting at z0 at t = 0 that moves at `speed` between the given
  /// stops and dwells at each for the paired duration.
  static SupportTrajectory moves(double z0, const std::vector<std::pair<double, double>>& stops,
                                 double speed = 0.5e-3) {
    std::vector<Waypoint> points{{0.0, z0}};
    double t = 0.0;
    double z = z0;
    for (const auto& [target, dwell] : stops) {
      if (target != z) {
        t += std::abs(target - z) / speed;
        z = target;
        points.push_back({t, z});
      }
      if (dwell > 0.0) {
        t += dwell;
        points.push_back({t, z});
      }
    }
    return SupportTrajectory(std::move(points), speed);
  }

  [[nodiscard]] const std::vector<Waypoint>& waypoints() const { return points_; }
  [[nodiscard]] double max_speed() const { return max_speed_; }
  [[nodiscard]] double end_time() const { return points_.back().t; }

  [[nodiscard]] double position(double t) const {
    if (t <= points_.front().t) return points_.front().z;
    if (t >= points_.back().t) return points_.back().z;
    const auto i = segment(t);
    const auto& a = points_[i];
    const auto& b = points_[i + 1];
    return a.z + (b.z - a.z) * (t - a.t) / (b.t - a.t);
  }

  /// Velocity on the segment starting at or containing t (right-continuous).
  [[nodiscard]] double velocity(double t) const {
    if (t < points_.front().t || t >= points_.back().t) return 0.0;
    const auto i = segment(t);
    const auto& a = points_[i];
    const auto& b = points_[i + 1];
    return (b.z - a.z) / (b.t - a.t);
  }

  /// First waypoint time strictly after t.
  [[nodiscard]] double next_kink(double t) const {
    for (const auto& p : points_) {
      if (p.t > t) return p.t;
    }
    return INFINITY;
  }

 private:
  [[nodiscard]] std::size_t segment(double t) const {
    std::size_t i = 0;
    while (i + 2 < points_.size() && t >= points_[i + 1].t) ++i;
    return i;
  }

  std::vector<Waypoint> points_{{0.0, 0.0}};
  double max_speed_ = 0.5e-3;
};

/// Net upward force on the magnet: F_em - W + c z_dot. Viscous damping opposes
/// the motion; z_dot > 0 is downward motion.
[[nodiscard]] inline double net_force(const MotionState& state, double em_force,
                                      const BodyParams& body) {
  return em_force - body.weight() + body.damping * state.z_dot;
}

/// Normal force the table must supply to carry the magnet along its
/// (piecewise constant) velocity.
[[nodiscard]] inline double normal_force(double em_force, double table_velocity,
                                         const BodyParams& body) {
  return body.weight() - em_force - body.damping * table_velocity;
}

/// Contact transition at time t. Supported stays supported while the required
/// normal force is non-negative; Free is captured (inelastically) once the
/// magnet reaches the table while moving toward it.
[[nodiscard]] inline MotionState contact_update(const MotionState& state, double em_force,
                                                const SupportTrajectory& table, double t,
                                                const BodyParams& body) {
  const double z_table = table.position(t);
  const double v_table = table.velocity(t);
  MotionState next = state;
  if (state.contact == Contact::Supported) {
    next.z = z_table;
    next.z_dot = v_table;
    if (normal_force(em_force, v_table, body) < 0.0) {
      next.contact = Contact::Free;
    }
    return next;
  }
  if (state.z >= z_table && state.z_dot >= v_table) {
    next.z = z_table;
    next.z_dot = v_table;
    next.contact = normal_force(em_force, v_table, body) >= 0.0 ? Contact::Supported
                                                                 : Contact::Free;
  }
  return next;
}

struct MotionDerivative {
  double dz;
  double dz_dot;
};

/// Newton's law in the downward gap coordinate: m z'' = -F_net.
[[nodiscard]] inline MotionDerivative mechanics_rhs(const MotionState& state, double net_upward,
                                                    const BodyParams& body) {
  return {state.z_dot, -net_upward / body.mass};
}

}  // namespace fmsm
