#pragma once

// Oracle suite behind the `verify` subcommand. Each check compares a
// production quantity against an independent computation.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fmsm/elliptic.hpp"
#include "fmsm/magnetics.hpp"
#include "fmsm/oracles.hpp"
#include "fmsm/scenario.hpp"

namespace fmsm {

/// Replays a fixed list of (start time, command) pairs through the pump.
class CommandScheduleSupervisor final : public Supervisor {
 public:
  CommandScheduleSupervisor(std::vector<std::pair<double, int>> schedule, PumpConfig pump)
      : schedule_(std::move(schedule)), pump_(pump) {}

  Action sample(const Observation& obs) override {
    int command = 0;
    for (const auto& [t, c] : schedule_) {
      if (obs.t + 1e-9 >= t) command = c;
    }
    return {pump_command_to_drive(command, pump_, obs.t), command, false};
  }

  /// Pumped flux expected at t_end from the schedule alone: each command
  /// segment starts a fresh train and cuts the last pulse at its end.
  [[nodiscard]] double expected_flux(double t_end, const CircuitParams& circuit) const {
    const double v = bridge_emf(pump_.amplitude_ratio * circuit.I_c_bridge, circuit).voltage;
    double flux = 0.0;
    for (std::size_t k = 0; k < schedule_.size(); ++k) {
      const double a = schedule_[k].first;
      const double b = std::min(k + 1 < schedule_.size() ? schedule_[k + 1].first : INFINITY, t_end);
      const int c = schedule_[k].second;
      if (c == 0 || !(b > a)) continue;
      for (double start = a; start < b; start += pump_.period) {
        flux += (c > 0 ? 1.0 : -1.0) * v * std::min(pump_.pulse_width, b - start);
      }
    }
    return flux;
  }

 private:
  std::vector<std::pair<double, int>> schedule_;
  PumpConfig pump_;
};

enum class OracleStatus { Pass, Fail, Skip };

struct OracleResult {
  std::string name;
  OracleStatus status;
  double metric;     // observed error (or value) driving the verdict
  double threshold;  // pass limit for the metric
  std::string detail;
};

using MutualFn = std::function<double(double, double, double)>;

struct VerifyOptions {
  /// Mutual inductance under test; defaults to the production formula.
  MutualFn mutual = [](double a, double b, double d) { return mutual_inductance(a, b, d); };
  Config config;
  std::uint64_t seed = 20240611;
};

namespace detail {

inline OracleResult verdict(std::string name, double metric, double threshold,
                            std::string detail = {}) {
  const bool ok = std::isfinite(metric) && metric <= threshold;
  return {std::move(name), ok ? OracleStatus::Pass : OracleStatus::Fail, metric, threshold,
          std::move(detail)};
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace detail

[[nodiscard]] inline OracleResult check_elliptic() {
  double worst = 0.0;
  for (int k = 0; k < 40; ++k) {
    const double m = 0.999 * k / 39.0;
    const auto [K, E] = oracle::elliptic_KE(m);
    const auto p = elliptic_KE(m);
    worst = std::max({worst, detail::rel_err(p.K, K), detail::rel_err(p.E, E)});
  }
  return detail::verdict("elliptic_vs_quadrature", worst, 1e-12, "40 parameters in [0, 0.999]");
}

/// Random coaxial pairs with radii in [5, 100] mm and separations within
/// +-200 mm, compared against the Neumann integral.
[[nodiscard]] inline OracleResult check_neumann(const MutualFn& mutual, std::uint64_t seed,
                                                int pairs = 100) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(0.005, 0.1);
  std::uniform_real_distribution<double> separation(-0.2, 0.2);
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const double a = radius(rng);
    const double b = radius(rng);
    const double d = separation(rng);
    worst = std::max(worst, detail::rel_err(mutual(a, b, d), oracle::neumann_mutual(a, b, d)));
  }
  return detail::verdict("maxwell_vs_neumann", worst, 1e-9,
                         std::to_string(pairs) + " random coaxial pairs");
}

[[nodiscard]] inline OracleResult check_reciprocity(const MutualFn& mutual, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> radius(0.005, 0.1);
  std::uniform_real_distribution<double> separation(0.001, 0.2);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double a = radius(rng), b = radius(rng), d = separation(rng);
    const double m = mutual(a, b, d);
    worst = std::max({worst, detail::rel_err(mutual(b, a, d), m), detail::rel_err(mutual(a, b, -d), m)});
  }
  return detail::verdict("mutual_reciprocity", worst, 1e-12, "swap radii and mirror separation");
}

/// Production force (Maxwell formula, Richardson difference) against the
/// differentiated Neumann integrand over gaps 10..60 mm.
[[nodiscard]] inline OracleResult check_force_energy(const Config& config) {
  const CoilGeometry coil = coil_from(config);
  const MagnetModel magnet = magnet_from(config);
  double worst = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double z = 0.010 + 0.005 * k;
    worst = std::max(worst, detail::rel_err(axial_force(1.0, coil, magnet, z),
                                            oracle::axial_force_neumann(1.0, coil, magnet, z)));
  }
  return detail::verdict("force_vs_energy_gradient", worst, 1e-5, "11 gaps in [10, 60] mm");
}

/// Lossless field-cooled release: the total linkage must stay fixed.
[[nodiscard]] inline OracleResult check_flux_conservation(const Config& base) {
  ScenarioSpec spec;
  spec.id = ScenarioId::Decay;
  spec.overrides = base;
  spec.overrides.set("circuit.R", "0");
  spec.overrides.set("sim.t_end", "120");
  double worst = 0.0;
  double lambda0 = NAN;
  const auto result = run_scenario(spec, [&](const StepInfo& s) {
    if (std::isnan(lambda0)) lambda0 = s.y0[2];
    worst = std::max(worst, detail::rel_err(s.y1[2], lambda0));
  });
  const bool lifted = result.summary_value("lifted") == "true";
  return detail::verdict("flux_linkage_conservation", lifted ? worst : INFINITY, 1e-10,
                         lifted ? "R = 0, released field-cooled magnet" : "magnet never lifted");
}

/// Pumped flux from a scripted command schedule against the pulse count
/// times the unit pulse area.
[[nodiscard]] inline OracleResult check_pumped_flux(const Config& base) {
  const Config c = [&] {
    Config k = scenario_preset(ScenarioId::Discharge);
    k.merge(base);
    return k;
  }();
  const auto model = model_from(c);
  const PumpConfig pump = pump_from(c);
  SimConfig sim = sim_from(c);
  sim.t_end = 12.0;
  CommandScheduleSupervisor supervisor({{0.0, 1}, {3.2, 0}, {4.0, -1}, {6.05, 1}, {9.0, 0}}, pump);
  Simulation simulation(*model, table_from(c), sim, c.real("controller.sample_period"));
  simulation.set_initial_linkage(model->linkage(c.real("scenario.z_start"), 0.0));
  (void)simulation.run(supervisor);
  const double expected = supervisor.expected_flux(sim.t_end, model->circuit);
  return detail::verdict("pumped_flux_bookkeeping",
                         detail::rel_err(simulation.state()[3], expected), 1e-9,
                         "scripted +1/0/-1/+1/0 schedule");
}

[[nodiscard]] inline OracleResult check_discharge(const Config& base) {
  ScenarioSpec spec;
  spec.id = ScenarioId::Discharge;
  spec.overrides = base;
  const Config c = spec.effective_config();
  const double R = c.real("circuit.R");
  if (R == 0.0) {
    return {"discharge_time_constant", OracleStatus::Skip, INFINITY, 0.005,
            "R_loop = 0: infinite time constant"};
  }
  const auto result = run_scenario(spec);
  const double tau = std::stod(result.summary_value("tau_fit"));
  const double expected = c.real("circuit.L") / R;
  return detail::verdict("discharge_time_constant", detail::rel_err(tau, expected), 0.005,
                         "fit " + format_number(tau) + " s vs L/R " + format_number(expected) + " s");
}

/// The calibrated sheet reproduces the target face field.
[[nodiscard]] inline OracleResult check_calibration(const Config& config) {
  const MagnetModel magnet = magnet_from(config);
  const double target = config.real("magnet.face_field");
  const double face = face_field_per_ampere(magnet) * magnet.sheet_current_per_loop;
  return detail::verdict("pm_calibration", detail::rel_err(face, target), 1e-12,
                         "sheet current " + format_number(magnet.sheet_current_per_loop) + " A");
}

/// The sheet's remanence agrees with a continuously magnetized cylinder of
/// the same face field.
[[nodiscard]] inline OracleResult check_remanence(const Config& config) {
  const MagnetModel magnet = magnet_from(config);
  const double br = equivalent_remanence(magnet);
  const double solid = oracle::solid_cylinder_face_field(br, magnet.radius, magnet.height);
  return detail::verdict("pm_remanence_vs_solid_cylinder",
                         detail::rel_err(solid, config.real("magnet.face_field")), 0.01,
                         "B_r " + format_number(br) + " T");
}

[[nodiscard]] inline OracleResult check_bridge_unit_point(const Config& config) {
  const auto circuit = circuit_from(config);
  const double v = bridge_emf(circuit.I_c_bridge, circuit).voltage;
  const double expected = circuit.E_c * circuit.bridge_length;
  return {"bridge_emf_unit_point", v == expected ? OracleStatus::Pass : OracleStatus::Fail,
          std::abs(v - expected), 0.0, "v(I_c) = E_c l"};
}

[[nodiscard]] inline std::vector<OracleResult> run_verify(const VerifyOptions& options = {}) {
  return {
      check_elliptic(),
      check_neumann(options.mutual, options.seed),
      check_reciprocity(options.mutual, options.seed),
      check_force_energy(options.config),
      check_flux_conservation(options.config),
      check_pumped_flux(options.config),
      check_discharge(options.config),
      check_calibration(options.config),
      check_remanence(options.config),
      check_bridge_unit_point(options.config),
  };
}

[[nodiscard]] inline bool all_passed(const std::vector<OracleResult>& results) {
  for (const auto& r : results) {
    if (r.status == OracleStatus::Fail) return false;
  }
  return true;
}

}  // namespace fmsm
