#pragma once

// Scenario catalog and runner: builds the model from a Config, prepares the
// initial state, picks a supervisor and summarizes the run.

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fmsm/analysis.hpp"
#include "fmsm/config.hpp"
#include "fmsm/controller.hpp"
#include "fmsm/sim.hpp"

namespace fmsm {

enum class ScenarioId { Decay, Compensate, Setpoints, Zfc, Discharge, Custom };

struct ScenarioInfo {
  ScenarioId id;
  const char* name;
  const char* description;
};

inline const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog = {
      {ScenarioId::Decay, "S1_decay", "field-cooled levitation left to decay until it falls"},
      {ScenarioId::Compensate, "S2_compensate", "field-cooled levitation held at 18.5 mm for an hour"},
      {ScenarioId::Setpoints, "S3_setpoints", "setpoint program 25/21/17/21/25 mm, 200 s each"},
      {ScenarioId::Zfc, "S4_zfc", "zero-field-cooled approach, hold at 14 mm, retract"},
      {ScenarioId::Discharge, "S5_discharge", "coil discharge from 10 A with the magnet far away"},
      {ScenarioId::Custom, "custom", "schema defaults plus overrides"},
  };
  return catalog;
}

[[nodiscard]] inline const ScenarioInfo& scenario_info(ScenarioId id) {
  for (const auto& s : scenario_catalog()) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown scenario id");
}

/// Accepts the full name or its prefix before '_' ("S4"), case-insensitive.
[[nodiscard]] inline ScenarioId parse_scenario_id(std::string_view text) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  const std::string key = lower(text);
  for (const auto& s : scenario_catalog()) {
    const std::string name = lower(s.name);
    if (key == name || key == name.substr(0, name.find('_'))) return s.id;
  }
  throw ConfigError("unknown scenario '" + std::string(text) + "'");
}

/// Preset overrides per catalog entry.
[[nodiscard]] inline Config scenario_preset(ScenarioId id) {
  Config c;
  switch (id) {
    case ScenarioId::Decay:
      c.set("scenario.init", "fc");
      c.set("table.profile", "lower");
      c.set("controller.mode", "off");
      c.set("sim.t_end", "1200");
      break;
    case ScenarioId::Compensate:
      c.set("scenario.init", "fc");
      c.set("table.profile", "lower");
      c.set("controller.mode", "hold");
      c.set("controller.h0", "0.0185");
      c.set("controller.delta_h", "0.0004");
      c.set("sim.t_end", "3700");
      break;
    case ScenarioId::Setpoints:
      c.set("scenario.init", "fc");
      c.set("table.profile", "lower");
      c.set("controller.mode", "program");
      c.set("controller.delta_h", "0.0004");
      c.set("pump.pulse_width", "0.05");
      c.set("sim.t_end", "2000");
      break;
    case ScenarioId::Zfc:
      c.set("scenario.init", "zfc");
      c.set("scenario.z_start", "0.100");
      c.set("scenario.z_hold", "0.014");
      c.set("scenario.hold_time", "150");
      c.set("table.profile", "cycle");
      c.set("controller.mode", "zfc");
      c.set("pump.mode", "null");
      c.set("sim.t_end", "500");
      break;
    case ScenarioId::Discharge:
      c.set("scenario.init", "current");
      c.set("scenario.i0", "10");
      c.set("scenario.z_start", "0.100");
      c.set("table.profile", "static");
      c.set("controller.mode", "off");
      c.set("sim.t_end", "2000");
      break;
    case ScenarioId::Custom:
      break;
  }
  return c;
}

struct ScenarioSpec {
  ScenarioId id = ScenarioId::Custom;
  Config overrides;
  std::string output_dir = ".";

  /// Preset with the user overrides layered on top.
  [[nodiscard]] Config effective_config() const {
    Config c = scenario_preset(id);
    c.merge(overrides);
    return c;
  }
};

// ---------------------------------------------------------------------------
// Config -> model parameters

[[nodiscard]] inline CoilGeometry coil_from(const Config& c) {
  CoilGeometry g;
  g.inner_radius = c.real("coil.inner_radius");
  g.outer_radius = c.real("coil.outer_radius");
  g.turns_total = c.integer("coil.turns");
  g.pancakes = c.integer("coil.pancakes");
  g.tape_width = c.real("coil.tape_width");
  g.pancake_gap = c.real("coil.pancake_gap");
  g.effective_strand_radius = c.real("coil.strand_radius");
  g.validate();
  return g;
}

/// Magnet with its sheet current either given or calibrated to the face field.
[[nodiscard]] inline MagnetModel magnet_from(const Config& c) {
  MagnetModel m;
  m.radius = c.real("magnet.radius");
  m.height = c.real("magnet.height");
  m.sheet_loops = c.integer("magnet.sheet_loops");
  m.mass = c.real("body.mass");
  const double given = c.real("magnet.sheet_current");
  if (given != 0.0) {
    m.sheet_current_per_loop = given;
    m.validate();
    return m;
  }
  try {
    return calibrate_pm(m, c.real("magnet.face_field"));
  } catch (const DomainError& e) {
    throw CalibrationError(std::string("magnet calibration failed: ") + e.what());
  }
}

[[nodiscard]] inline CircuitParams circuit_from(const Config& c) {
  CircuitParams p;
  p.L_coil = c.real("circuit.L");
  p.R_loop = c.real("circuit.R");
  p.E_c = c.real("circuit.Ec");
  p.bridge_length = c.real("circuit.l");
  p.I_c_bridge = c.real("circuit.Ic_bridge");
  p.n_value = c.real("circuit.n");
  p.I_c_coil = c.real("circuit.Ic_coil");
  p.validate();
  return p;
}

[[nodiscard]] inline BodyParams body_from(const Config& c) {
  BodyParams b;
  b.mass = c.real("body.mass");
  b.g = c.real("body.g");
  b.damping = c.real("body.damping");
  b.weight_override = c.optional_real("body.weight_override");
  b.validate();
  return b;
}

[[nodiscard]] inline PumpConfig pump_from(const Config& c) {
  PumpConfig p;
  p.amplitude_ratio = c.real("pump.r");
  p.pulse_width = c.real("pump.pulse_width");
  p.period = c.real("pump.period");
  p.null_gain = c.real("pump.null_gain");
  p.null_tolerance = c.real("pump.null_tol");
  p.validate();
  return p;
}

[[nodiscard]] inline ControllerConfig controller_from(const Config& c) {
  ControllerConfig k;
  k.delta_h = c.real("controller.delta_h");
  k.inner_fraction = c.real("controller.inner_fraction");
  k.sample_period = c.real("controller.sample_period");
  k.capture_dwell = c.real("controller.capture_dwell");
  k.timeout = c.real("controller.timeout");
  k.filter_time = c.real("controller.filter_time");
  const auto mode = c.text("controller.mode");
  k.mode = mode == "hold"      ? ControllerMode::HeightHold
           : mode == "program" ? ControllerMode::SetpointProgram
           : mode == "zfc"     ? ControllerMode::ZfcNull
                               : ControllerMode::Off;
  k.validate();
  return k;
}

[[nodiscard]] inline SetpointProgram program_from(const Config& c) {
  SetpointProgram p;
  for (const auto& [gap, hold] : c.pairs("controller.program")) p.segments.push_back({gap, hold});
  p.validate();
  return p;
}

[[nodiscard]] inline SimConfig sim_from(const Config& c) {
  SimConfig s;
  s.rel_tol = c.real("sim.rel_tol");
  s.abs_tol = {c.real("sim.abs_tol_z"), c.real("sim.abs_tol_zdot"), c.real("sim.abs_tol_flux"),
               c.real("sim.abs_tol_flux")};
  s.max_step = c.real("sim.max_step");
  s.event_tol = c.real("sim.event_tol");
  s.t_end = c.real("sim.t_end");
  s.record_period = c.real("sim.record_period");
  s.validate();
  return s;
}

[[nodiscard]] inline SupportTrajectory table_from(const Config& c) {
  const double speed = c.real("table.max_speed");
  const auto schedule = c.pairs("table.schedule");
  if (!schedule.empty()) {
    std::vector<SupportTrajectory::Waypoint> points;
    for (const auto& [t, z] : schedule) points.push_back({t, z});
    if (points.front().t != 0.0) throw ConfigError("table.schedule must start at t = 0");
    return SupportTrajectory(std::move(points), speed);
  }
  const double z0 = c.real("scenario.z_start");
  const auto profile = c.text("table.profile");
  if (profile == "lower") return SupportTrajectory::moves(z0, {{c.real("scenario.z_park"), 0.0}}, speed);
  if (profile == "cycle") {
    return SupportTrajectory::moves(
        z0, {{c.real("scenario.z_hold"), c.real("scenario.hold_time")}, {z0, 0.0}}, speed);
  }
  return SupportTrajectory({{0.0, z0}}, speed);
}

/// Approach and hold timing of a cycle profile.
[[nodiscard]] inline ZfcPlan zfc_plan_from(const Config& c) {
  const double approach =
      std::abs(c.real("scenario.z_start") - c.real("scenario.z_hold")) / c.real("table.max_speed");
  return {approach, approach + c.real("scenario.hold_time")};
}

[[nodiscard]] inline ZfcVariant zfc_variant_from(const Config& c) {
  const auto mode = c.text("pump.mode");
  if (mode == "off") return ZfcVariant::NoModulation;
  if (mode == "prepump") return ZfcVariant::PrePump;
  return ZfcVariant::Null;
}

namespace detail {

/// Coupling tables depend only on geometry; share them between runs.
inline std::shared_ptr<const CouplingTable> cached_table(const CoilGeometry& coil,
                                                        const MagnetModel& magnet, double z_max,
                                                        double step) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const CouplingTable>> cache;
  char key[512];
  std::snprintf(key, sizeof key, "%.17g|%.17g|%d|%d|%.17g|%.17g|%.17g|%.17g|%.17g|%d|%.17g|%.17g",
                coil.inner_radius, coil.outer_radius, coil.turns_total, coil.pancakes,
                coil.tape_width, coil.pancake_gap, magnet.radius, magnet.height,
                coil.effective_strand_radius, magnet.sheet_loops, z_max, step);
  {
    std::lock_guard lock(mutex);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const CouplingTable>(
      CouplingTable::build(coil, magnet, kMinimumGap, z_max, step));
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(table)).first->second;
}

}  // namespace detail

[[nodiscard]] inline std::shared_ptr<const SystemModel> model_from(const Config& c) {
  auto model = std::make_shared<SystemModel>();
  model->coil = coil_from(c);
  model->magnet = magnet_from(c);
  model->circuit = circuit_from(c);
  model->body = body_from(c);
  model->table = *detail::cached_table(model->coil, model->magnet, c.real("coupling.z_max"),
                                       c.real("coupling.step"));
  return model;
}

// ---------------------------------------------------------------------------
// Supervisors

/// Hysteresis height hold, engaged once the magnet has lifted off.
class HeightHoldSupervisor final : public Supervisor {
 public:
  HeightHoldSupervisor(double target_gap, ControllerConfig cfg, PumpConfig pump)
      : target_(target_gap), cfg_(cfg), pump_(pump), filter_(cfg.filter_time, cfg.sample_period) {}

  Action sample(const Observation& obs) override {
    if (!obs.lifted || obs.contact != Contact::Free) {
      command_ = 0;
      filter_.reset();
      return {};
    }
    command_ = height_hold_step(filter_.update(obs.z), target_, cfg_, command_);
    return {pump_command_to_drive(command_, pump_, obs.t), command_, false};
  }

 private:
  double target_;
  ControllerConfig cfg_;
  PumpConfig pump_;
  GapFilter filter_;
  int command_ = 0;
};

/// Setpoint program on top of the hysteresis law; stops the run when done.
class ProgramSupervisor final : public Supervisor {
 public:
  ProgramSupervisor(const SetpointProgram& program, ControllerConfig cfg, PumpConfig pump)
      : runner_(program, cfg), cfg_(cfg), pump_(pump), filter_(cfg.filter_time, cfg.sample_period) {}

  Action sample(const Observation& obs) override {
    if (!obs.lifted) return {};
    runner_.observe(obs.t, obs.z, obs.contact == Contact::Free);
    if (runner_.finished()) return {{}, 0, true};
    if (obs.contact != Contact::Free) {
      command_ = 0;
      filter_.reset();
      return {};
    }
    command_ = height_hold_step(filter_.update(obs.z), runner_.target(), cfg_, command_);
    return {pump_command_to_drive(command_, pump_, obs.t), command_, false};
  }

  [[nodiscard]] const ProgramRunner& runner() const { return runner_; }

 private:
  ProgramRunner runner_;
  ControllerConfig cfg_;
  PumpConfig pump_;
  GapFilter filter_;
  int command_ = 0;
};

/// Screening-current nulling during the near hold of a ZFC cycle.
class ZfcSupervisor final : public Supervisor {
 public:
  ZfcSupervisor(ZfcPlan plan, ZfcVariant variant, PumpConfig pump)
      : plan_(plan), variant_(variant), pump_(pump) {}

  Action sample(const Observation& obs) override {
    const auto phase = zfc_phase(obs.t, plan_);
    const CircuitState state{obs.i_coil, 0.0, obs.t};
    const PumpDrive drive = zfc_supervisor(phase, state, variant_, pump_, obs.t);
    if (phase == ZfcPhase::Hold && std::isnan(nulled_at_) &&
        std::abs(obs.i_coil) < pump_.null_tolerance) {
      nulled_at_ = obs.t;
    }
    return {drive, drive.active() ? drive.polarity : 0, false};
  }

  /// First hold sample with |i| below the nulling tolerance (NaN if never).
  [[nodiscard]] double nulled_at() const { return nulled_at_; }

 private:
  ZfcPlan plan_;
  ZfcVariant variant_;
  PumpConfig pump_;
  double nulled_at_ = NAN;
};

// ---------------------------------------------------------------------------
// Runner

using Summary = std::vector<std::pair<std::string, std::string>>;

struct ScenarioResult {
  ScenarioId id = ScenarioId::Custom;
  Config config;
  std::shared_ptr<const SystemModel> model;
  RunRecord record;
  Summary summary;
  double initial_linkage = 0.0;
  std::vector<ProgramRunner::SegmentLog> segments;
  std::optional<ZfcPlan> zfc_plan;
  double nulled_at = NAN;

  [[nodiscard]] std::string summary_value(const std::string& key) const {
    for (const auto& [k, v] : summary) {
      if (k == key) return v;
    }
    return {};
  }
};

[[nodiscard]] inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// Initial total linkage for the configured coil preparation.
[[nodiscard]] inline double initial_linkage(const Config& c, const SystemModel& model) {
  const double z0 = c.real("scenario.z_start");
  const auto init = c.text("scenario.init");
  if (init == "current") return model.linkage(z0, c.real("scenario.i0"));
  if (init == "zfc" && zfc_variant_from(c) == ZfcVariant::PrePump &&
      c.text("table.profile") == "cycle") {
    // Pre-charge so the current vanishes at the near hold.
    return model.linkage(c.real("scenario.z_hold"), 0.0);
  }
  return model.linkage(z0, 0.0);
}

namespace detail {

inline void summarize(ScenarioResult& r, const SimConfig& sim) {
  const auto& rec = r.record;
  const auto& model = *r.model;
  const auto& c = r.config;
  auto add = [&](const std::string& k, const std::string& v) { r.summary.emplace_back(k, v); };
  auto num = [&](const std::string& k, double v) { add(k, format_number(v)); };
  const double sign = c.text("report.datum") == "height" ? -1.0 : 1.0;

  add("scenario", scenario_info(r.id).name);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, c.hash());
  add("config_hash", hash);
  num("t_final", rec.rows.empty() ? 0.0 : rec.rows.back().t);
  num("accepted_steps", static_cast<double>(rec.accepted_steps));
  num("rejected_steps", static_cast<double>(rec.rejected_steps));
  num("max_abs_i_coil", rec.max_abs_current);
  add("coil_overcritical", rec.max_abs_current > model.circuit.I_c_coil ? "true" : "false");

  const auto lift = first_event(rec, EventKind::Liftoff);
  add("lifted", lift ? "true" : "false");
  if (lift) {
    num("liftoff_time", lift->t);
    num("liftoff_gap", sign * lift->z);
    if (const auto fall = fall_time(rec)) num("fall_time", *fall);
    const double t_settle = lift->t + 10.0;
    if (const auto eq = mean_free_gap(rec.rows, t_settle, t_settle + 20.0)) {
      num("equilibrium_gap", sign * *eq);
      // Linkage at the settle window for the quasi-static stiffness.
      for (const auto& row : rec.rows) {
        if (row.t >= t_settle && row.contact_flag == 0) {
          num("stiffness_at_equilibrium",
              model.stiffness(*eq, model.linkage(row.z, row.i_coil)));
          break;
        }
      }
    }
  }

  const auto mode = c.text("controller.mode");
  if (mode == "hold") {
    const double h0 = c.real("controller.h0");
    const double half = 0.5e-3;
    const auto stats = band_stats(rec.rows, h0 - half, h0 + half);
    num("band_first_entry", stats.first_entry);
    num("band_duration", stats.duration);
    num("in_band_fraction", stats.fraction());
    num("band_max_excursion", stats.max_excursion);
    int cycles = 0;
    int prev = 0;
    for (const auto& e : rec.events) {
      if (e.kind != EventKind::Command) continue;
      if (e.command > 0 && prev <= 0 && e.t > stats.first_entry) ++cycles;
      prev = e.command;
    }
    num("compensation_cycles", cycles);
  }
  if (mode == "program") {
    num("segments_completed",
        static_cast<double>(std::count_if(r.segments.begin(), r.segments.end(),
                                          [](const auto& s) { return !std::isnan(s.completed); })));
    for (std::size_t k = 0; k < r.segments.size(); ++k) {
      const auto& s = r.segments[k];
      double worst = NAN;
      if (!std::isnan(s.captured)) {
        worst = 0.0;
        const double end = std::isnan(s.completed) ? INFINITY : s.completed;
        for (const auto& row : rec.rows) {
          if (row.t >= s.captured && row.t <= end) worst = std::max(worst, std::abs(row.z - s.target));
        }
      }
      const std::string p = "segment." + std::to_string(k) + ".";
      num(p + "target", sign * s.target);
      num(p + "captured", s.captured);
      num(p + "completed", s.completed);
      num(p + "max_deviation", worst);
    }
  }
  if (r.zfc_plan) {
    num("hold_start", r.zfc_plan->approach_end);
    num("hold_end", r.zfc_plan->hold_end);
    num("nulled_at", r.nulled_at);
    for (const auto& row : rec.rows) {
      if (row.t >= r.zfc_plan->hold_end) {
        num("i_coil_end_of_hold", row.i_coil);
        break;
      }
    }
    if (lift) {
      const double t_settle = lift->t + 10.0;
      if (const auto eq = mean_free_gap(rec.rows, t_settle, sim.t_end)) {
        num("retract_mean_gap", sign * *eq);
      }
    }
  }
  if (c.text("scenario.init") == "current" && mode == "off" && !lift) {
    num("tau_fit", fit_decay_constant(rec.rows));
    num("tau_model", model.circuit.tau());
  }
}

}  // namespace detail

/// Executes one scenario end to end.
[[nodiscard]] inline ScenarioResult run_scenario(const ScenarioSpec& spec,
                                                 const StepObserver& observer = {}) {
  ScenarioResult result;
  result.id = spec.id;
  result.config = spec.effective_config();
  const Config& c = result.config;
  result.model = model_from(c);
  const auto& model = *result.model;
  const SimConfig sim = sim_from(c);
  const ControllerConfig ctrl = controller_from(c);
  const PumpConfig pump = pump_from(c);

  Simulation simulation(model, table_from(c), sim, ctrl.sample_period);
  result.initial_linkage = initial_linkage(c, model);
  simulation.set_initial_linkage(result.initial_linkage);

  std::unique_ptr<Supervisor> supervisor;
  ProgramSupervisor* program = nullptr;
  ZfcSupervisor* zfc = nullptr;
  switch (ctrl.mode) {
    case ControllerMode::HeightHold:
      supervisor = std::make_unique<HeightHoldSupervisor>(c.real("controller.h0"), ctrl, pump);
      break;
    case ControllerMode::SetpointProgram: {
      auto p = std::make_unique<ProgramSupervisor>(program_from(c), ctrl, pump);
      program = p.get();
      supervisor = std::move(p);
      break;
    }
    case ControllerMode::ZfcNull: {
      result.zfc_plan = zfc_plan_from(c);
      auto z = std::make_unique<ZfcSupervisor>(*result.zfc_plan, zfc_variant_from(c), pump);
      zfc = z.get();
      supervisor = std::move(z);
      break;
    }
    case ControllerMode::Off:
      supervisor = std::make_unique<IdleSupervisor>();
      break;
  }

  result.record = simulation.run(*supervisor, observer);
  if (program) result.segments = program->runner().log();
  if (zfc) result.nulled_at = zfc->nulled_at();

  auto& meta = result.record.metadata;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, c.hash());
  meta.emplace_back("scenario", scenario_info(spec.id).name);
  meta.emplace_back("config_hash", hash);
  meta.emplace_back("sheet_current_per_loop", format_number(model.magnet.sheet_current_per_loop));
  meta.emplace_back("equivalent_remanence", format_number(equivalent_remanence(model.magnet)));
  meta.emplace_back("L_coil", format_number(model.circuit.L_coil));
  meta.emplace_back("R_loop", format_number(model.circuit.R_loop));
  meta.emplace_back("weight", format_number(model.body.weight()));
  meta.emplace_back("initial_linkage", format_number(result.initial_linkage));

  detail::summarize(result, sim);
  return result;
}

}  // namespace fmsm
