// Command-line front end for the maglev simulator.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fmsm/fmsm.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kCheckFailed = 1, kConfigFailure = 2, kRunFailure = 3 };

struct CommonOptions {
  std::vector<std::string> sets;
  std::string config_file;
  std::string calibration_file;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--set", opts.sets, "Override a config key (key=value), repeatable")
      ->type_name("KEY=VALUE");
  cmd->add_option("--config", opts.config_file, "Config file of key = value lines");
  cmd->add_option("--calibration", opts.calibration_file,
                  "Calibration file written by `calibrate`");
}

/// File layers first, then command-line assignments.
fmsm::Config overrides_from(const CommonOptions& opts) {
  fmsm::Config c;
  if (!opts.calibration_file.empty()) c.merge(fmsm::Config::load(opts.calibration_file));
  if (!opts.config_file.empty()) c.merge(fmsm::Config::load(opts.config_file));
  for (const auto& s : opts.sets) c.set_assignment(s);
  return c;
}

void write_outputs(const fmsm::ScenarioResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string id = fmsm::scenario_info(result.id).name;
  const double sign = result.config.text("report.datum") == "height" ? -1.0 : 1.0;
  fmsm::write_text((dir / (id + ".csv")).string(), fmsm::to_csv(result.record));
  fmsm::write_text((dir / (id + ".svg")).string(), fmsm::to_svg(result.record, id, sign));
  fmsm::write_text((dir / (id + ".summary.txt")).string(), fmsm::summary_text(result.summary));
}

int cmd_run(const std::string& id_text, const CommonOptions& opts, const std::string& pump,
            const std::string& out) {
  fmsm::ScenarioSpec spec;
  spec.id = fmsm::parse_scenario_id(id_text);
  spec.overrides = overrides_from(opts);
  if (!pump.empty()) spec.overrides.set("pump.mode", pump);
  spec.output_dir = out;
  const auto result = fmsm::run_scenario(spec);
  write_outputs(result, out);
  std::cout << fmsm::summary_text(result.summary);
  return kOk;
}

int cmd_verify(const CommonOptions& opts) {
  fmsm::VerifyOptions options;
  options.config = overrides_from(opts);
  const auto results = fmsm::run_verify(options);
  std::printf("%-32s %-6s %12s %12s  %s\n", "oracle", "status", "metric", "threshold", "detail");
  for (const auto& r : results) {
    const char* status = r.status == fmsm::OracleStatus::Pass   ? "PASS"
                         : r.status == fmsm::OracleStatus::Skip ? "SKIP"
                                                                : "FAIL";
    std::printf("%-32s %-6s %12.3e %12.3e  %s\n", r.name.c_str(), status, r.metric, r.threshold,
                r.detail.c_str());
  }
  const bool ok = fmsm::all_passed(results);
  std::printf("%s\n", ok ? "all oracles passed" : "oracle failures present");
  return ok ? kOk : kCheckFailed;
}

int cmd_calibrate(const CommonOptions& opts, const std::string& out) {
  fmsm::Config c = overrides_from(opts);
  c.set("magnet.sheet_current", "0");
  const auto coil = fmsm::coil_from(c);
  const auto magnet = fmsm::magnet_from(c);
  const auto circuit = fmsm::circuit_from(c);
  const auto body = fmsm::body_from(c);

  const double face = fmsm::face_field_per_ampere(magnet) * magnet.sheet_current_per_loop;
  const double L_model = fmsm::coil_self_inductance(coil);
  const double tau = circuit.tau();
  const double tau_alt = circuit.L_coil / 1.7e-6;
  const double mg = body.mass * body.g;

  std::printf("magnet\n");
  std::printf("  target face field        %.6g T\n", c.real("magnet.face_field"));
  std::printf("  reproduced face field    %.6g T\n", face);
  std::printf("  sheet current per loop   %.9g A (%d loops)\n", magnet.sheet_current_per_loop,
              magnet.sheet_loops);
  std::printf("  equivalent ampere-turns  %.6g A\n", magnet.ampere_turns());
  std::printf("  equivalent remanence     %.6g T\n", fmsm::equivalent_remanence(magnet));
  std::printf("coil\n");
  std::printf("  filament self-inductance %.6g H (lumped value %.6g H, %+.2f%%)\n", L_model,
              circuit.L_coil, 100.0 * (L_model / circuit.L_coil - 1.0));
  std::printf("  L / R                    %.6g s with R = %.6g Ohm\n", tau, circuit.R_loop);
  std::printf("  L / 1.7 uOhm             %.6g s (inconsistent with %.6g s by %+.2f%%)\n", tau_alt,
              tau, 100.0 * (tau_alt / tau - 1.0));
  std::printf("body\n");
  std::printf("  weight m g               %.6g N\n", mg);
  std::printf("  weight used              %.6g N%s\n", body.weight(),
              body.weight_override ? " (override)" : " (set body.weight_override=4.5 for 4.5 N)");

  fs::create_directories(out);
  const fs::path path = fs::path(out) / "calibration.cfg";
  std::string text = "# magnet calibration\n";
  text += "magnet.face_field = " + fmsm::format_number(c.real("magnet.face_field")) + "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", magnet.sheet_current_per_loop);
  text += std::string("magnet.sheet_current = ") + buf + "\n";
  fmsm::write_text(path.string(), text);
  std::printf("wrote %s\n", path.string().c_str());
  return kOk;
}

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

GridAxis parse_grid(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw fmsm::ConfigError("--grid expects key=a,b,c");
  GridAxis axis{text.substr(0, eq), {}};
  (void)fmsm::key_spec(axis.key);
  std::string item;
  for (char ch : text.substr(eq + 1) + ",") {
    if (ch == ',') {
      if (!item.empty()) axis.values.push_back(item);
      item.clear();
    } else {
      item += ch;
    }
  }
  if (axis.values.empty()) throw fmsm::ConfigError("--grid " + axis.key + ": no values");
  return axis;
}

int cmd_sweep(const std::string& id_text, const CommonOptions& opts,
              const std::vector<std::string>& grid_text, const std::string& out, unsigned jobs) {
  const auto id = fmsm::parse_scenario_id(id_text);
  const fmsm::Config base = overrides_from(opts);
  std::vector<GridAxis> axes;
  for (const auto& g : grid_text) axes.push_back(parse_grid(g));

  std::vector<fmsm::Config> points{base};
  for (const auto& axis : axes) {
    std::vector<fmsm::Config> next;
    for (const auto& p : points) {
      for (const auto& v : axis.values) {
        fmsm::Config c = p;
        c.set(axis.key, v);
        next.push_back(std::move(c));
      }
    }
    points = std::move(next);
  }

  const std::string name = fmsm::scenario_info(id).name;
  const std::vector<std::string> metrics = {"lifted", "fall_time", "equilibrium_gap",
                                            "in_band_fraction", "tau_fit"};
  std::vector<std::string> lines(points.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex print_mutex;
  const auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      std::string line;
      for (const auto& axis : axes) line += points[k].text(axis.key) + "\t";
      try {
        fmsm::ScenarioSpec spec;
        spec.id = id;
        spec.overrides = points[k];
        const auto result = fmsm::run_scenario(spec);
        write_outputs(result, fs::path(out) / (name + "_" + std::to_string(k)));
        for (const auto& m : metrics) {
          const auto v = result.summary_value(m);
          line += (v.empty() ? "-" : v) + "\t";
        }
        line += "ok";
      } catch (const std::exception& e) {
        ++failures;
        for (std::size_t m = 0; m < metrics.size(); ++m) line += "-\t";
        line += std::string("error: ") + e.what();
      }
      lines[k] = line;
      std::lock_guard lock(print_mutex);
      std::fprintf(stderr, "point %zu/%zu done\n", k + 1, points.size());
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string table;
  for (const auto& axis : axes) table += axis.key + "\t";
  for (const auto& m : metrics) table += m + "\t";
  table += "status\n";
  for (std::size_t k = 0; k < lines.size(); ++k) table += lines[k] + "\n";
  fs::create_directories(out);
  fmsm::write_text((fs::path(out) / (name + ".sweep.tsv")).string(), table);
  std::cout << table;
  return failures == 0 ? kOk : kRunFailure;
}

int cmd_dump_coupling(const CommonOptions& opts, const std::string& out) {
  const fmsm::Config c = overrides_from(opts);
  const auto model = fmsm::model_from(c);
  std::string text = "z[m],M_total[H],dM_dz[H/m],F_per_A[N/A]\n";
  char buf[128];
  const auto& z = model->table.z_samples();
  for (std::size_t k = 0; k < z.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g\n", z[k], model->table.mutual_values()[k],
                  model->table.gradient_values()[k],
                  -model->magnet.sheet_current_per_loop * model->table.gradient_values()[k]);
    text += buf;
  }
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    fmsm::write_text(out, text);
    std::fprintf(stderr, "wrote %zu samples to %s\n", z.size(), out.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flux-modulated superconducting maglev simulator"};
  app.require_subcommand(1);

  std::string scenarios;
  for (const auto& s : fmsm::scenario_catalog()) {
    scenarios += std::string("\n  ") + s.name + "  " + s.description;
  }

  CommonOptions run_opts, verify_opts, cal_opts, sweep_opts, dump_opts;
  std::string run_id, run_out = ".", run_pump;
  auto* run = app.add_subcommand("run", "Run one catalog scenario" + scenarios);
  run->add_option("id", run_id, "Scenario id or prefix (S1..S5, custom)")->required();
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--pump", run_pump, "Shorthand for --set pump.mode=...")
      ->check(CLI::IsMember({"off", "null", "prepump"}));
  add_common(run, run_opts);

  auto* verify = app.add_subcommand("verify", "Run the oracle suite");
  add_common(verify, verify_opts);

  std::string cal_out = ".";
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the magnet and report constants");
  calibrate->add_option("--out", cal_out, "Directory for calibration.cfg");
  add_common(calibrate, cal_opts);

  std::string sweep_id, sweep_out = "sweep";
  std::vector<std::string> grid;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
  sweep->add_option("id", sweep_id, "Scenario id")->required();
  sweep->add_option("--grid", grid, "key=a,b,c, repeatable (cartesian product)")->required();
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep->add_option("--jobs", jobs, "Worker threads");
  add_common(sweep, sweep_opts);

  std::string dump_out;
  auto* dump = app.add_subcommand("dump-coupling", "Write the M(z) coupling table as CSV");
  dump->add_option("--out", dump_out, "Output file (stdout if omitted)");
  add_common(dump, dump_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_id, run_opts, run_pump, run_out);
    if (*verify) return cmd_verify(verify_opts);
    if (*calibrate) return cmd_calibrate(cal_opts, cal_out);
    if (*sweep) return cmd_sweep(sweep_id, sweep_opts, grid, sweep_out, jobs);
    if (*dump) return cmd_dump_coupling(dump_opts, dump_out);
  } catch (const fmsm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const fmsm::CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const fmsm::UnreachableSetpoint& e) {
    std::cerr << "unreachable setpoint: " << e.what() << "\n";
    return kRunFailure;
  } catch (const fmsm::StiffnessError& e) {
    std::cerr << "integration failure: " << e.what() << "\n";
    return kRunFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunFailure;
  }
  return kOk;
}
