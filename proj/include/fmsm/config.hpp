#pragma once

// Flat "key = value" configuration with dotted keys and a fixed schema.
// Lengths in metres, times in seconds, SI throughout.

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fmsm/errors.hpp"

namespace fmsm {

enum class ValueType { Real, OptionalReal, Integer, Choice, PairList };

struct KeySpec {
  std::string name;
  ValueType type;
  std::string default_value;
  std::string doc;
  std::vector<std::string> choices{};
};

// clang-format off
inline const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = {
    {"coil.inner_radius", ValueType::Real, "0.030", "winding inner radius [m]"},
    {"coil.outer_radius", ValueType::Real, "0.032645", "winding outer radius [m]"},
    {"coil.turns", ValueType::Integer, "120", "total turns"},
    {"coil.pancakes", ValueType::Integer, "2", "pancake count"},
    {"coil.tape_width", ValueType::Real, "0.004", "tape width [m]"},
    {"coil.pancake_gap", ValueType::Real, "0.0005", "axial gap between pancakes [m]"},
    {"coil.strand_radius", ValueType::Real, "0.00178", "effective strand radius for self-inductance [m]"},
    {"magnet.radius", ValueType::Real, "0.025", "[m]"},
    {"magnet.height", ValueType::Real, "0.030", "[m]"},
    {"magnet.sheet_loops", ValueType::Integer, "30", "equivalent sheet loop count"},
    {"magnet.face_field", ValueType::Real, "0.3137", "on-axis top-face field used for calibration [T]"},
    {"magnet.sheet_current", ValueType::Real, "0", "sheet current per loop [A]; 0 = calibrate from face_field"},
    {"body.mass", ValueType::Real, "0.450", "[kg]"},
    {"body.g", ValueType::Real, "9.81", "[m/s^2]"},
    {"body.damping", ValueType::Real, "0.5", "viscous damping [N s/m]"},
    {"body.weight_override", ValueType::OptionalReal, "none", "weight [N] replacing m g"},
    {"circuit.L", ValueType::Real, "0.00135", "coil inductance [H]"},
    {"circuit.R", ValueType::Real, "1.5697674418604651e-06", "loop resistance [Ohm] (L / 860 s)"},
    {"circuit.Ec", ValueType::Real, "1e-4", "critical field criterion [V/m]"},
    {"circuit.l", ValueType::Real, "0.10", "bridge length [m]"},
    {"circuit.Ic_bridge", ValueType::Real, "413", "bridge critical current [A]"},
    {"circuit.n", ValueType::Real, "25", "power-law n-value"},
    {"circuit.Ic_coil", ValueType::Real, "53.9", "coil critical current, monitoring only [A]"},
    {"pump.mode", ValueType::Choice, "null", "ZFC pump variant", {"off", "null", "prepump"}},
    {"pump.r", ValueType::Real, "1.2", "pulse bridge current / Ic_bridge"},
    {"pump.pulse_width", ValueType::Real, "0.1", "[s]"},
    {"pump.period", ValueType::Real, "0.5", "[s]"},
    {"pump.null_gain", ValueType::Real, "1.0", "nulling gain [1/A]"},
    {"pump.null_tol", ValueType::Real, "0.05", "nulling termination tolerance [A]"},
    {"controller.mode", ValueType::Choice, "off", "supervisor", {"off", "hold", "program", "zfc"}},
    {"controller.delta_h", ValueType::Real, "0.0005", "trigger half-band [m]"},
    {"controller.inner_fraction", ValueType::Real, "0.5", "re-entry band as a fraction of delta_h"},
    {"controller.sample_period", ValueType::Real, "0.05", "[s]"},
    {"controller.h0", ValueType::Real, "0.0185", "height-hold target gap [m]"},
    {"controller.program", ValueType::PairList, "0.025:200,0.021:200,0.017:200,0.021:200,0.025:200", "gap[m]:hold[s] list"},
    {"controller.capture_dwell", ValueType::Real, "1.0", "[s]"},
    {"controller.timeout", ValueType::Real, "300", "per-setpoint capture timeout [s]"},
    {"controller.filter_time", ValueType::Real, "0.5", "gap sensor low-pass time constant [s], 0 = raw"},
    {"table.profile", ValueType::Choice, "lower", "table motion", {"lower", "cycle", "static"}},
    {"table.schedule", ValueType::PairList, "", "explicit t[s]:gap[m] waypoints; overrides profile"},
    {"table.max_speed", ValueType::Real, "0.0005", "[m/s]"},
    {"scenario.init", ValueType::Choice, "fc", "initial coil state", {"fc", "zfc", "current"}},
    {"scenario.z_start", ValueType::Real, "0.013", "initial table gap [m]"},
    {"scenario.z_park", ValueType::Real, "0.045", "table park gap for profile=lower [m]"},
    {"scenario.z_hold", ValueType::Real, "0.014", "near gap for profile=cycle [m]"},
    {"scenario.hold_time", ValueType::Real, "150", "dwell at z_hold [s]"},
    {"scenario.i0", ValueType::Real, "10", "initial coil current for init=current [A]"},
    {"sim.rel_tol", ValueType::Real, "1e-7", "integrator relative tolerance"},
    {"sim.abs_tol_z", ValueType::Real, "1e-10", "[m]"},
    {"sim.abs_tol_zdot", ValueType::Real, "1e-9", "[m/s]"},
    {"sim.abs_tol_flux", ValueType::Real, "1e-12", "[Wb]"},
    {"sim.max_step", ValueType::Real, "0.01", "[s]"},
    {"sim.event_tol", ValueType::Real, "1e-6", "[s]"},
    {"sim.t_end", ValueType::Real, "100", "[s]"},
    {"sim.record_period", ValueType::Real, "0.1", "[s]"},
    {"coupling.z_max", ValueType::Real, "0.25", "coupling table extent [m]"},
    {"coupling.step", ValueType::Real, "0.0005", "coupling table spacing [m]"},
    {"report.datum", ValueType::Choice, "gap", "height display: gap or negative gap", {"gap", "height"}},
  };
  return schema;
}
// clang-format on

[[nodiscard]] inline const KeySpec& key_spec(std::string_view key) {
  for (const auto& spec : config_schema()) {
    if (spec.name == key) return spec;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::optional<double> parse_real(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

inline std::vector<std::pair<double, double>> parse_pairs(std::string_view text,
                                                          std::string_view key) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(std::string(key) + ": expected a:b pairs, got '" + item + "'");
    }
    const auto a = parse_real(std::string_view(item).substr(0, colon));
    const auto b = parse_real(std::string_view(item).substr(colon + 1));
    if (!a || !b) throw ConfigError(std::string(key) + ": bad number in '" + item + "'");
    out.emplace_back(*a, *b);
  }
  return out;
}

inline void check_value(const KeySpec& spec, const std::string& value) {
  switch (spec.type) {
    case ValueType::Real:
      if (!parse_real(value)) throw ConfigError(spec.name + ": expected a number, got '" + value + "'");
      break;
    case ValueType::OptionalReal:
      if (value != "none" && !parse_real(value)) {
        throw ConfigError(spec.name + ": expected a number or 'none', got '" + value + "'");
      }
      break;
    case ValueType::Integer: {
      const auto v = parse_real(value);
      if (!v || *v != static_cast<double>(static_cast<long long>(*v))) {
        throw ConfigError(spec.name + ": expected an integer, got '" + value + "'");
      }
      break;
    }
    case ValueType::Choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        std::string allowed;
        for (const auto& c : spec.choices) allowed += (allowed.empty() ? "" : "|") + c;
        throw ConfigError(spec.name + ": expected one of " + allowed + ", got '" + value + "'");
      }
      break;
    case ValueType::PairList:
      (void)parse_pairs(value, spec.name);
      break;
  }
}

}  // namespace detail

/// Values layered over the schema defaults. Later set() calls win.
class Config {
 public:
  void set(const std::string& key, const std::string& raw_value) {
    const auto& spec = key_spec(key);
    const std::string value = detail::trim(raw_value);
    detail::check_value(spec, value);
    values_[key] = value;
  }

  /// "key=value" as given on the command line.
  void set_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
    }
    set(detail::trim(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
  }

  void merge(const Config& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
  }

  [[nodiscard]] bool overridden(const std::string& key) const {
    (void)key_spec(key);
    return values_.count(key) != 0;
  }

  [[nodiscard]] std::string text(const std::string& key) const {
    const auto& spec = key_spec(key);
    const auto it = values_.find(key);
    return it != values_.end() ? it->second : spec.default_value;
  }

  [[nodiscard]] double real(const std::string& key) const {
    const auto v = detail::parse_real(text(key));
    if (!v) throw ConfigError(key + ": not a number");
    return *v;
  }

  [[nodiscard]] std::optional<double> optional_real(const std::string& key) const {
    const auto s = text(key);
    if (s == "none") return std::nullopt;
    return real(key);
  }

  [[nodiscard]] int integer(const std::string& key) const {
    return static_cast<int>(std::llround(real(key)));
  }

  [[nodiscard]] std::vector<std::pair<double, double>> pairs(const std::string& key) const {
    return detail::parse_pairs(text(key), key);
  }

  [[nodiscard]] const std::map<std::string, std::string>& overrides() const { return values_; }

  /// Every schema key with its effective value, in schema order.
  [[nodiscard]] std::string canonical() const {
    std::string out;
    for (const auto& spec : config_schema()) {
      out += spec.name + " = " + text(spec.name) + "\n";
    }
    return out;
  }

  /// FNV-1a 64 of the canonical text.
  [[nodiscard]] std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  /// Parse "key = value" lines; '#' starts a comment.
  static Config parse(std::string_view text) {
    Config config;
    std::stringstream ss{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(ss, line)) {
      ++number;
      const auto hash_pos = line.find('#');
      if (hash_pos != std::string::npos) line.erase(hash_pos);
      line = detail::trim(line);
      if (line.empty()) continue;
      try {
        config.set_assignment(line);
      } catch (const ConfigError& e) {
        throw ConfigError("line " + std::to_string(number) + ": " + e.what());
      }
    }
    return config;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace fmsm
