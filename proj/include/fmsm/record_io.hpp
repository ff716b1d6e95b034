#pragma once

// Run record serialization: CSV (9 significant digits, '#' metadata lines,
// one units header), a two-panel SVG plot and the plain-text summary.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fmsm/errors.hpp"
#include "fmsm/sim.hpp"

namespace fmsm {

inline constexpr const char* kCsvHeader =
    "t[s],z[m],z_dot[m/s],i_coil[A],i_transport[A],phi_pumped[Wb],B_center[T],F_em[N],"
    "contact_flag[-],cmd[-]";

namespace detail {

inline void append_g9(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, sep)) fields.push_back(item);
  return fields;
}

}  // namespace detail

/// Values rounded to what the CSV stores, so written and re-read records
/// compare exactly.
[[nodiscard]] inline double round_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

[[nodiscard]] inline std::string to_csv(const RunRecord& record) {
  std::string out = "# fmsm run record\n";
  for (const auto& [k, v] : record.metadata) out += "# " + k + " = " + v + "\n";
  out += kCsvHeader;
  out += '\n';
  for (const auto& r : record.rows) {
    const double values[] = {r.t, r.z, r.z_dot, r.i_coil, r.i_transport, r.phi_pumped, r.B_center,
                             r.F_em};
    for (double v : values) {
      detail::append_g9(out, v);
      out += ',';
    }
    out += std::to_string(r.contact_flag);
    out += ',';
    out += std::to_string(r.cmd);
    out += '\n';
  }
  return out;
}

[[nodiscard]] inline RunRecord from_csv(const std::string& text) {
  RunRecord record;
  std::stringstream ss(text);
  std::string line;
  bool header_seen = false;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos && line.size() > 2) {
        record.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 3));
      }
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw ConfigError("csv: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 10) {
      throw ConfigError("csv line " + std::to_string(number) + ": expected 10 fields");
    }
    RecordRow r{};
    double* targets[] = {&r.t, &r.z, &r.z_dot, &r.i_coil, &r.i_transport, &r.phi_pumped,
                         &r.B_center, &r.F_em};
    for (std::size_t k = 0; k < 8; ++k) *targets[k] = std::strtod(f[k].c_str(), nullptr);
    r.contact_flag = std::stoi(f[8]);
    r.cmd = std::stoi(f[9]);
    record.rows.push_back(r);
  }
  if (!header_seen) throw ConfigError("csv: missing header");
  return record;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

[[nodiscard]] inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

[[nodiscard]] inline std::string summary_text(
    const std::vector<std::pair<std::string, std::string>>& summary) {
  std::string out;
  for (const auto& [k, v] : summary) out += k + " = " + v + "\n";
  return out;
}

/// Two stacked panels: gap (or height) versus time and coil current versus
/// time. `height_sign` is -1 to plot heights as negative gaps.
[[nodiscard]] inline std::string to_svg(const RunRecord& record, const std::string& title,
                                        double height_sign = 1.0) {
  constexpr double width = 800, panel = 260, margin_left = 80, margin_top = 40, spacing = 60;
  constexpr double plot_w = width - margin_left - 30;
  const double total_h = margin_top + 2 * panel + spacing + 50;
  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "font-family=\"sans-serif\" font-size=\"12\">\n",
                width, total_h);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(static_cast<int>(width / 2)) +
         "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
  if (record.rows.empty()) {
    svg += "</svg>\n";
    return svg;
  }
  const double t0 = record.rows.front().t;
  const double t1 = std::max(record.rows.back().t, t0 + 1e-9);

  struct Series {
    const char* label;
    double scale;
    double (*get)(const RecordRow&);
  };
  const Series series[] = {
      {height_sign < 0 ? "height [mm]" : "gap [mm]", 1e3 * height_sign,
       [](const RecordRow& r) { return r.z; }},
      {"i_coil [A]", 1.0, [](const RecordRow& r) { return r.i_coil; }},
  };
  for (int p = 0; p < 2; ++p) {
    const auto& s = series[p];
    const double top = margin_top + p * (panel + spacing);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& r : record.rows) {
      const double v = s.get(r) * s.scale;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const auto px = [&](double t) { return margin_left + plot_w * (t - t0) / (t1 - t0); };
    const auto py = [&](double v) { return top + panel * (hi - v) / (hi - lo); };
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                  "stroke=\"black\"/>\n",
                  margin_left, top, plot_w, panel);
    svg += buf;
    for (int k = 0; k <= 4; ++k) {
      const double v = lo + (hi - lo) * k / 4.0;
      std::snprintf(buf, sizeof buf,
                    "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.4g</text>\n",
                    margin_left - 6, py(v) + 4, v);
      svg += buf;
      const double t = t0 + (t1 - t0) * k / 4.0;
      std::snprintf(buf, sizeof buf,
                    "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.4g</text>\n", px(t),
                    top + panel + 16, t);
      svg += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"16\" y=\"%.1f\" transform=\"rotate(-90 16 %.1f)\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  top + panel / 2, top + panel / 2, s.label);
    svg += buf;
    svg += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.2\" points=\"";
    // Decimate to about two points per horizontal pixel.
    const std::size_t stride = std::max<std::size_t>(1, record.rows.size() / (2 * 720));
    for (std::size_t k = 0; k < record.rows.size(); k += stride) {
      const auto& r = record.rows[k];
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(r.t), py(s.get(r) * s.scale));
      svg += buf;
    }
    svg += "\"/>\n";
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">t [s]</text>\n",
                margin_left + plot_w / 2, total_h - 8);
  svg += buf;
  svg += "</svg>\n";
  return svg;
}

}  // namespace fmsm
