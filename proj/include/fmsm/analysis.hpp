#pragma once

// Post-processing of run records: decay fits, event queries, band statistics.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fmsm/errors.hpp"
#include "fmsm/sim.hpp"

namespace fmsm {

/// Least-squares fit of ln|i| = a - t / tau over rows in [t0, t1].
[[nodiscard]] inline double fit_decay_constant(const std::vector<RecordRow>& rows,
                                               double t0 = 0.0, double t1 = INFINITY) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (const auto& r : rows) {
    if (r.t < t0 || r.t > t1 || r.i_coil == 0.0) continue;
    const double y = std::log(std::abs(r.i_coil));
    n += 1;
    st += r.t;
    sy += y;
    stt += r.t * r.t;
    sty += r.t * y;
  }
  if (n < 3) throw DomainError("fit_decay_constant: fewer than three usable samples");
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  if (!(slope < 0.0)) return INFINITY;
  return -1.0 / slope;
}

[[nodiscard]] inline std::optional<SimEvent> first_event(const RunRecord& record, EventKind kind,
                                                         double after = -INFINITY) {
  for (const auto& e : record.events) {
    if (e.kind == kind && e.t > after) return e;
  }
  return std::nullopt;
}

/// Time from the first liftoff to the final capture by the table, after
/// which the magnet never lifts again. Brief touchdowns in between do not
/// count as a fall.
[[nodiscard]] inline std::optional<double> fall_time(const RunRecord& record) {
  const auto lift = first_event(record, EventKind::Liftoff);
  if (!lift) return std::nullopt;
  std::optional<double> landed;
  for (const auto& e : record.events) {
    if (e.kind == EventKind::Capture && e.t > lift->t) landed = e.t;
    if (e.kind == EventKind::Liftoff) landed.reset();
  }
  if (!landed) return std::nullopt;
  return *landed - lift->t;
}

struct BandStats {
  double first_entry = NAN;  // first recorded instant inside the band
  double duration = 0.0;     // covered span after first entry [s]
  double in_band_time = 0.0; // of which inside the band [s]
  double max_excursion = 0.0;
  [[nodiscard]] double fraction() const { return duration > 0.0 ? in_band_time / duration : 0.0; }
};

/// Band statistics of the gap against [lo, hi], measured on the record grid
/// from the first in-band row onward.
[[nodiscard]] inline BandStats band_stats(const std::vector<RecordRow>& rows, double lo, double hi) {
  BandStats stats;
  const RecordRow* prev = nullptr;
  for (const auto& r : rows) {
    const bool inside = r.z >= lo && r.z <= hi;
    if (std::isnan(stats.first_entry)) {
      if (inside) {
        stats.first_entry = r.t;
        prev = &r;
      }
      continue;
    }
    const double dt = r.t - prev->t;
    stats.duration += dt;
    if (inside) stats.in_band_time += dt;
    const double excursion = r.z < lo ? lo - r.z : (r.z > hi ? r.z - hi : 0.0);
    stats.max_excursion = std::max(stats.max_excursion, excursion);
    prev = &r;
  }
  return stats;
}

/// Mean gap of free rows in [t0, t1].
[[nodiscard]] inline std::optional<double> mean_free_gap(const std::vector<RecordRow>& rows,
                                                         double t0, double t1) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : rows) {
    if (r.t < t0 || r.t > t1 || r.contact_flag != 0) continue;
    sum += r.z;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

}  // namespace fmsm
