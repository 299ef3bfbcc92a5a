#include "tracematch/core.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace tracematch {

PlanarPoint project(double lat, double lon, double origin_lat,
                    double origin_lon) {
  if (std::abs(lat) > 90.0 || std::abs(lon) > 180.0 ||
      std::abs(origin_lat) > 90.0 || std::abs(origin_lon) > 180.0) {
    throw DataError(fmt::format(
        "coordinates out of range: lat={} lon={} origin=({}, {})", lat, lon,
        origin_lat, origin_lon));
  }
  const double rad = kPi / 180.0;
  return PlanarPoint{
      kEarthRadiusMeters * std::cos(origin_lat * rad) * (lon - origin_lon) *
          rad,
      kEarthRadiusMeters * (lat - origin_lat) * rad};
}

void unproject(const PlanarPoint& p, double origin_lat, double origin_lon,
               double* lat, double* lon) {
  const double rad = kPi / 180.0;
  *lat = origin_lat + p.y / kEarthRadiusMeters / rad;
  *lon = origin_lon + p.x / (kEarthRadiusMeters * std::cos(origin_lat * rad)) /
                          rad;
}

void DiscretizationConfig::validate() const {
  if (!(delta_xy > 0.0)) {
    throw ConfigError(fmt::format("delta_xy must be positive, got {}", delta_xy));
  }
  if (delta_t <= 0) {
    throw ConfigError(fmt::format("delta_t must be positive, got {}", delta_t));
  }
  if (day_length <= 0 || day_length % delta_t != 0) {
    throw ConfigError(
        fmt::format("day_length ({}) must be a positive multiple of delta_t ({})",
                    day_length, delta_t));
  }
}

GridCell discretize_space(const PlanarPoint& p,
                          const DiscretizationConfig& cfg) {
  return GridCell{
      static_cast<std::int32_t>(
          std::floor((p.x - cfg.grid_origin.x) / cfg.delta_xy)),
      static_cast<std::int32_t>(
          std::floor((p.y - cfg.grid_origin.y) / cfg.delta_xy))};
}

TimeBin discretize_time(std::int64_t ts, const DiscretizationConfig& cfg) {
  if (ts < cfg.day_start || ts >= cfg.day_start + cfg.day_length) {
    throw DataError(fmt::format(
        "timestamp {} outside day window [{}, {})", ts, cfg.day_start,
        cfg.day_start + cfg.day_length));
  }
  return TimeBin{static_cast<std::int32_t>((ts - cfg.day_start) / cfg.delta_t)};
}

PlanarPoint cell_center(const GridCell& c, const DiscretizationConfig& cfg) {
  return PlanarPoint{cfg.grid_origin.x + (c.x + 0.5) * cfg.delta_xy,
                     cfg.grid_origin.y + (c.y + 0.5) * cfg.delta_xy};
}

CoarseningRatio coarsening_ratio(const DiscretizationConfig& from_cfg,
                                 const DiscretizationConfig& to_cfg) {
  from_cfg.validate();
  to_cfg.validate();
  if (from_cfg.grid_origin != to_cfg.grid_origin ||
      from_cfg.day_start != to_cfg.day_start ||
      from_cfg.day_length != to_cfg.day_length) {
    throw ConfigError("coarsening requires a shared origin and day window");
  }
  const double s = to_cfg.delta_xy / from_cfg.delta_xy;
  const auto spatial = static_cast<std::int64_t>(std::llround(s));
  // delta_xy values come from km-scale config; tolerate rounding in the
  // ratio, not in the grid itself.
  if (spatial < 1 || std::abs(s - static_cast<double>(spatial)) > 1e-9 * s) {
    throw ConfigError(fmt::format(
        "target delta_xy {} is not an integer multiple of source {}",
        to_cfg.delta_xy, from_cfg.delta_xy));
  }
  if (to_cfg.delta_t % from_cfg.delta_t != 0) {
    throw ConfigError(fmt::format(
        "target delta_t {} is not an integer multiple of source {}",
        to_cfg.delta_t, from_cfg.delta_t));
  }
  return CoarseningRatio{spatial, to_cfg.delta_t / from_cfg.delta_t};
}

namespace {

std::int32_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return static_cast<std::int32_t>(q);
}

}  // namespace

SpatioTemporalTuple coarsen(const SpatioTemporalTuple& t,
                            const CoarseningRatio& ratio) {
  return SpatioTemporalTuple{GridCell{floor_div(t.cell.x, ratio.spatial),
                                      floor_div(t.cell.y, ratio.spatial)},
                             floor_div(t.bin, ratio.temporal)};
}

SpatioTemporalTuple coarsen(const SpatioTemporalTuple& t,
                            const DiscretizationConfig& from_cfg,
                            const DiscretizationConfig& to_cfg) {
  return coarsen(t, coarsening_ratio(from_cfg, to_cfg));
}

std::vector<SpatioTemporalTuple> coarsen_tuples(
    std::span<const SpatioTemporalTuple> tuples,
    const CoarseningRatio& ratio) {
  std::vector<SpatioTemporalTuple> out;
  out.reserve(tuples.size());
  for (const auto& t : tuples) out.push_back(coarsen(t, ratio));
  normalize_tuples(out);
  return out;
}

void normalize_tuples(std::vector<SpatioTemporalTuple>& tuples) {
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
}

MobilityTrace MobilityTrace::from_tuples(
    std::string user, std::vector<SpatioTemporalTuple> tuples) {
  normalize_tuples(tuples);
  if (tuples.empty()) {
    throw DataError(fmt::format("trace for user '{}' is empty", user));
  }
  return MobilityTrace{std::move(user), std::move(tuples)};
}

Leak Leak::from_tuples(std::vector<SpatioTemporalTuple> tuples,
                       const DiscretizationConfig& cfg,
                       std::string true_owner) {
  normalize_tuples(tuples);
  if (tuples.empty()) throw DataError("leak has no tuples");
  return Leak{std::move(tuples), cfg, std::move(true_owner)};
}

}  // namespace tracematch
