#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tracematch/errors.hpp"

namespace tracematch {

inline constexpr double kEarthRadiusMeters = 6371000.0;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct PlanarPoint {
  double x = 0.0;  // meters east of origin
  double y = 0.0;  // meters north of origin

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

// Equirectangular projection about (origin_lat, origin_lon).
// Adequate at country scale; error < 1% for the distances involved.
PlanarPoint project(double lat, double lon, double origin_lat,
                    double origin_lon);

// Inverse of project(); used by the synthetic generator to emit lat/lon.
void unproject(const PlanarPoint& p, double origin_lat, double origin_lon,
               double* lat, double* lon);

struct DiscretizationConfig {
  double delta_xy = 200.0;      // spatial cell edge, meters
  std::int64_t delta_t = 300;   // time bin length, seconds
  std::int64_t day_start = 0;   // epoch seconds
  std::int64_t day_length = 86400;
  PlanarPoint grid_origin{0.0, 0.0};

  // Throws ConfigError when delta_xy/delta_t are non-positive or day_length
  // is not a multiple of delta_t.
  void validate() const;

  std::int32_t num_time_bins() const {
    return static_cast<std::int32_t>(day_length / delta_t);
  }

  friend bool operator==(const DiscretizationConfig&,
                         const DiscretizationConfig&) = default;
};

struct GridCell {
  std::int32_t x = 0;
  std::int32_t y = 0;

  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

struct TimeBin {
  std::int32_t index = 0;

  friend auto operator<=>(const TimeBin&, const TimeBin&) = default;
};

// One (cell, bin) element of a discretized trace. Ordered by bin first so a
// sorted trace is also time-ordered.
struct SpatioTemporalTuple {
  GridCell cell;
  std::int32_t bin = 0;

  friend bool operator==(const SpatioTemporalTuple&,
                         const SpatioTemporalTuple&) = default;
  friend auto operator<=>(const SpatioTemporalTuple& a,
                          const SpatioTemporalTuple& b) {
    if (auto c = a.bin <=> b.bin; c != 0) return c;
    return a.cell <=> b.cell;
  }
};

struct TupleHash {
  std::size_t operator()(const SpatioTemporalTuple& t) const {
    std::uint64_t h = static_cast<std::uint32_t>(t.cell.x);
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(t.cell.y);
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(t.bin);
    h ^= h >> 32;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

struct Event {
  std::string user;
  std::int64_t timestamp = 0;  // epoch seconds, inside the day window
  PlanarPoint position;
};

GridCell discretize_space(const PlanarPoint& p,
                          const DiscretizationConfig& cfg);

// Throws DataError when ts falls outside [day_start, day_start + day_length).
TimeBin discretize_time(std::int64_t ts, const DiscretizationConfig& cfg);

// Center of a cell in planar coordinates.
PlanarPoint cell_center(const GridCell& c, const DiscretizationConfig& cfg);

// Integer ratios to_cfg/from_cfg for both dimensions. Throws ConfigError when
// the granularities are not integer multiples or the origins differ.
struct CoarseningRatio {
  std::int64_t spatial = 1;
  std::int64_t temporal = 1;
};
CoarseningRatio coarsening_ratio(const DiscretizationConfig& from_cfg,
                                 const DiscretizationConfig& to_cfg);

SpatioTemporalTuple coarsen(const SpatioTemporalTuple& t,
                            const CoarseningRatio& ratio);
SpatioTemporalTuple coarsen(const SpatioTemporalTuple& t,
                            const DiscretizationConfig& from_cfg,
                            const DiscretizationConfig& to_cfg);

// Element-wise coarsening of a sorted, deduplicated tuple set; the result is
// again sorted and deduplicated (distinct fine tuples may merge).
std::vector<SpatioTemporalTuple> coarsen_tuples(
    std::span<const SpatioTemporalTuple> tuples, const CoarseningRatio& ratio);

// Deduplicated (cell, bin) set of one user. Tuples are kept sorted.
struct MobilityTrace {
  std::string user;
  std::vector<SpatioTemporalTuple> tuples;  // sorted, unique, non-empty

  // Sorts and deduplicates; throws DataError when the tuple set is empty.
  static MobilityTrace from_tuples(std::string user,
                                   std::vector<SpatioTemporalTuple> tuples);
};

// A small set of (cell, bin) tuples of unknown ownership; k = |tuples|.
struct Leak {
  std::vector<SpatioTemporalTuple> tuples;  // sorted, unique, non-empty
  DiscretizationConfig cfg;
  // Test-only ground truth; empty when genuinely anonymous.
  std::string true_owner;

  std::size_t k() const { return tuples.size(); }

  static Leak from_tuples(std::vector<SpatioTemporalTuple> tuples,
                          const DiscretizationConfig& cfg,
                          std::string true_owner = {});
};

// Sorts in place and removes duplicates.
void normalize_tuples(std::vector<SpatioTemporalTuple>& tuples);

}  // namespace tracematch
