#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tracematch/dataset.hpp"
#include "tracematch/ingest.hpp"

namespace tracematch {

// lat/lon reference used when synthetic corpora are exported as raw events.
inline constexpr double kSyntheticOriginLat = 46.0;
inline constexpr double kSyntheticOriginLon = 8.0;

// Anchor-plus-Zipf-exploration population model with diurnal event times.
// Defaults are tuned so corpus aggregates land near the calibration targets
// (hundreds of events and ~15 unique locations per user per day).
struct SyntheticPopulationConfig {
  std::uint64_t num_users = 10000;
  std::uint64_t num_sites = 20000;
  double zipf_exponent = 1.1;  // global site popularity
  std::uint32_t anchors_per_user = 2;  // home/work
  double events_per_user_mean = 279.0;
  // Negative-binomial shape; smaller = heavier tail. The default matches a
  // stddev of roughly 500 at the default mean.
  double events_per_user_dispersion = 0.3;
  std::array<double, 24> diurnal_weights = {
      0.3, 0.15, 0.1, 0.1, 0.15, 0.4, 1.0, 2.0, 3.0, 3.5, 3.5, 3.5,
      3.5, 3.5, 3.5, 3.5, 3.5, 3.2, 2.8, 2.2, 1.6, 1.1, 0.7, 0.45};
  double travel_radius_m = 20000.0;  // exploration distance around home
  // Mean personal site pool size (anchors included); drives unique
  // locations per user.
  double pool_size_mean = 24.0;
  // Probability that an event happens at an anchor rather than an
  // exploration site.
  double anchor_affinity = 0.55;
  // Side of the square region sites are placed in; 0 derives it from
  // num_sites at roughly two sites per km^2.
  double region_side_m = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  double effective_region_side() const;
};

// Deterministic in (cfg, dcfg); parallel generation uses per-user derived
// RNG streams so worker count never changes the output. When events_out is
// non-null the underlying raw events are also returned (lat/lon relative to
// the synthetic origin).
Dataset generate_synthetic(const SyntheticPopulationConfig& cfg,
                           const DiscretizationConfig& dcfg,
                           int workers = 1,
                           std::vector<RawEventRecord>* events_out = nullptr);

}  // namespace tracematch
