#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tracematch/dataset.hpp"
#include "tracematch/matcher.hpp"

namespace tracematch {

struct MobilityStats {
  std::uint64_t num_events = 0;            // tuples in the trace
  std::uint64_t num_unique_locations = 0;  // distinct cells
  double bbox_area_km2 = 0.0;
  double dist_per_slot_km = 0.0;  // mean intra-slot path length, active slots
  double total_distance_km = 0.0;
  double temporal_entropy_bits = 0.0;
  double spatial_entropy_bits = 0.0;
};

// Tuples are walked in (bin, cell) order; distances are Euclidean between
// consecutive cell centers.
MobilityStats mobility_stats(const MobilityTrace& trace,
                             const DiscretizationConfig& cfg);

// Per-popularity-bin profile of which locations drive unique matches.
// Locations are ranked by daily event count descending and split into
// `bins` equal-size groups; each group's value is the fraction of its leak
// appearances that belonged to uniquely-matching leaks, rescaled so the
// profile sums to 1. Empty (all-zero) when no leak matched uniquely.
std::vector<double> popularity_profile(const Dataset& dataset,
                                       const MatchReport& report,
                                       std::size_t bins = 100);

// Normalized histogram over time bins of the tuples of uniquely-matching
// leaks; sums to 1, empty when no leak matched uniquely.
std::vector<double> time_of_day_profile(const MatchReport& report,
                                        const DiscretizationConfig& cfg);

struct CohortSummary {
  std::size_t count = 0;
  MobilityStats mean;
  MobilityStats stddev;
};

struct CohortReport {
  // Users whose leaks matched uniquely every time vs. almost never (< 0.01).
  CohortSummary always_unique;
  CohortSummary rarely_unique;
  std::size_t sampled_users = 0;
  std::uint32_t k = 0;
  std::uint32_t repeat = 0;
};

struct CohortOptions {
  std::uint32_t k = 3;
  std::uint32_t repeat = 20;  // independent leak draws per user
  std::size_t sample_size = 1000;
  std::uint64_t seed = 0;
  MatchStrategy strategy = MatchStrategy::kIndexed;
  int workers = 1;
};

// Partitions sampled users by empirical unique-match probability and
// summarizes their mobility characteristics. Invariant to enumeration order.
CohortReport cohort_compare(const Dataset& dataset,
                            const CohortOptions& options);

struct SweepOptions {
  std::vector<std::uint32_t> k_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::int64_t> delta_t_list;   // seconds, ascending chain
  std::vector<double> delta_xy_list;        // meters, ascending chain
  std::size_t sample_size = 1000;
  std::uint64_t seed = 0;
  MatchStrategy strategy = MatchStrategy::kIndexed;
  int workers = 1;
  bool keep_detail = false;  // retain per-leak match counts
};

struct SweepGrid {
  std::vector<std::int64_t> delta_t_axis;
  std::vector<double> delta_xy_axis;
  std::vector<std::uint32_t> k_list;
  // rho[it][ix][ik]
  std::vector<std::vector<std::vector<double>>> rho;
  // nu_detail[it][ix][sample][ik]; empty unless keep_detail
  std::vector<std::vector<std::vector<std::vector<std::uint32_t>>>> nu_detail;
  std::vector<std::uint32_t> sampled_users;
  std::uint64_t skipped_short_traces = 0;
};

// Obfuscation sweep over the granularity ladders. The corpus is the finest
// dataset coarsened per grid point; one nested leak sample is reused across
// all points so per-leak match counts are comparable. Each list must form an
// integer-ratio chain starting at the finest dataset's granularity.
SweepGrid sweep(const Dataset& finest, const SweepOptions& options);

}  // namespace tracematch
