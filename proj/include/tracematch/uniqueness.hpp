#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tracematch/dataset.hpp"

namespace tracematch {

// Strict matching is the leak relation applied to whole traces (directional
// subset); relaxed matching tolerates sparsity and density per time bin.
// They bound trace uniqueness from above and below respectively.
enum class TraceMatchMode { kStrict, kRelaxed };

TraceMatchMode parse_trace_match_mode(const std::string& name);
std::string to_string(TraceMatchMode m);

// 1 iff every tuple of a appears in b (asymmetric).
bool strict_trace_match(const MobilityTrace& a, const MobilityTrace& b);
bool strict_trace_match(const MobilityTrace& a,
                        const DiscretizationConfig& cfg_a,
                        const MobilityTrace& b,
                        const DiscretizationConfig& cfg_b);

// 1 iff for every time bin the two traces either share a cell or at least one
// of them has no events there (symmetric).
bool relaxed_trace_match(const MobilityTrace& a, const MobilityTrace& b);
bool relaxed_trace_match(const MobilityTrace& a,
                         const DiscretizationConfig& cfg_a,
                         const MobilityTrace& b,
                         const DiscretizationConfig& cfg_b);

struct UniquenessOptions {
  TraceMatchMode mode = TraceMatchMode::kStrict;
  double r = 0.5;  // bounding-box overlap prefilter threshold
  // Disables the r prefilter; every pair is compared (oracle runs).
  bool exhaustive = false;
  // Strict mode only: require mutual subset (set equality) instead of the
  // directional relation.
  bool mutual_equality = false;
  std::size_t sample_size = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct UniquenessRecord {
  std::uint32_t user = 0;
  std::uint32_t match_count = 0;  // includes the self match, so >= 1
  std::uint64_t skipped_by_prefilter = 0;
};

struct UniquenessReport {
  DiscretizationConfig cfg;
  TraceMatchMode mode = TraceMatchMode::kStrict;
  double r = 0.5;
  bool exhaustive = false;
  bool mutual_equality = false;
  std::uint64_t seed = 0;
  std::size_t requested_sample_size = 0;
  std::vector<UniquenessRecord> records;
  double probability_unique = 0.0;
  std::uint64_t total_skipped_by_prefilter = 0;
};

// Samples traces uniformly and counts their matches over the whole corpus,
// restricted to candidates whose bounding-box overlap exceeds r (unless
// exhaustive). The r prefilter is a heuristic: skipped comparisons are
// reported, not assumed to be non-matches.
UniquenessReport estimate_trace_uniqueness(const Dataset& dataset,
                                           const UniquenessOptions& options);

}  // namespace tracematch
