#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tracematch/dataset.hpp"
#include "tracematch/rng.hpp"

namespace tracematch {

// All three strategies return the exact match count; pruning and the
// inverted index are accelerators, equivalence-tested against the naive scan.
enum class MatchStrategy { kNaive, kPruned, kIndexed };

MatchStrategy parse_match_strategy(const std::string& name);
std::string to_string(MatchStrategy s);

// 1 iff every tuple of the leak appears in the trace. Throws ConfigError when
// the leak was built under a different discretization than trace_cfg.
bool match_leak(const Leak& leak, const MobilityTrace& trace,
                const DiscretizationConfig& trace_cfg);

// Number of traces in the dataset the leak matches (the anonymity set size).
std::uint32_t count_matches(const Leak& leak, const Dataset& dataset,
                            MatchStrategy strategy = MatchStrategy::kIndexed);

// Indices of all matching users, ascending.
std::vector<std::uint32_t> matching_users(const Leak& leak,
                                          const Dataset& dataset,
                                          MatchStrategy strategy);

bool is_unique(const Leak& leak, const Dataset& dataset,
               MatchStrategy strategy = MatchStrategy::kIndexed);

// k tuples drawn uniformly without replacement. Returns nullopt when the
// trace is shorter than k; the caller redraws and counts the skip.
std::optional<Leak> sample_leak(const MobilityTrace& trace,
                                const DiscretizationConfig& cfg,
                                std::size_t k, Rng& rng);

struct LeakRecord {
  std::uint32_t leak_id = 0;
  std::uint32_t owner = 0;  // index into the dataset
  std::uint32_t k = 0;
  std::uint32_t nu = 0;
  bool xi = false;
  bool owner_hit = false;
  std::vector<SpatioTemporalTuple> tuples;
};

struct RhoEstimate {
  double rho = 0.0;
  double stddev = 0.0;  // population stddev of the per-leak xi values
  std::uint64_t sample_count = 0;
};

struct MatchReport {
  DiscretizationConfig cfg;
  std::uint64_t seed = 0;
  std::size_t requested_sample_size = 0;
  std::uint64_t skipped_short_traces = 0;
  std::size_t dataset_size = 0;
  // Fig.-2-style normalization constant for nu; |D| by our convention.
  std::string nu_normalization = "dataset_size";
  std::vector<LeakRecord> records;  // ordered by leak_id
  std::map<std::uint32_t, RhoEstimate> rho_by_k;
};

struct RhoOptions {
  std::size_t k = 3;
  std::size_t sample_size = 1000;
  std::uint64_t seed = 0;
  MatchStrategy strategy = MatchStrategy::kIndexed;
  int workers = 1;
  // Variance studies may draw several leaks per sampled user.
  std::size_t leaks_per_user = 1;
};

// Samples users uniformly without replacement (skipping traces shorter
// than k), draws one leak per user, and estimates rho_k. Output is
// deterministic in (dataset, options) and independent of worker count.
MatchReport estimate_rho(const Dataset& dataset, const RhoOptions& options);

// One permutation of each sampled user's tuples; the leak with k points is
// the k-prefix, so leaks are nested across k. Only users with at least k_max
// tuples are eligible.
struct NestedLeakSample {
  std::vector<std::uint32_t> users;
  std::vector<std::vector<SpatioTemporalTuple>> permutations;
  std::uint64_t skipped_short_traces = 0;
};

NestedLeakSample sample_nested_leaks(const Dataset& dataset,
                                     std::size_t sample_size,
                                     std::uint32_t k_max, std::uint64_t seed);

// Match counts for the nested sample at one granularity: nus[i][j] is nu for
// user i's leak with k = k_list[j]. The sample's tuples must be expressed in
// the dataset's discretization (see coarsen_nested_leaks).
std::vector<std::vector<std::uint32_t>> evaluate_nested_leaks(
    const Dataset& dataset, const NestedLeakSample& sample,
    const std::vector<std::uint32_t>& k_list, MatchStrategy strategy,
    int workers);

// Element-wise coarsening of the sampled permutations; prefixes stay nested.
NestedLeakSample coarsen_nested_leaks(const NestedLeakSample& sample,
                                      const DiscretizationConfig& from_cfg,
                                      const DiscretizationConfig& to_cfg);

}  // namespace tracematch
