#include "tracematch/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "tracematch/parallel.hpp"

namespace tracematch {

MatchStrategy parse_match_strategy(const std::string& name) {
  if (name == "naive") return MatchStrategy::kNaive;
  if (name == "pruned") return MatchStrategy::kPruned;
  if (name == "indexed") return MatchStrategy::kIndexed;
  throw ConfigError(fmt::format("unknown match strategy '{}'", name));
}

std::string to_string(MatchStrategy s) {
  switch (s) {
    case MatchStrategy::kNaive:
      return "naive";
    case MatchStrategy::kPruned:
      return "pruned";
    case MatchStrategy::kIndexed:
      return "indexed";
  }
  return "?";
}

namespace {

void check_cfg(const Leak& leak, const DiscretizationConfig& cfg) {
  if (leak.cfg != cfg) {
    throw ConfigError("leak and trace use different discretizations");
  }
}

bool is_subset(std::span<const SpatioTemporalTuple> small,
               std::span<const SpatioTemporalTuple> large) {
  return std::includes(large.begin(), large.end(), small.begin(), small.end());
}

// Smallest posting list first, then filter by the rest.
std::vector<std::uint32_t> intersect_postings(const Leak& leak,
                                              const Dataset& dataset) {
  std::vector<std::span<const std::uint32_t>> lists;
  lists.reserve(leak.tuples.size());
  for (const auto& t : leak.tuples) {
    auto p = dataset.postings(t);
    if (p.empty()) return {};
    lists.push_back(p);
  }
  std::sort(lists.begin(), lists.end(),
            [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::vector<std::uint32_t> result(lists[0].begin(), lists[0].end());
  for (std::size_t i = 1; i < lists.size() && !result.empty(); ++i) {
    std::vector<std::uint32_t> next;
    next.reserve(result.size());
    std::set_intersection(result.begin(), result.end(), lists[i].begin(),
                          lists[i].end(), std::back_inserter(next));
    result = std::move(next);
  }
  return result;
}

}  // namespace

bool match_leak(const Leak& leak, const MobilityTrace& trace,
                const DiscretizationConfig& trace_cfg) {
  check_cfg(leak, trace_cfg);
  return is_subset(leak.tuples, trace.tuples);
}

std::vector<std::uint32_t> matching_users(const Leak& leak,
                                          const Dataset& dataset,
                                          MatchStrategy strategy) {
  check_cfg(leak, dataset.cfg());
  if (strategy == MatchStrategy::kIndexed) {
    return intersect_postings(leak, dataset);
  }
  std::vector<std::uint32_t> result;
  BoundingBox leak_box;
  if (strategy == MatchStrategy::kPruned) {
    leak_box = bounding_box(leak.tuples, dataset.cfg());
  }
  for (std::uint32_t u = 0; u < dataset.size(); ++u) {
    if (strategy == MatchStrategy::kPruned &&
        overlap(leak_box, dataset.box(u)) == 0.0) {
      continue;  // disjoint boxes cannot contain the leak
    }
    if (is_subset(leak.tuples, dataset.trace(u).tuples)) result.push_back(u);
  }
  return result;
}

std::uint32_t count_matches(const Leak& leak, const Dataset& dataset,
                            MatchStrategy strategy) {
  return static_cast<std::uint32_t>(
      matching_users(leak, dataset, strategy).size());
}

bool is_unique(const Leak& leak, const Dataset& dataset,
               MatchStrategy strategy) {
  return count_matches(leak, dataset, strategy) == 1;
}

std::optional<Leak> sample_leak(const MobilityTrace& trace,
                                const DiscretizationConfig& cfg,
                                std::size_t k, Rng& rng) {
  if (k == 0) throw ConfigError("leak size k must be at least 1");
  if (k > trace.tuples.size()) return std::nullopt;
  std::vector<SpatioTemporalTuple> tuples;
  tuples.reserve(k);
  for (const std::uint64_t i : rng.sample_indices(trace.tuples.size(), k)) {
    tuples.push_back(trace.tuples[i]);
  }
  return Leak::from_tuples(std::move(tuples), cfg, trace.user);
}

namespace {

RhoEstimate summarize_xi(std::uint64_t unique_count, std::uint64_t n) {
  RhoEstimate e;
  e.sample_count = n;
  if (n == 0) return e;
  e.rho = static_cast<double>(unique_count) / static_cast<double>(n);
  e.stddev = std::sqrt(e.rho * (1.0 - e.rho));
  return e;
}

}  // namespace

MatchReport estimate_rho(const Dataset& dataset, const RhoOptions& options) {
  if (options.sample_size < 1) throw ConfigError("sample_size must be >= 1");
  if (options.k < 1) throw ConfigError("k must be >= 1");
  if (options.leaks_per_user < 1) {
    throw ConfigError("leaks_per_user must be >= 1");
  }

  MatchReport report;
  report.cfg = dataset.cfg();
  report.seed = options.seed;
  report.requested_sample_size = options.sample_size;
  report.dataset_size = dataset.size();

  // Uniform order over all users; short traces are skipped and counted.
  Rng order_rng(derive_seed(options.seed, 0));
  const auto order = order_rng.sample_indices(dataset.size(), dataset.size());
  std::vector<std::uint32_t> selected;
  selected.reserve(options.sample_size);
  for (const std::uint64_t u : order) {
    if (selected.size() == options.sample_size) break;
    if (dataset.trace(u).tuples.size() < options.k) {
      ++report.skipped_short_traces;
      continue;
    }
    selected.push_back(static_cast<std::uint32_t>(u));
  }

  const std::size_t total = selected.size() * options.leaks_per_user;
  report.records.resize(total);
  parallel_for(total, options.workers, [&](std::size_t i) {
    const std::uint32_t owner = selected[i / options.leaks_per_user];
    const std::uint64_t draw = i % options.leaks_per_user;
    // Draw 0 shares the stream used by sample_nested_leaks so a one-point
    // sweep reproduces estimate_rho exactly.
    const std::uint64_t seed_u = derive_seed(options.seed, owner + 1);
    Rng rng(draw == 0 ? seed_u : derive_seed(seed_u, draw));
    auto leak =
        sample_leak(dataset.trace(owner), dataset.cfg(), options.k, rng);
    // Eligibility was checked at selection time.
    if (!leak) throw InvariantError("eligible trace failed to yield a leak");
    LeakRecord& rec = report.records[i];
    rec.leak_id = static_cast<std::uint32_t>(i);
    rec.owner = owner;
    rec.k = static_cast<std::uint32_t>(options.k);
    rec.nu = count_matches(*leak, dataset, options.strategy);
    rec.xi = rec.nu == 1;
    rec.owner_hit = match_leak(*leak, dataset.trace(owner), dataset.cfg());
    rec.tuples = std::move(leak->tuples);
  });

  std::uint64_t unique_count = 0;
  for (const auto& rec : report.records) unique_count += rec.xi ? 1 : 0;
  report.rho_by_k[static_cast<std::uint32_t>(options.k)] =
      summarize_xi(unique_count, report.records.size());
  return report;
}

NestedLeakSample sample_nested_leaks(const Dataset& dataset,
                                     std::size_t sample_size,
                                     std::uint32_t k_max, std::uint64_t seed) {
  if (k_max < 1) throw ConfigError("k_max must be >= 1");
  NestedLeakSample sample;
  Rng order_rng(derive_seed(seed, 0));
  const auto order = order_rng.sample_indices(dataset.size(), dataset.size());
  for (const std::uint64_t u : order) {
    if (sample.users.size() == sample_size) break;
    const auto& tuples = dataset.trace(u).tuples;
    if (tuples.size() < k_max) {
      ++sample.skipped_short_traces;
      continue;
    }
    Rng rng(derive_seed(seed, u + 1));
    std::vector<SpatioTemporalTuple> perm;
    perm.reserve(k_max);
    for (const std::uint64_t i : rng.sample_indices(tuples.size(), k_max)) {
      perm.push_back(tuples[i]);
    }
    sample.users.push_back(static_cast<std::uint32_t>(u));
    sample.permutations.push_back(std::move(perm));
  }
  return sample;
}

std::vector<std::vector<std::uint32_t>> evaluate_nested_leaks(
    const Dataset& dataset, const NestedLeakSample& sample,
    const std::vector<std::uint32_t>& k_list, MatchStrategy strategy,
    int workers) {
  std::vector<std::vector<std::uint32_t>> nus(
      sample.users.size(), std::vector<std::uint32_t>(k_list.size(), 0));
  parallel_for(sample.users.size(), workers, [&](std::size_t i) {
    const auto& perm = sample.permutations[i];
    for (std::size_t j = 0; j < k_list.size(); ++j) {
      const std::uint32_t k = k_list[j];
      if (k > perm.size()) {
        throw ConfigError(
            fmt::format("k={} exceeds the sampled chain length {}", k,
                        perm.size()));
      }
      auto leak = Leak::from_tuples(
          {perm.begin(), perm.begin() + k}, dataset.cfg(),
          dataset.user_id(sample.users[i]));
      nus[i][j] = count_matches(leak, dataset, strategy);
    }
  });
  return nus;
}

NestedLeakSample coarsen_nested_leaks(const NestedLeakSample& sample,
                                      const DiscretizationConfig& from_cfg,
                                      const DiscretizationConfig& to_cfg) {
  const CoarseningRatio ratio = coarsening_ratio(from_cfg, to_cfg);
  NestedLeakSample out;
  out.users = sample.users;
  out.skipped_short_traces = sample.skipped_short_traces;
  out.permutations.reserve(sample.permutations.size());
  for (const auto& perm : sample.permutations) {
    std::vector<SpatioTemporalTuple> coarse;
    coarse.reserve(perm.size());
    for (const auto& t : perm) coarse.push_back(coarsen(t, ratio));
    out.permutations.push_back(std::move(coarse));
  }
  return out;
}

}  // namespace tracematch
