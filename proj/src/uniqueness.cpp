#include "tracematch/uniqueness.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "tracematch/parallel.hpp"
#include "tracematch/rng.hpp"

namespace tracematch {

TraceMatchMode parse_trace_match_mode(const std::string& name) {
  if (name == "strict") return TraceMatchMode::kStrict;
  if (name == "relaxed") return TraceMatchMode::kRelaxed;
  throw ConfigError(fmt::format("unknown trace match mode '{}'", name));
}

std::string to_string(TraceMatchMode m) {
  return m == TraceMatchMode::kStrict ? "strict" : "relaxed";
}

namespace {

void check_cfg(const DiscretizationConfig& a, const DiscretizationConfig& b) {
  if (a != b) {
    throw ConfigError("traces use different discretizations");
  }
}

}  // namespace

bool strict_trace_match(const MobilityTrace& a, const MobilityTrace& b) {
  return std::includes(b.tuples.begin(), b.tuples.end(), a.tuples.begin(),
                       a.tuples.end());
}

bool strict_trace_match(const MobilityTrace& a,
                        const DiscretizationConfig& cfg_a,
                        const MobilityTrace& b,
                        const DiscretizationConfig& cfg_b) {
  check_cfg(cfg_a, cfg_b);
  return strict_trace_match(a, b);
}

bool relaxed_trace_match(const MobilityTrace& a, const MobilityTrace& b) {
  // Tuples are sorted by (bin, cell); walk the bins both traces occupy.
  // Bins occupied by only one trace match by the absence clause.
  auto ia = a.tuples.begin();
  auto ib = b.tuples.begin();
  while (ia != a.tuples.end() && ib != b.tuples.end()) {
    if (ia->bin < ib->bin) {
      ++ia;
      continue;
    }
    if (ib->bin < ia->bin) {
      ++ib;
      continue;
    }
    const std::int32_t bin = ia->bin;
    auto ea = ia;
    while (ea != a.tuples.end() && ea->bin == bin) ++ea;
    auto eb = ib;
    while (eb != b.tuples.end() && eb->bin == bin) ++eb;
    // Both active at this bin: need at least one shared cell.
    bool shared = false;
    auto pa = ia;
    auto pb = ib;
    while (pa != ea && pb != eb) {
      if (pa->cell < pb->cell) {
        ++pa;
      } else if (pb->cell < pa->cell) {
        ++pb;
      } else {
        shared = true;
        break;
      }
    }
    if (!shared) return false;
    ia = ea;
    ib = eb;
  }
  return true;
}

bool relaxed_trace_match(const MobilityTrace& a,
                         const DiscretizationConfig& cfg_a,
                         const MobilityTrace& b,
                         const DiscretizationConfig& cfg_b) {
  check_cfg(cfg_a, cfg_b);
  return relaxed_trace_match(a, b);
}

UniquenessReport estimate_trace_uniqueness(const Dataset& dataset,
                                           const UniquenessOptions& options) {
  if (options.sample_size < 1) throw ConfigError("sample_size must be >= 1");
  if (options.r < 0.0 || options.r >= 1.0) {
    throw ConfigError(fmt::format("r must lie in [0, 1), got {}", options.r));
  }

  UniquenessReport report;
  report.cfg = dataset.cfg();
  report.mode = options.mode;
  report.r = options.r;
  report.exhaustive = options.exhaustive;
  report.mutual_equality = options.mutual_equality;
  report.seed = options.seed;
  report.requested_sample_size = options.sample_size;

  Rng order_rng(derive_seed(options.seed, 0));
  const auto sampled = order_rng.sample_indices(
      dataset.size(), std::min(options.sample_size, dataset.size()));

  report.records.resize(sampled.size());
  parallel_for(sampled.size(), options.workers, [&](std::size_t i) {
    const auto u = static_cast<std::uint32_t>(sampled[i]);
    const MobilityTrace& mine = dataset.trace(u);
    const BoundingBox& my_box = dataset.box(u);
    UniquenessRecord& rec = report.records[i];
    rec.user = u;
    for (std::uint32_t v = 0; v < dataset.size(); ++v) {
      if (v != u && !options.exhaustive &&
          overlap(my_box, dataset.box(v)) <= options.r) {
        ++rec.skipped_by_prefilter;
        continue;
      }
      const MobilityTrace& other = dataset.trace(v);
      bool matched;
      if (options.mode == TraceMatchMode::kStrict) {
        matched = options.mutual_equality
                      ? mine.tuples == other.tuples
                      : strict_trace_match(mine, other);
      } else {
        matched = relaxed_trace_match(mine, other);
      }
      if (matched) ++rec.match_count;
    }
    if (rec.match_count < 1) {
      throw InvariantError("trace failed to match itself");
    }
  });

  std::uint64_t unique_count = 0;
  for (const auto& rec : report.records) {
    unique_count += rec.match_count == 1 ? 1 : 0;
    report.total_skipped_by_prefilter += rec.skipped_by_prefilter;
  }
  report.probability_unique =
      report.records.empty()
          ? 0.0
          : static_cast<double>(unique_count) /
                static_cast<double>(report.records.size());
  return report;
}

}  // namespace tracematch
