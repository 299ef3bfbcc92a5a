#include "tracematch/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <unordered_map>

#include "tracematch/parallel.hpp"
#include "tracematch/rng.hpp"

namespace tracematch {

namespace {

double entropy_bits(const std::unordered_map<std::int64_t, std::uint64_t>& counts,
                    std::uint64_t total) {
  double h = 0.0;
  for (const auto& [key, n] : counts) {
    if (n == 0) continue;
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

std::int64_t cell_key(const GridCell& c) {
  return (static_cast<std::int64_t>(c.x) << 32) ^
         static_cast<std::uint32_t>(c.y);
}

}  // namespace

MobilityStats mobility_stats(const MobilityTrace& trace,
                             const DiscretizationConfig& cfg) {
  if (trace.tuples.empty()) throw DataError("mobility stats of empty trace");
  MobilityStats stats;
  stats.num_events = trace.tuples.size();

  std::unordered_map<std::int64_t, std::uint64_t> bin_counts;
  std::unordered_map<std::int64_t, std::uint64_t> cell_counts;
  for (const auto& t : trace.tuples) {
    ++bin_counts[t.bin];
    ++cell_counts[cell_key(t.cell)];
  }
  stats.num_unique_locations = cell_counts.size();
  stats.temporal_entropy_bits = entropy_bits(bin_counts, stats.num_events);
  stats.spatial_entropy_bits = entropy_bits(cell_counts, stats.num_events);
  stats.bbox_area_km2 = bounding_box(trace.tuples, cfg).area() / 1e6;

  // Tuples are sorted by (bin, cell); walk the path through cell centers.
  double total_m = 0.0;
  double intra_slot_m = 0.0;
  for (std::size_t i = 1; i < trace.tuples.size(); ++i) {
    const PlanarPoint a = cell_center(trace.tuples[i - 1].cell, cfg);
    const PlanarPoint b = cell_center(trace.tuples[i].cell, cfg);
    const double d = std::hypot(b.x - a.x, b.y - a.y);
    total_m += d;
    if (trace.tuples[i].bin == trace.tuples[i - 1].bin) intra_slot_m += d;
  }
  stats.total_distance_km = total_m / 1000.0;
  stats.dist_per_slot_km =
      intra_slot_m / 1000.0 / static_cast<double>(bin_counts.size());
  return stats;
}

std::vector<double> popularity_profile(const Dataset& dataset,
                                       const MatchReport& report,
                                       std::size_t bins) {
  if (bins < 1) throw ConfigError("bins must be >= 1");
  const auto& counts = dataset.cell_event_counts();
  if (counts.empty()) return {};

  // Rank cells by daily event count descending; cell index breaks ties so
  // the ranking is deterministic.
  std::vector<std::pair<GridCell, std::uint64_t>> ranked(counts.begin(),
                                                         counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::unordered_map<GridCell, std::size_t, CellHash> cell_bin;
  cell_bin.reserve(ranked.size());
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    cell_bin[ranked[rank].first] = rank * bins / ranked.size();
  }

  // Per bin: the fraction of leak appearances that were part of a uniquely
  // matching leak (the participation rate), then rescaled to sum to 1.
  std::vector<double> unique_hits(bins, 0.0), appearances(bins, 0.0);
  bool any_unique = false;
  for (const auto& rec : report.records) {
    for (const auto& t : rec.tuples) {
      const auto it = cell_bin.find(t.cell);
      if (it == cell_bin.end()) continue;  // leak cell absent from corpus
      appearances[it->second] += 1.0;
      if (rec.xi) {
        unique_hits[it->second] += 1.0;
        any_unique = true;
      }
    }
  }
  if (!any_unique) return {};

  std::vector<double> profile(bins, 0.0);
  double sum = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (appearances[b] > 0.0) profile[b] = unique_hits[b] / appearances[b];
    sum += profile[b];
  }
  for (auto& v : profile) v /= sum;
  return profile;
}

std::vector<double> time_of_day_profile(const MatchReport& report,
                                        const DiscretizationConfig& cfg) {
  cfg.validate();
  std::vector<double> histogram(cfg.num_time_bins(), 0.0);
  double total = 0.0;
  for (const auto& rec : report.records) {
    if (!rec.xi) continue;
    for (const auto& t : rec.tuples) {
      if (t.bin >= 0 && t.bin < cfg.num_time_bins()) {
        histogram[t.bin] += 1.0;
        total += 1.0;
      }
    }
  }
  if (total == 0.0) return {};
  for (auto& v : histogram) v /= total;
  return histogram;
}

namespace {

struct StatsAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
  }
  double mean(std::size_t n) const {
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  }
  double stddev(std::size_t n) const {
    if (n == 0) return 0.0;
    const double m = mean(n);
    const double var = sum_sq / static_cast<double>(n) - m * m;
    return var > 0.0 ? std::sqrt(var) : 0.0;
  }
};

CohortSummary summarize_cohort(const Dataset& dataset,
                               const std::vector<std::uint32_t>& users) {
  CohortSummary summary;
  summary.count = users.size();
  StatsAccumulator acc[7];
  for (const std::uint32_t u : users) {
    const MobilityStats s = mobility_stats(dataset.trace(u), dataset.cfg());
    acc[0].add(static_cast<double>(s.num_events));
    acc[1].add(static_cast<double>(s.num_unique_locations));
    acc[2].add(s.bbox_area_km2);
    acc[3].add(s.dist_per_slot_km);
    acc[4].add(s.total_distance_km);
    acc[5].add(s.temporal_entropy_bits);
    acc[6].add(s.spatial_entropy_bits);
  }
  const std::size_t n = users.size();
  summary.mean.num_events = static_cast<std::uint64_t>(acc[0].mean(n));
  summary.mean.num_unique_locations =
      static_cast<std::uint64_t>(acc[1].mean(n));
  summary.mean.bbox_area_km2 = acc[2].mean(n);
  summary.mean.dist_per_slot_km = acc[3].mean(n);
  summary.mean.total_distance_km = acc[4].mean(n);
  summary.mean.temporal_entropy_bits = acc[5].mean(n);
  summary.mean.spatial_entropy_bits = acc[6].mean(n);
  summary.stddev.num_events = static_cast<std::uint64_t>(acc[0].stddev(n));
  summary.stddev.num_unique_locations =
      static_cast<std::uint64_t>(acc[1].stddev(n));
  summary.stddev.bbox_area_km2 = acc[2].stddev(n);
  summary.stddev.dist_per_slot_km = acc[3].stddev(n);
  summary.stddev.total_distance_km = acc[4].stddev(n);
  summary.stddev.temporal_entropy_bits = acc[5].stddev(n);
  summary.stddev.spatial_entropy_bits = acc[6].stddev(n);
  return summary;
}

}  // namespace

CohortReport cohort_compare(const Dataset& dataset,
                            const CohortOptions& options) {
  if (options.repeat < 1) throw ConfigError("repeat must be >= 1");
  if (options.sample_size < 1) throw ConfigError("sample_size must be >= 1");

  Rng order_rng(derive_seed(options.seed, 0));
  const auto order = order_rng.sample_indices(dataset.size(), dataset.size());
  std::vector<std::uint32_t> selected;
  for (const std::uint64_t u : order) {
    if (selected.size() == options.sample_size) break;
    if (dataset.trace(u).tuples.size() >= options.k) {
      selected.push_back(static_cast<std::uint32_t>(u));
    }
  }

  std::vector<double> probability(selected.size(), 0.0);
  parallel_for(selected.size(), options.workers, [&](std::size_t i) {
    const std::uint32_t u = selected[i];
    const std::uint64_t seed_u = derive_seed(options.seed, u + 1);
    std::uint32_t uniques = 0;
    for (std::uint32_t draw = 0; draw < options.repeat; ++draw) {
      Rng rng(draw == 0 ? seed_u : derive_seed(seed_u, draw));
      const auto leak =
          sample_leak(dataset.trace(u), dataset.cfg(), options.k, rng);
      if (!leak) throw InvariantError("eligible trace failed to yield a leak");
      if (is_unique(*leak, dataset, options.strategy)) ++uniques;
    }
    probability[i] =
        static_cast<double>(uniques) / static_cast<double>(options.repeat);
  });

  // Ascending user index keeps the aggregation enumeration-independent.
  std::vector<std::pair<std::uint32_t, double>> by_user(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    by_user[i] = {selected[i], probability[i]};
  }
  std::sort(by_user.begin(), by_user.end());
  std::vector<std::uint32_t> always, rarely;
  for (const auto& [u, p] : by_user) {
    if (p == 1.0) {
      always.push_back(u);
    } else if (p < 0.01) {
      rarely.push_back(u);
    }
  }

  CohortReport report;
  report.sampled_users = selected.size();
  report.k = options.k;
  report.repeat = options.repeat;
  report.always_unique = summarize_cohort(dataset, always);
  report.rarely_unique = summarize_cohort(dataset, rarely);
  return report;
}

namespace {

void validate_chain(const std::vector<double>& values, double finest,
                    const char* what) {
  if (values.empty()) throw ConfigError(fmt::format("empty {} list", what));
  double prev = finest;
  for (const double v : values) {
    if (v < prev) {
      throw ConfigError(
          fmt::format("{} list must be ascending and start at or above the "
                      "dataset granularity",
                      what));
    }
    const double ratio = v / prev;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      throw ConfigError(fmt::format(
          "{} chain breaks the integer-ratio constraint at {}", what, v));
    }
    prev = v;
  }
}

}  // namespace

SweepGrid sweep(const Dataset& finest, const SweepOptions& options) {
  if (options.k_list.empty()) throw ConfigError("empty k list");
  validate_chain(options.delta_xy_list, finest.cfg().delta_xy, "delta_xy");
  validate_chain(
      {options.delta_t_list.begin(), options.delta_t_list.end()},
      static_cast<double>(finest.cfg().delta_t), "delta_t");

  const std::uint32_t k_max =
      *std::max_element(options.k_list.begin(), options.k_list.end());
  const NestedLeakSample sample = sample_nested_leaks(
      finest, options.sample_size, k_max, options.seed);
  if (sample.users.empty()) {
    throw DataError(fmt::format(
        "no trace has at least {} tuples; cannot sample leaks", k_max));
  }

  SweepGrid grid;
  grid.delta_t_axis = options.delta_t_list;
  grid.delta_xy_axis = options.delta_xy_list;
  grid.k_list = options.k_list;
  grid.sampled_users = sample.users;
  grid.skipped_short_traces = sample.skipped_short_traces;
  grid.rho.resize(options.delta_t_list.size());
  if (options.keep_detail) grid.nu_detail.resize(options.delta_t_list.size());

  for (std::size_t it = 0; it < options.delta_t_list.size(); ++it) {
    grid.rho[it].resize(options.delta_xy_list.size());
    if (options.keep_detail) {
      grid.nu_detail[it].resize(options.delta_xy_list.size());
    }
    for (std::size_t ix = 0; ix < options.delta_xy_list.size(); ++ix) {
      DiscretizationConfig cfg = finest.cfg();
      cfg.delta_t = options.delta_t_list[it];
      cfg.delta_xy = options.delta_xy_list[ix];
      const bool identity = cfg == finest.cfg();
      std::optional<Dataset> coarse;
      if (!identity) coarse = finest.coarsened(cfg);
      const Dataset& point = identity ? finest : *coarse;
      const NestedLeakSample point_sample =
          identity ? sample
                   : coarsen_nested_leaks(sample, finest.cfg(), cfg);
      const auto nus = evaluate_nested_leaks(
          point, point_sample, options.k_list, options.strategy,
          options.workers);
      auto& cell = grid.rho[it][ix];
      cell.assign(options.k_list.size(), 0.0);
      for (const auto& per_user : nus) {
        for (std::size_t ik = 0; ik < per_user.size(); ++ik) {
          if (per_user[ik] == 1) cell[ik] += 1.0;
        }
      }
      for (auto& v : cell) v /= static_cast<double>(nus.size());
      if (options.keep_detail) grid.nu_detail[it][ix] = nus;
    }
  }
  return grid;
}

}  // namespace tracematch
