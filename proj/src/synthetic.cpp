#include "tracematch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "tracematch/parallel.hpp"
#include "tracematch/rng.hpp"

namespace tracematch {

void SyntheticPopulationConfig::validate() const {
  if (num_users < 1) throw ConfigError("num_users must be >= 1");
  if (num_sites < 1) throw ConfigError("num_sites must be >= 1");
  if (anchors_per_user < 1) throw ConfigError("anchors_per_user must be >= 1");
  if (anchors_per_user > num_sites) {
    throw ConfigError(fmt::format(
        "anchors_per_user ({}) exceeds num_sites ({})", anchors_per_user,
        num_sites));
  }
  if (!(events_per_user_mean >= 1.0)) {
    throw ConfigError("events_per_user_mean must be >= 1");
  }
  if (!(events_per_user_dispersion > 0.0)) {
    throw ConfigError("events_per_user_dispersion must be positive");
  }
  if (!(pool_size_mean >= static_cast<double>(anchors_per_user))) {
    throw ConfigError("pool_size_mean must cover the anchors");
  }
  if (anchor_affinity < 0.0 || anchor_affinity > 1.0) {
    throw ConfigError("anchor_affinity must lie in [0, 1]");
  }
  if (!(zipf_exponent >= 0.0)) {
    throw ConfigError("zipf_exponent must be non-negative");
  }
  if (!(travel_radius_m > 0.0)) {
    throw ConfigError("travel_radius_m must be positive");
  }
  double weight_sum = 0.0;
  for (const double w : diurnal_weights) {
    if (w < 0.0) throw ConfigError("diurnal weights must be non-negative");
    weight_sum += w;
  }
  if (weight_sum <= 0.0) {
    throw ConfigError("diurnal weights must not all be zero");
  }
}

double SyntheticPopulationConfig::effective_region_side() const {
  if (region_side_m > 0.0) return region_side_m;
  // Roughly two sites per square kilometer.
  return std::sqrt(static_cast<double>(num_sites) / 2.0) * 1000.0;
}

namespace {

// Draws an index from a cumulative weight table.
std::size_t draw_from_cumulative(const std::vector<double>& cumulative,
                                 Rng& rng) {
  const double v = rng.uniform() * cumulative.back();
  const auto it =
      std::upper_bound(cumulative.begin(), cumulative.end(), v);
  return std::min<std::size_t>(it - cumulative.begin(),
                               cumulative.size() - 1);
}

double dist_sq(const PlanarPoint& a, const PlanarPoint& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct UserEvents {
  std::vector<std::size_t> sites;
  std::vector<std::int64_t> timestamps;
};

}  // namespace

Dataset generate_synthetic(const SyntheticPopulationConfig& cfg,
                           const DiscretizationConfig& dcfg, int workers,
                           std::vector<RawEventRecord>* events_out) {
  cfg.validate();
  dcfg.validate();

  const double side = cfg.effective_region_side();
  Rng site_rng(derive_seed(cfg.seed, 1));
  std::vector<PlanarPoint> sites(cfg.num_sites);
  for (auto& s : sites) {
    s = PlanarPoint{dcfg.grid_origin.x + site_rng.uniform() * side,
                    dcfg.grid_origin.y + site_rng.uniform() * side};
  }

  // Global Zipf popularity over site index.
  std::vector<double> zipf_cumulative(cfg.num_sites);
  double acc = 0.0;
  for (std::uint64_t i = 0; i < cfg.num_sites; ++i) {
    acc += std::pow(static_cast<double>(i + 1), -cfg.zipf_exponent);
    zipf_cumulative[i] = acc;
  }

  std::vector<double> diurnal_cumulative(24);
  acc = 0.0;
  for (std::size_t h = 0; h < 24; ++h) {
    acc += cfg.diurnal_weights[h];
    diurnal_cumulative[h] = acc;
  }

  std::vector<UserEvents> per_user(cfg.num_users);
  parallel_for(cfg.num_users, workers, [&](std::size_t u) {
    Rng rng(derive_seed(cfg.seed, 1000 + u));

    // Home anchor by global popularity; further anchors and exploration
    // sites near home, popularity-weighted by rejection.
    const std::size_t home = draw_from_cumulative(zipf_cumulative, rng);
    const double radius =
        cfg.travel_radius_m * std::exp(rng.normal(0.0, 0.9));
    const double radius_sq = radius * radius;
    auto draw_near_home = [&] {
      for (int attempt = 0; attempt < 200; ++attempt) {
        const std::size_t s = draw_from_cumulative(zipf_cumulative, rng);
        if (dist_sq(sites[s], sites[home]) <= radius_sq) return s;
      }
      return draw_from_cumulative(zipf_cumulative, rng);
    };

    std::vector<std::size_t> pool{home};
    for (std::uint32_t a = 1; a < cfg.anchors_per_user; ++a) {
      std::size_t s = draw_near_home();
      for (int attempt = 0;
           attempt < 50 &&
           std::find(pool.begin(), pool.end(), s) != pool.end();
           ++attempt) {
        s = draw_near_home();
      }
      pool.push_back(s);
    }
    const double extra_mean =
        cfg.pool_size_mean - static_cast<double>(cfg.anchors_per_user);
    const std::uint64_t extras =
        extra_mean > 0.0 ? rng.poisson(extra_mean) : 0;
    for (std::uint64_t e = 0; e < extras; ++e) {
      // retry duplicates so the heavy Zipf head doesn't shrink the pool
      std::size_t s = draw_near_home();
      for (int attempt = 0;
           attempt < 100 &&
           std::find(pool.begin(), pool.end(), s) != pool.end();
           ++attempt) {
        s = draw_near_home();
      }
      if (std::find(pool.begin(), pool.end(), s) == pool.end()) {
        pool.push_back(s);
      }
    }

    // Event weights: anchors share anchor_affinity (home twice the rest),
    // exploration sites share the remainder with a 1/rank falloff.
    std::vector<double> pool_cumulative(pool.size());
    double wacc = 0.0;
    const std::size_t num_anchors =
        std::min<std::size_t>(cfg.anchors_per_user, pool.size());
    const std::size_t num_explore = pool.size() - num_anchors;
    double explore_norm = 0.0;
    for (std::size_t i = 0; i < num_explore; ++i) {
      explore_norm += 1.0 / static_cast<double>(i + 1);
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double w;
      if (i < num_anchors) {
        const double anchor_units =
            static_cast<double>(num_anchors) + 1.0;  // home counts double
        const double base = (i == 0 ? 2.0 : 1.0) / anchor_units;
        w = num_explore == 0 ? base : cfg.anchor_affinity * base;
      } else {
        w = (1.0 - cfg.anchor_affinity) *
            (1.0 / static_cast<double>(i - num_anchors + 1)) / explore_norm;
      }
      wacc += w;
      pool_cumulative[i] = wacc;
    }

    // Negative binomial event count via gamma-Poisson mixture.
    const double lambda = rng.gamma(
        cfg.events_per_user_dispersion,
        cfg.events_per_user_mean / cfg.events_per_user_dispersion);
    const std::uint64_t num_events = std::max<std::uint64_t>(
        1, rng.poisson(std::max(lambda, 1e-9)));

    UserEvents& out = per_user[u];
    out.sites.reserve(num_events);
    out.timestamps.reserve(num_events);
    for (std::uint64_t e = 0; e < num_events; ++e) {
      out.sites.push_back(pool[draw_from_cumulative(pool_cumulative, rng)]);
      std::int64_t offset;
      do {
        const auto hour = static_cast<std::int64_t>(
            draw_from_cumulative(diurnal_cumulative, rng));
        offset = hour * 3600 +
                 static_cast<std::int64_t>(rng.uniform_below(3600));
      } while (offset >= dcfg.day_length);
      out.timestamps.push_back(dcfg.day_start + offset);
    }
  });

  // Sequential assembly keeps counts and traces independent of scheduling.
  const int id_width =
      std::max<int>(7, static_cast<int>(std::to_string(cfg.num_users).size()));
  std::vector<MobilityTrace> traces;
  traces.reserve(cfg.num_users);
  CellEventCounts cell_counts;
  std::uint64_t total_events = 0;
  for (std::uint64_t u = 0; u < cfg.num_users; ++u) {
    const UserEvents& ev = per_user[u];
    std::vector<SpatioTemporalTuple> tuples;
    tuples.reserve(ev.sites.size());
    for (std::size_t e = 0; e < ev.sites.size(); ++e) {
      const GridCell cell = discretize_space(sites[ev.sites[e]], dcfg);
      const TimeBin bin = discretize_time(ev.timestamps[e], dcfg);
      tuples.push_back(SpatioTemporalTuple{cell, bin.index});
      ++cell_counts[cell];
    }
    total_events += ev.sites.size();
    std::string id = fmt::format("u{:0{}}", u, id_width);
    if (events_out) {
      for (std::size_t e = 0; e < ev.sites.size(); ++e) {
        RawEventRecord rec;
        rec.user = id;
        rec.timestamp = ev.timestamps[e];
        unproject(sites[ev.sites[e]], kSyntheticOriginLat,
                  kSyntheticOriginLon, &rec.lat, &rec.lon);
        events_out->push_back(std::move(rec));
      }
    }
    traces.push_back(MobilityTrace::from_tuples(std::move(id),
                                                std::move(tuples)));
  }

  return Dataset(dcfg, std::move(traces), std::move(cell_counts),
                 total_events);
}

}  // namespace tracematch
