#include "tracematch/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace tracematch {

namespace {

constexpr const char* kCsvHeader = "user_id,timestamp,lat,lon";

std::string read_whole_file(const std::filesystem::path& path) {
  const bool gzipped = path.extension() == ".gz";
  if (gzipped) {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::string content;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) content.append(buf, n);
    const bool failed = n < 0;
    gzclose(f);
    if (failed) {
      throw DataError(fmt::format("gzip read failed for '{}'", path.string()));
    }
    return content;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool parse_double(std::string_view s, double* out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_int64(std::string_view s, std::int64_t* out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size();
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::vector<RawEventRecord> read_event_csv(const std::filesystem::path& path,
                                           CsvStats* stats) {
  const std::string content = read_whole_file(path);
  std::vector<RawEventRecord> records;
  CsvStats local;

  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    std::string_view line = strip_cr({content.data() + pos, eol - pos});
    pos = eol + 1;
    if (!saw_header) {
      if (line != kCsvHeader) {
        throw DataError(fmt::format("'{}': expected header '{}'",
                                    path.string(), kCsvHeader));
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    ++local.total_records;

    std::string_view fields[4];
    std::size_t field = 0, start = 0;
    bool ok = true;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (field >= 4) {
          ok = false;
          break;
        }
        fields[field++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    RawEventRecord rec;
    ok = ok && field == 4 && !fields[0].empty();
    ok = ok && parse_int64(fields[1], &rec.timestamp);
    ok = ok && parse_double(fields[2], &rec.lat) && std::abs(rec.lat) <= 90.0;
    ok = ok && parse_double(fields[3], &rec.lon) && std::abs(rec.lon) <= 180.0;
    if (!ok) {
      ++local.rejected_records;
      continue;
    }
    rec.user = std::string(fields[0]);
    records.push_back(std::move(rec));
  }
  if (!saw_header) {
    throw DataError(fmt::format("'{}' is empty", path.string()));
  }
  if (stats) *stats = local;
  return records;
}

void write_event_csv(const std::filesystem::path& path,
                     std::span<const RawEventRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}'", path.string()));
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.user << ',' << r.timestamp << ','
        << fmt::format("{:.9f},{:.9f}", r.lat, r.lon) << '\n';
  }
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

struct Int2 {
  std::int64_t x, y;
  friend auto operator<=>(const Int2&, const Int2&) = default;
};

}  // namespace

std::vector<SiteCluster> merge_nearby_sites(std::span<const PlanarPoint> sites,
                                            double threshold) {
  if (threshold <= 0.0) throw ConfigError("merge threshold must be positive");
  if (sites.empty()) return {};

  // Canonical ordering makes the result independent of input order.
  std::vector<std::size_t> order(sites.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(sites[a].x, sites[a].y) <
           std::pair(sites[b].x, sites[b].y);
  });

  // Hash grid of cell size = threshold; neighbors can only live in the 3x3
  // block around a site's cell.
  std::map<Int2, std::vector<std::size_t>> grid;
  auto cell_of = [&](const PlanarPoint& p) {
    return Int2{static_cast<std::int64_t>(std::floor(p.x / threshold)),
                static_cast<std::int64_t>(std::floor(p.y / threshold))};
  };
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    grid[cell_of(sites[order[rank]])].push_back(rank);
  }

  UnionFind uf(order.size());
  const double threshold_sq = threshold * threshold;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const PlanarPoint& p = sites[order[rank]];
    const Int2 c = cell_of(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find(Int2{c.x + dx, c.y + dy});
        if (it == grid.end()) continue;
        for (const std::size_t other : it->second) {
          if (other >= rank) continue;
          const PlanarPoint& q = sites[order[other]];
          const double ddx = p.x - q.x, ddy = p.y - q.y;
          if (ddx * ddx + ddy * ddy < threshold_sq) uf.unite(rank, other);
        }
      }
    }
  }

  std::map<std::size_t, SiteCluster> clusters;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    clusters[uf.find(rank)].members.push_back(sites[order[rank]]);
  }
  std::vector<SiteCluster> result;
  result.reserve(clusters.size());
  for (auto& [root, cluster] : clusters) {
    PlanarPoint sum{0.0, 0.0};
    for (const auto& m : cluster.members) {
      sum.x += m.x;
      sum.y += m.y;
    }
    const auto n = static_cast<double>(cluster.members.size());
    cluster.representative = PlanarPoint{sum.x / n, sum.y / n};
    result.push_back(std::move(cluster));
  }
  return result;
}

BuildResult build_traces(std::span<const RawEventRecord> records,
                         const BuildOptions& options) {
  if (records.empty()) throw DataError("no input records");

  double origin_lat, origin_lon;
  if (options.origin_lat && options.origin_lon) {
    origin_lat = *options.origin_lat;
    origin_lon = *options.origin_lon;
  } else {
    double lat_sum = 0.0, lon_sum = 0.0;
    for (const auto& r : records) {
      lat_sum += r.lat;
      lon_sum += r.lon;
    }
    origin_lat = lat_sum / static_cast<double>(records.size());
    origin_lon = lon_sum / static_cast<double>(records.size());
  }

  // Distinct (lat, lon) pairs are the antenna sites.
  std::map<std::pair<double, double>, std::size_t> site_ids;
  std::vector<PlanarPoint> sites;
  std::vector<std::size_t> record_site(records.size());
  std::uint64_t rejected = 0;
  std::vector<bool> record_ok(records.size(), true);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (std::abs(r.lat) > 90.0 || std::abs(r.lon) > 180.0) {
      record_ok[i] = false;
      ++rejected;
      continue;
    }
    const auto [it, inserted] =
        site_ids.try_emplace({r.lat, r.lon}, sites.size());
    if (inserted) sites.push_back(project(r.lat, r.lon, origin_lat, origin_lon));
    record_site[i] = it->second;
  }
  if (sites.empty()) throw DataError("all records rejected");

  const auto clusters = merge_nearby_sites(sites, options.merge_threshold_m);
  std::vector<PlanarPoint> site_to_rep(sites.size());
  {
    // Map each site back to its cluster representative via exact position.
    std::map<std::pair<double, double>, PlanarPoint> rep_of;
    for (const auto& c : clusters) {
      for (const auto& m : c.members) rep_of[{m.x, m.y}] = c.representative;
    }
    for (std::size_t i = 0; i < sites.size(); ++i) {
      site_to_rep[i] = rep_of.at({sites[i].x, sites[i].y});
    }
  }

  std::int64_t day_start;
  if (options.day_start) {
    day_start = *options.day_start;
  } else {
    std::int64_t min_ts = INT64_MAX;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (record_ok[i]) min_ts = std::min(min_ts, records[i].timestamp);
    }
    day_start = (min_ts / 86400) * 86400;
    if (min_ts < 0 && min_ts % 86400 != 0) day_start -= 86400;
  }

  DiscretizationConfig cfg;
  cfg.delta_xy = options.delta_xy;
  cfg.delta_t = options.delta_t;
  cfg.day_start = day_start;
  cfg.day_length = options.day_length;
  if (options.grid_origin) {
    cfg.grid_origin = *options.grid_origin;
  } else {
    PlanarPoint lo{INFINITY, INFINITY};
    for (const auto& rep : site_to_rep) {
      lo.x = std::min(lo.x, rep.x);
      lo.y = std::min(lo.y, rep.y);
    }
    cfg.grid_origin = PlanarPoint{std::floor(lo.x), std::floor(lo.y)};
  }
  cfg.validate();

  std::map<std::string, std::vector<SpatioTemporalTuple>> per_user;
  CellEventCounts cell_counts;
  std::uint64_t accepted = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!record_ok[i]) continue;
    const auto& r = records[i];
    if (r.timestamp < cfg.day_start ||
        r.timestamp >= cfg.day_start + cfg.day_length) {
      ++rejected;
      continue;
    }
    const GridCell cell = discretize_space(site_to_rep[record_site[i]], cfg);
    const TimeBin bin = discretize_time(r.timestamp, cfg);
    per_user[r.user].push_back(SpatioTemporalTuple{cell, bin.index});
    ++cell_counts[cell];
    ++accepted;
  }
  if (accepted == 0) throw DataError("all records rejected");

  std::vector<MobilityTrace> traces;
  traces.reserve(per_user.size());
  for (auto& [user, tuples] : per_user) {
    traces.push_back(MobilityTrace::from_tuples(user, std::move(tuples)));
  }

  BuildResult result{
      Dataset(cfg, std::move(traces), std::move(cell_counts), accepted),
      origin_lat,
      origin_lon,
      rejected,
      sites.size(),
      clusters.size()};
  return result;
}

std::vector<RawEventRecord> dataset_to_events(const Dataset& dataset,
                                              double origin_lat,
                                              double origin_lon) {
  std::vector<RawEventRecord> events;
  const auto& cfg = dataset.cfg();
  for (std::size_t u = 0; u < dataset.size(); ++u) {
    for (const auto& t : dataset.trace(u).tuples) {
      RawEventRecord rec;
      rec.user = dataset.user_id(u);
      rec.timestamp = cfg.day_start + t.bin * cfg.delta_t;
      unproject(cell_center(t.cell, cfg), origin_lat, origin_lon, &rec.lat,
                &rec.lon);
      events.push_back(std::move(rec));
    }
  }
  return events;
}

}  // namespace tracematch
