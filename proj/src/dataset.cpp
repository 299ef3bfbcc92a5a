#include "tracematch/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fmt/format.h>
#include <fstream>

namespace tracematch {

BoundingBox bounding_box(std::span<const SpatioTemporalTuple> tuples,
                         const DiscretizationConfig& cfg) {
  if (tuples.empty()) throw DataError("bounding box of an empty tuple set");
  std::int32_t x_min = tuples[0].cell.x, x_max = tuples[0].cell.x;
  std::int32_t y_min = tuples[0].cell.y, y_max = tuples[0].cell.y;
  for (const auto& t : tuples) {
    x_min = std::min(x_min, t.cell.x);
    x_max = std::max(x_max, t.cell.x);
    y_min = std::min(y_min, t.cell.y);
    y_max = std::max(y_max, t.cell.y);
  }
  const auto& o = cfg.grid_origin;
  return BoundingBox{o.x + x_min * cfg.delta_xy, o.y + y_min * cfg.delta_xy,
                     o.x + (x_max + 1) * cfg.delta_xy,
                     o.y + (y_max + 1) * cfg.delta_xy};
}

double overlap(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  return (ix * iy) / std::min(a.area(), b.area());
}

Dataset::Dataset(DiscretizationConfig cfg, std::vector<MobilityTrace> traces,
                 CellEventCounts cell_event_counts,
                 std::uint64_t raw_event_count)
    : cfg_(cfg),
      traces_(std::move(traces)),
      cell_event_counts_(std::move(cell_event_counts)),
      raw_event_count_(raw_event_count) {
  cfg_.validate();
  if (traces_.empty()) throw DataError("dataset has no traces");
  std::sort(traces_.begin(), traces_.end(),
            [](const MobilityTrace& a, const MobilityTrace& b) {
              return a.user < b.user;
            });
  for (std::size_t i = 1; i < traces_.size(); ++i) {
    if (traces_[i].user == traces_[i - 1].user) {
      throw DataError(
          fmt::format("duplicate user id '{}' in dataset", traces_[i].user));
    }
  }
  boxes_.reserve(traces_.size());
  for (std::uint32_t i = 0; i < traces_.size(); ++i) {
    const auto& trace = traces_[i];
    if (trace.tuples.empty()) {
      throw DataError(fmt::format("empty trace for user '{}'", trace.user));
    }
    boxes_.push_back(bounding_box(trace.tuples, cfg_));
    for (const auto& t : trace.tuples) index_[t].push_back(i);
  }
}

std::optional<std::size_t> Dataset::find_user(const std::string& id) const {
  const auto it = std::lower_bound(
      traces_.begin(), traces_.end(), id,
      [](const MobilityTrace& t, const std::string& v) { return t.user < v; });
  if (it == traces_.end() || it->user != id) return std::nullopt;
  return static_cast<std::size_t>(it - traces_.begin());
}

std::span<const std::uint32_t> Dataset::postings(
    const SpatioTemporalTuple& t) const {
  const auto it = index_.find(t);
  if (it == index_.end()) return {};
  return it->second;
}

Dataset Dataset::coarsened(const DiscretizationConfig& to_cfg) const {
  const CoarseningRatio ratio = coarsening_ratio(cfg_, to_cfg);
  std::vector<MobilityTrace> traces;
  traces.reserve(traces_.size());
  for (const auto& trace : traces_) {
    traces.push_back(MobilityTrace{trace.user,
                                   coarsen_tuples(trace.tuples, ratio)});
  }
  CellEventCounts counts;
  counts.reserve(cell_event_counts_.size());
  for (const auto& [cell, n] : cell_event_counts_) {
    const auto coarse =
        coarsen(SpatioTemporalTuple{cell, 0}, ratio).cell;
    counts[coarse] += n;
  }
  return Dataset(to_cfg, std::move(traces), std::move(counts),
                 raw_event_count_);
}

namespace {

constexpr char kMagic[4] = {'T', 'M', 'D', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw DataError("truncated dataset file");
  return v;
}

void write_cfg(std::ostream& out, const DiscretizationConfig& cfg) {
  write_pod(out, cfg.delta_xy);
  write_pod(out, cfg.delta_t);
  write_pod(out, cfg.day_start);
  write_pod(out, cfg.day_length);
  write_pod(out, cfg.grid_origin.x);
  write_pod(out, cfg.grid_origin.y);
}

DiscretizationConfig read_cfg(std::istream& in) {
  DiscretizationConfig cfg;
  cfg.delta_xy = read_pod<double>(in);
  cfg.delta_t = read_pod<std::int64_t>(in);
  cfg.day_start = read_pod<std::int64_t>(in);
  cfg.day_length = read_pod<std::int64_t>(in);
  cfg.grid_origin.x = read_pod<double>(in);
  cfg.grid_origin.y = read_pod<double>(in);
  return cfg;
}

}  // namespace

void Dataset::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}'", path.string()));
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kFormatVersion);
  write_cfg(out, cfg_);
  write_pod(out, raw_event_count_);
  write_pod(out, static_cast<std::uint64_t>(traces_.size()));
  for (const auto& trace : traces_) {
    write_pod(out, static_cast<std::uint32_t>(trace.user.size()));
    out.write(trace.user.data(),
              static_cast<std::streamsize>(trace.user.size()));
    write_pod(out, static_cast<std::uint64_t>(trace.tuples.size()));
    for (const auto& t : trace.tuples) {
      write_pod(out, t.cell.x);
      write_pod(out, t.cell.y);
      write_pod(out, t.bin);
    }
  }
  // Cells in sorted order so the container is byte-identical across runs.
  std::vector<std::pair<GridCell, std::uint64_t>> cells(
      cell_event_counts_.begin(), cell_event_counts_.end());
  std::sort(cells.begin(), cells.end());
  write_pod(out, static_cast<std::uint64_t>(cells.size()));
  for (const auto& [cell, n] : cells) {
    write_pod(out, cell.x);
    write_pod(out, cell.y);
    write_pod(out, n);
  }
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

Dataset Dataset::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(fmt::format("'{}' is not a dataset container",
                                path.string()));
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw DataError(fmt::format(
        "unsupported dataset format version {} (expected {})", version,
        kFormatVersion));
  }
  const DiscretizationConfig cfg = read_cfg(in);
  const auto raw_events = read_pod<std::uint64_t>(in);
  const auto num_users = read_pod<std::uint64_t>(in);
  std::vector<MobilityTrace> traces;
  traces.reserve(num_users);
  for (std::uint64_t u = 0; u < num_users; ++u) {
    const auto id_len = read_pod<std::uint32_t>(in);
    std::string id(id_len, '\0');
    in.read(id.data(), id_len);
    const auto num_tuples = read_pod<std::uint64_t>(in);
    std::vector<SpatioTemporalTuple> tuples;
    tuples.reserve(num_tuples);
    for (std::uint64_t i = 0; i < num_tuples; ++i) {
      SpatioTemporalTuple t;
      t.cell.x = read_pod<std::int32_t>(in);
      t.cell.y = read_pod<std::int32_t>(in);
      t.bin = read_pod<std::int32_t>(in);
      tuples.push_back(t);
    }
    if (!in) throw DataError("truncated dataset file");
    traces.push_back(MobilityTrace{std::move(id), std::move(tuples)});
  }
  const auto num_cells = read_pod<std::uint64_t>(in);
  CellEventCounts counts;
  counts.reserve(num_cells);
  for (std::uint64_t i = 0; i < num_cells; ++i) {
    GridCell cell;
    cell.x = read_pod<std::int32_t>(in);
    cell.y = read_pod<std::int32_t>(in);
    counts[cell] = read_pod<std::uint64_t>(in);
  }
  return Dataset(cfg, std::move(traces), std::move(counts), raw_events);
}

}  // namespace tracematch
