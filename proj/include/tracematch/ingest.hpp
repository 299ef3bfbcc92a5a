#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tracematch/dataset.hpp"

namespace tracematch {

struct RawEventRecord {
  std::string user;
  std::int64_t timestamp = 0;  // epoch seconds
  double lat = 0.0;
  double lon = 0.0;
};

struct CsvStats {
  std::uint64_t total_records = 0;
  std::uint64_t rejected_records = 0;
};

// CSV with header `user_id,timestamp,lat,lon`; gzip accepted by extension.
// Malformed records are counted, not fatal.
std::vector<RawEventRecord> read_event_csv(const std::filesystem::path& path,
                                           CsvStats* stats = nullptr);

void write_event_csv(const std::filesystem::path& path,
                     std::span<const RawEventRecord> records);

// Single-linkage cluster of antenna sites closer than the merge threshold.
struct SiteCluster {
  std::vector<PlanarPoint> members;
  PlanarPoint representative;  // centroid
};

// Connected components of the graph joining sites closer than threshold
// (ping-pong suppression). Deterministic and order-independent.
std::vector<SiteCluster> merge_nearby_sites(std::span<const PlanarPoint> sites,
                                            double threshold = 150.0);

struct BuildOptions {
  double delta_xy = 200.0;
  std::int64_t delta_t = 300;
  // Day window; day_start defaults to the corpus minimum timestamp floored
  // to a day boundary. Out-of-window events are rejected, never clamped.
  std::optional<std::int64_t> day_start;
  std::int64_t day_length = 86400;
  // Projection origin; defaults to the corpus centroid.
  std::optional<double> origin_lat;
  std::optional<double> origin_lon;
  // Grid anchor; defaults to the floor of the corpus minimum coordinates.
  std::optional<PlanarPoint> grid_origin;
  double merge_threshold_m = 150.0;
};

struct BuildResult {
  Dataset dataset;
  double origin_lat = 0.0;
  double origin_lon = 0.0;
  std::uint64_t rejected_records = 0;
  std::uint64_t num_sites = 0;
  std::uint64_t num_site_clusters = 0;
};

// The preprocessing pipeline: distinct (lat, lon) sites are merged when
// closer than the threshold, events re-attributed to cluster centroids,
// projected, discretized, and deduplicated into per-user traces.
// Throws DataError when every record is rejected.
BuildResult build_traces(std::span<const RawEventRecord> records,
                         const BuildOptions& options);

// Re-serializes a dataset as raw events at cell centers and bin starts;
// rebuilding from these events under the same options reproduces the traces.
std::vector<RawEventRecord> dataset_to_events(const Dataset& dataset,
                                              double origin_lat,
                                              double origin_lon);

}  // namespace tracematch
