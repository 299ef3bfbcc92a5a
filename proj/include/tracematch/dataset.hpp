#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tracematch/bbox.hpp"
#include "tracematch/core.hpp"

namespace tracematch {

struct CellHash {
  std::size_t operator()(const GridCell& c) const {
    std::uint64_t h = static_cast<std::uint32_t>(c.x);
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(c.y);
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

// Pre-deduplication event count per spatial cell; the popularity measure.
using CellEventCounts = std::unordered_map<GridCell, std::uint64_t, CellHash>;

// Frozen, indexed corpus of mobility traces under one discretization.
// Immutable after construction and safe to share across workers.
class Dataset {
 public:
  Dataset(DiscretizationConfig cfg, std::vector<MobilityTrace> traces,
          CellEventCounts cell_event_counts, std::uint64_t raw_event_count);

  std::size_t size() const { return traces_.size(); }
  const DiscretizationConfig& cfg() const { return cfg_; }
  const MobilityTrace& trace(std::size_t i) const { return traces_[i]; }
  const std::string& user_id(std::size_t i) const { return traces_[i].user; }
  const BoundingBox& box(std::size_t i) const { return boxes_[i]; }
  std::optional<std::size_t> find_user(const std::string& id) const;

  // Users whose trace contains the tuple, ascending by index; empty when the
  // tuple appears nowhere.
  std::span<const std::uint32_t> postings(const SpatioTemporalTuple& t) const;

  const CellEventCounts& cell_event_counts() const {
    return cell_event_counts_;
  }
  std::uint64_t raw_event_count() const { return raw_event_count_; }
  std::uint64_t num_distinct_cells() const { return cell_event_counts_.size(); }
  double mean_events_per_user() const {
    return size() == 0 ? 0.0
                       : static_cast<double>(raw_event_count_) /
                             static_cast<double>(size());
  }

  // Rebuilds the corpus at an integer-multiple granularity with shared
  // origin; cell event counts are re-aggregated.
  Dataset coarsened(const DiscretizationConfig& to_cfg) const;

  // Versioned binary container; load refuses mismatched versions.
  void save(const std::filesystem::path& path) const;
  static Dataset load(const std::filesystem::path& path);

 private:
  DiscretizationConfig cfg_;
  std::vector<MobilityTrace> traces_;  // sorted by user id
  std::vector<BoundingBox> boxes_;
  std::unordered_map<SpatioTemporalTuple, std::vector<std::uint32_t>,
                     TupleHash>
      index_;
  CellEventCounts cell_event_counts_;
  std::uint64_t raw_event_count_ = 0;
};

}  // namespace tracematch
