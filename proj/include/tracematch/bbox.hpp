#pragma once

#include <span>

#include "tracematch/core.hpp"

namespace tracematch {

// Half-open planar box padded by delta_xy on the max side, so a single cell
// has area delta_xy^2.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Throws DataError on an empty tuple set.
BoundingBox bounding_box(std::span<const SpatioTemporalTuple> tuples,
                         const DiscretizationConfig& cfg);

// Normalized intersection: area(a ∩ b) / min(area(a), area(b)), in [0, 1];
// 0 when disjoint.
double overlap(const BoundingBox& a, const BoundingBox& b);

}  // namespace tracematch
