#include "robofruit/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "robofruit/error.hpp"

namespace robofruit::scheduler {

std::size_t min_max_target(std::span<const Pixel> centers) {
  if (centers.empty()) throw Error(ErrorKind::EmptyInput, "no berries to schedule");
  std::size_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
      if (j != i) d_min = std::min(d_min, geometry::pixel_distance(centers[i], centers[j]));
    }
    if (d_min > best_d) {
      best_d = d_min;
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> sort_by_coordinate(std::span<const Pixel> centers,
                                            SortDirection direction) {
  std::vector<std::size_t> idx(centers.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const Pixel& pa = centers[a];
    const Pixel& pb = centers[b];
    if (pa.u != pb.u) {
      return direction == SortDirection::LeftToRight ? pa.u < pb.u : pa.u > pb.u;
    }
    if (pa.v != pb.v) return pa.v < pb.v;
    return a < b;
  });
  return idx;
}

std::string_view to_string(Policy p) {
  return p == Policy::Coordinate ? "coordinate" : "minmax";
}

Policy policy_from_string(std::string_view s) {
  if (s == "coordinate") return Policy::Coordinate;
  if (s == "minmax") return Policy::MinMax;
  throw Error(ErrorKind::InvalidConfig, "unknown policy '" + std::string(s) + "'");
}

std::string_view to_string(SortDirection d) {
  return d == SortDirection::LeftToRight ? "left_to_right" : "right_to_left";
}

SortDirection direction_from_string(std::string_view s) {
  if (s == "left_to_right") return SortDirection::LeftToRight;
  if (s == "right_to_left") return SortDirection::RightToLeft;
  throw Error(ErrorKind::InvalidConfig, "unknown direction '" + std::string(s) + "'");
}

}  // namespace robofruit::scheduler
