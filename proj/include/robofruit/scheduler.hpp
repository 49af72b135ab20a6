#pragma once

// Target selection among the pluckable berries seen by the top camera.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "robofruit/geometry.hpp"

namespace robofruit::scheduler {

using geometry::Pixel;

/// Index of the most isolated centre: argmax_i min_{j != i} |c_i - c_j|.
/// A single centre is returned as index 0; ties go to the lowest index.
/// Throws EmptyInput for an empty list.
std::size_t min_max_target(std::span<const Pixel> centers);

enum class SortDirection { LeftToRight, RightToLeft };

/// Indices ordered by u (ascending or descending), then v ascending, then
/// index.
std::vector<std::size_t> sort_by_coordinate(std::span<const Pixel> centers,
                                            SortDirection direction);

enum class Policy { Coordinate, MinMax };

std::string_view to_string(Policy p);
Policy policy_from_string(std::string_view s);
std::string_view to_string(SortDirection d);
SortDirection direction_from_string(std::string_view s);

}  // namespace robofruit::scheduler
