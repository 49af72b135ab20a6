#pragma once

// Ground-truth world: berries hanging from a single-sided table row, the
// punnet they are placed into, and the per-variety peduncle statistics.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "robofruit/geometry.hpp"

namespace robofruit::scene {

using geometry::RigidTransform;
using geometry::Vec3;

enum class Variety { Katrina, Zara, Generic };

std::string_view to_string(Variety v);
Variety variety_from_string(std::string_view s);

struct VarietyParams {
  double stem_diameter_mean_mm;
  double stem_diameter_sd_mm;
  double peak_cut_force_n;
};

/// Measured peduncle statistics: stem diameter mean/SD and the 30° peak
/// cutting force for each variety.
VarietyParams variety_params(Variety v);

struct KeyPoints {
  Vec3 picking_point;
  Vec3 top;
  Vec3 bottom;
  Vec3 left_grasp;
  Vec3 right_grasp;

  static constexpr std::size_t kCount = 5;
  std::array<Vec3, kCount> as_array() const {
    return {picking_point, top, bottom, left_grasp, right_grasp};
  }
};

struct Berry {
  int id = 0;
  Vec3 flesh_center = Vec3::Zero();
  double flesh_radius = 0.015;  // m
  Vec3 stem_direction = Vec3::UnitZ();  // unit, from flesh towards the plant
  KeyPoints key_points;
  double ripeness = 0.0;
  double stem_diameter_mm = 1.75;
  double mass_kg = 0.03;
  Variety variety = Variety::Generic;
  std::vector<int> occluder_ids;

  /// Moves the flesh and all key-points rigidly.
  void translate(const Vec3& d);
};

/// Builds the five key-points from flesh geometry; PP sits stem_length above
/// the top of the flesh along the stem axis.
KeyPoints make_key_points(const Vec3& flesh_center, double flesh_radius,
                          const Vec3& stem_direction, double stem_length,
                          double grasp_half_width);

struct Punnet {
  static constexpr int kSlots = 6;

  RigidTransform pose;
  double width = 0.12;   // m, along punnet-frame x
  double length = 0.18;  // m, along punnet-frame y
  double margin = 0.02;
  double slot_height = 0.04;
  std::array<std::optional<int>, kSlots> occupancy{};

  /// Slot k of a 2 (columns) x 3 (rows) grid, in the punnet frame.
  Vec3 slot_offset(int k) const;
  std::optional<int> next_free_slot() const;
  bool full() const { return !next_free_slot().has_value(); }
};

struct Scene {
  std::vector<Berry> berries;
  RigidTransform table_pose;
  Punnet punnet;
  std::uint64_t rng_seed = 0;

  const Berry* find(int id) const;
  Berry* find(int id);
  /// Removes a berry and every reference to it in occluder lists.
  void remove_berry(int id);
};

struct SceneConfig {
  int berry_count = 25;
  double ripe_fraction = 0.42;
  double ripeness_threshold = 0.8;
  Variety variety = Variety::Katrina;
  int cluster_count = 6;
  double cluster_spread = 0.03;  // m, SD of berry offset from cluster centre
  // Row extents in the base frame.
  double row_x_min = 0.40, row_x_max = 0.46;
  double row_y_min = -0.25, row_y_max = 0.25;
  double row_z_min = -0.12, row_z_max = 0.12;
  double flesh_radius_min = 0.013, flesh_radius_max = 0.017;
  double stem_length = 0.015;
  double stem_tilt_sd = 0.1;  // rad-ish, lateral component of the stem axis
  double grasp_half_width = 0.004;
  double mass_min_kg = 0.01, mass_max_kg = 0.05;
  double occlusion_radius = 0.04;
  double min_separation = 0.03;
  Vec3 punnet_position{0.10, -0.35, -0.15};

  void validate() const;
};

/// Deterministic for a given (config, seed).
Scene generate_scene(const SceneConfig& config, std::uint64_t seed);

/// Inclusive at the threshold.
inline bool ground_truth_pluckable(const Berry& b, double threshold) {
  return b.ripeness >= threshold;
}

}  // namespace robofruit::scene
