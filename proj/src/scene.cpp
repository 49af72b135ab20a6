#include "robofruit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robofruit/error.hpp"
#include "robofruit/rng.hpp"

namespace robofruit::scene {

namespace {

// Berries per bay; larger scenes extend the row along y bay by bay so the
// separation constraint stays satisfiable.
constexpr int kBerriesPerBay = 30;
constexpr double kBayGap = 0.10;

}  // namespace

std::string_view to_string(Variety v) {
  switch (v) {
    case Variety::Katrina: return "Katrina";
    case Variety::Zara: return "Zara";
    case Variety::Generic: return "Generic";
  }
  return "Generic";
}

Variety variety_from_string(std::string_view s) {
  if (s == "Katrina") return Variety::Katrina;
  if (s == "Zara") return Variety::Zara;
  if (s == "Generic") return Variety::Generic;
  throw Error(ErrorKind::InvalidConfig, "unknown variety '" + std::string(s) + "'");
}

VarietyParams variety_params(Variety v) {
  switch (v) {
    case Variety::Katrina: return {1.75, 0.24, 7.20};
    case Variety::Zara: return {1.76, 0.25, 5.80};
    case Variety::Generic: return {1.755, 0.245, 7.20};
  }
  return {1.755, 0.245, 7.20};
}

KeyPoints make_key_points(const Vec3& flesh_center, double flesh_radius,
                          const Vec3& stem_direction, double stem_length,
                          double grasp_half_width) {
  const Vec3 axis = stem_direction.normalized();
  // Grasp points straddle the stem across the row (base y), orthogonalised
  // against the stem axis.
  Vec3 across = Vec3::UnitY() - Vec3::UnitY().dot(axis) * axis;
  across.normalize();
  KeyPoints kp;
  kp.top = flesh_center + flesh_radius * axis;
  kp.picking_point = kp.top + stem_length * axis;
  kp.bottom = flesh_center - 1.2 * flesh_radius * axis;
  kp.left_grasp = kp.picking_point + grasp_half_width * across;
  kp.right_grasp = kp.picking_point - grasp_half_width * across;
  return kp;
}

Vec3 Punnet::slot_offset(int k) const {
  if (k < 0 || k >= kSlots) {
    throw Error(ErrorKind::SlotOutOfRange, "slot index " + std::to_string(k));
  }
  const int col = k % 2;
  const int row = k / 2;
  const double col_step = width / 2.0 - margin;
  const double row_step = length / 2.0 - margin;
  return {(col - 0.5) * col_step, (row - 1) * row_step, slot_height};
}

std::optional<int> Punnet::next_free_slot() const {
  for (int k = 0; k < kSlots; ++k) {
    if (!occupancy[k]) return k;
  }
  return std::nullopt;
}

void Berry::translate(const Vec3& d) {
  flesh_center += d;
  key_points.picking_point += d;
  key_points.top += d;
  key_points.bottom += d;
  key_points.left_grasp += d;
  key_points.right_grasp += d;
}

const Berry* Scene::find(int id) const {
  for (const auto& b : berries) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

Berry* Scene::find(int id) {
  for (auto& b : berries) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

void Scene::remove_berry(int id) {
  std::erase_if(berries, [id](const Berry& b) { return b.id == id; });
  for (auto& b : berries) std::erase(b.occluder_ids, id);
}

void SceneConfig::validate() const {
  if (berry_count < 0) throw Error(ErrorKind::InvalidConfig, "berry_count < 0");
  if (!(ripe_fraction >= 0.0 && ripe_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "ripe_fraction outside [0,1]");
  }
  if (cluster_count < 1) throw Error(ErrorKind::InvalidConfig, "cluster_count < 1");
  if (cluster_spread < 0.0 || occlusion_radius < 0.0 || min_separation < 0.0 ||
      stem_length < 0.0 || grasp_half_width <= 0.0) {
    throw Error(ErrorKind::InvalidConfig, "negative radius or length");
  }
  if (!(flesh_radius_min > 0.0) || flesh_radius_max < flesh_radius_min) {
    throw Error(ErrorKind::InvalidConfig, "invalid flesh radius range");
  }
  if (!(mass_min_kg > 0.0) || mass_max_kg < mass_min_kg) {
    throw Error(ErrorKind::InvalidConfig, "invalid mass range");
  }
  if (row_x_max < row_x_min || row_y_max < row_y_min || row_z_max < row_z_min) {
    throw Error(ErrorKind::InvalidConfig, "invalid row extents");
  }
}

Scene generate_scene(const SceneConfig& config, std::uint64_t seed) {
  config.validate();
  Scene scene;
  scene.rng_seed = seed;
  scene.punnet.pose = RigidTransform::from_translation(config.punnet_position);

  Rng rng(derive_seed(seed, 1));
  const VarietyParams vp = variety_params(config.variety);
  const double bay_span = config.row_y_max - config.row_y_min;

  std::vector<int> bay_of;
  const int n = config.berry_count;
  scene.berries.reserve(static_cast<std::size_t>(n));

  const int bays = (n + kBerriesPerBay - 1) / kBerriesPerBay;
  for (int bay = 0; bay < bays; ++bay) {
    const double y0 = config.row_y_min + bay * (bay_span + kBayGap);
    const int in_bay = std::min(kBerriesPerBay, n - bay * kBerriesPerBay);
    std::vector<Vec3> centres;
    for (int c = 0; c < config.cluster_count; ++c) {
      centres.emplace_back(
          rng.uniform(config.row_x_min, config.row_x_max),
          y0 + bay_span * (c + rng.uniform(0.25, 0.75)) / config.cluster_count,
          rng.uniform(config.row_z_min, config.row_z_max));
    }
    const std::size_t bay_start = scene.berries.size();
    for (int i = 0; i < in_bay; ++i) {
      const Vec3& cc = centres[static_cast<std::size_t>(i % config.cluster_count)];
      auto clear = [&](const Vec3& p) {
        for (std::size_t j = bay_start; j < scene.berries.size(); ++j) {
          if ((scene.berries[j].flesh_center - p).norm() < config.min_separation) {
            return false;
          }
        }
        return true;
      };
      auto in_row = [&](const Vec3& p) {
        return p.x() >= config.row_x_min && p.x() <= config.row_x_max && p.y() >= y0 &&
               p.y() <= y0 + bay_span && p.z() >= config.row_z_min &&
               p.z() <= config.row_z_max;
      };
      Vec3 p = cc;
      bool placed = false;
      for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
        p = cc + Vec3(rng.normal(0.0, config.cluster_spread),
                      rng.normal(0.0, config.cluster_spread),
                      rng.normal(0.0, config.cluster_spread));
        placed = in_row(p) && clear(p);
      }
      for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
        p = Vec3(rng.uniform(config.row_x_min, config.row_x_max),
                 rng.uniform(y0, y0 + bay_span),
                 rng.uniform(config.row_z_min, config.row_z_max));
        placed = clear(p);
      }

      Berry b;
      b.id = static_cast<int>(scene.berries.size());
      b.flesh_center = p;
      b.flesh_radius = rng.uniform(config.flesh_radius_min, config.flesh_radius_max);
      b.stem_direction = Vec3(rng.normal(0.0, config.stem_tilt_sd),
                              rng.normal(0.0, config.stem_tilt_sd), 1.0)
                             .normalized();
      b.key_points = make_key_points(b.flesh_center, b.flesh_radius,
                                     b.stem_direction, config.stem_length,
                                     config.grasp_half_width);
      b.stem_diameter_mm = rng.truncated_normal(vp.stem_diameter_mean_mm,
                                                vp.stem_diameter_sd_mm, 3.0);
      b.mass_kg = rng.uniform(config.mass_min_kg, config.mass_max_kg);
      b.variety = config.variety;
      scene.berries.push_back(std::move(b));
      bay_of.push_back(bay);
    }
  }

  // Ripe subset of exactly round(fraction * n) berries.
  const auto n_ripe =
      static_cast<std::size_t>(std::llround(config.ripe_fraction * n));
  std::vector<std::size_t> order(scene.berries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& b = scene.berries[order[k]];
    b.ripeness = k < n_ripe ? rng.uniform(config.ripeness_threshold, 1.0)
                            : rng.uniform(0.0, 0.9 * config.ripeness_threshold);
  }

  // Proximity occlusion; symmetric by construction.
  for (std::size_t i = 0; i < scene.berries.size(); ++i) {
    for (std::size_t j = i + 1; j < scene.berries.size(); ++j) {
      if (bay_of[i] != bay_of[j]) continue;
      auto& a = scene.berries[i];
      auto& b = scene.berries[j];
      if ((a.flesh_center - b.flesh_center).norm() < config.occlusion_radius) {
        a.occluder_ids.push_back(b.id);
        b.occluder_ids.push_back(a.id);
      }
    }
  }
  return scene;
}

}  // namespace robofruit::scene
