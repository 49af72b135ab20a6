#pragma once

// Simulated top depth camera and the three bottom colour cameras.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "robofruit/geometry.hpp"
#include "robofruit/scene.hpp"

namespace robofruit::sensors {

using geometry::BoundingBox;
using geometry::CameraModel;
using geometry::Pixel;
using geometry::Vec3;

enum class PredictedClass { Pluckable, Unpluckable };

struct DepthObservation {
  /// Depth pixels under the berry's segmentation mask (camera z, metres).
  std::vector<double> berry_mask_depths;
  /// Localisation error injected in the base frame.
  Vec3 per_axis_error = Vec3::Zero();
};

struct SensorNoiseModel {
  Vec3 mean_error = Vec3::Zero();
  Vec3 sd_error = Vec3::Zero();
  double dropout_below = 0.15;
  double dropout_above = 0.60;

  /// Per-axis picking-point error statistics measured in the field:
  /// x 0.062/0.012, y 0.009/0.014, z -0.019/0.016 m (mean/SD).
  static SensorNoiseModel field_model();
  void validate() const;
};

struct DetectorConfig {
  double miss_prob = 0.0;
  double class_error_prob = 0.05;
  double bbox_jitter_px = 2.0;  // uniform ± per corner
  double ripeness_threshold = 0.8;
  int mask_pixels = 40;
  double mask_depth_sd = 0.004;
  /// Fraction of mask pixels replaced by out-of-range depths (background
  /// bleed and near-range dropouts) which the depth filter must reject.
  double mask_outlier_fraction = 0.1;

  static DetectorConfig noise_free();
};

struct Detection {
  int berry_id_truth = -1;  // scoring only
  BoundingBox bbox;
  PredictedClass predicted_class = PredictedClass::Pluckable;
  std::array<Pixel, scene::KeyPoints::kCount> key_points_px{};
  DepthObservation depth;
};

std::vector<Detection> observe_top(const scene::Scene& scene,
                                   const CameraModel& top_cam,
                                   const SensorNoiseModel& noise,
                                   const DetectorConfig& detector,
                                   std::uint64_t seed);

/// Mean of the depths strictly inside (near, far). Throws NoValidDepth when
/// nothing survives and PreconditionViolated when near >= far.
double filter_and_average_depth(const DepthObservation& obs, double near = 0.20,
                                double far = 0.50);

constexpr std::size_t kBottomCameras = 3;
enum BottomCamera : std::size_t { kRight = 0, kMiddle = 1, kLeft = 2 };

using BottomCameras = std::array<CameraModel, kBottomCameras>;

struct BottomObservation {
  std::array<std::vector<BoundingBox>, kBottomCameras> boxes;
  std::array<std::vector<int>, kBottomCameras> truth_ids;  // scoring only
};

struct BottomSensorConfig {
  double bbox_jitter_px = 2.0;
  /// Berries closer than this to a camera along its optical axis are hidden
  /// by the picking-head body.
  double head_plane_depth = 0.03;
  /// The bottom detectors share the ripeness classifier; only boxes of
  /// pluckable berries are reported.
  bool pluckable_only = true;
  double ripeness_threshold = 0.8;
};

BottomObservation observe_bottom(const scene::Scene& scene,
                                 const BottomCameras& cams,
                                 const BottomSensorConfig& config,
                                 std::uint64_t seed);

/// Projected box of a berry's flesh (ellipse extents), no jitter.
std::optional<BoundingBox> project_flesh_box(const CameraModel& cam,
                                             const scene::Berry& berry);

struct ColorPatch {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major triples

  std::array<std::uint8_t, 3> at(int x, int y) const {
    const auto i = static_cast<std::size_t>(3 * (y * width + x));
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  void set(int x, int y, std::array<std::uint8_t, 3> c) {
    const auto i = static_cast<std::size_t>(3 * (y * width + x));
    rgb[i] = c[0];
    rgb[i + 1] = c[1];
    rgb[i + 2] = c[2];
  }
};

struct RenderOptions {
  double glare_prob = 0.0;
  double ripeness_threshold = 0.8;
  std::uint64_t seed = 0;
};

/// Rasterises berries visible through `window` (image pixels, integer
/// corners, within the sensor). Throws WindowOutOfBounds otherwise.
ColorPatch render_bottom_patch(const scene::Scene& scene,
                               const CameraModel& cam,
                               const BoundingBox& window,
                               const RenderOptions& options = {});

/// Binary PPM (P6).
void write_ppm(const ColorPatch& patch, std::ostream& out);

}  // namespace robofruit::sensors
