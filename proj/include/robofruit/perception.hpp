#pragma once

// Target localisation from the top camera, association of that target with
// the bottom camera detections, and the adjustment moves used when the
// target is not visible enough from the pre-grasp pose.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robofruit/geometry.hpp"
#include "robofruit/sensors.hpp"

namespace robofruit::perception {

using geometry::BoundingBox;
using geometry::CameraModel;
using geometry::Pixel;
using geometry::Vec3;
using sensors::BottomCameras;
using sensors::Detection;
using sensors::kBottomCameras;

/// Base-frame flesh-centre estimate: the box centre unprojected at the
/// filtered mean mask depth, plus the error carried by the observation.
Vec3 localize_target(const Detection& det, const CameraModel& top_cam,
                     double near = 0.20, double far = 0.50);

struct TargetAssociation {
  std::array<std::optional<std::size_t>, kBottomCameras> match_index{};
  std::array<std::optional<BoundingBox>, kBottomCameras> matched{};
  std::array<double, kBottomCameras> gamma{};
  /// Projection of the target into each camera (absent if behind it).
  std::array<std::optional<Pixel>, kBottomCameras> projected{};
  std::array<Pixel, kBottomCameras> image_center{};
  std::array<bool, kBottomCameras> in_frustum{};

  int match_count() const;
};

/// Per camera, the box with the lowest association error; ties go to the
/// lowest index.
TargetAssociation associate_bottom(
    const Vec3& target_base,
    const std::array<std::vector<BoundingBox>, kBottomCameras>& boxes,
    const BottomCameras& cams);

/// True iff at least two cameras matched with gamma <= gamma_max.
bool visible_in_two(const TargetAssociation& assoc, double gamma_max);

/// Bit set of elementary moves.
enum class AdjustmentMove : std::uint8_t {
  None = 0,
  Back = 1 << 0,
  Left = 1 << 1,
  Right = 1 << 2,
  Up = 1 << 3,
  Down = 1 << 4,
};

constexpr AdjustmentMove operator|(AdjustmentMove a, AdjustmentMove b) {
  return static_cast<AdjustmentMove>(static_cast<std::uint8_t>(a) |
                                     static_cast<std::uint8_t>(b));
}
constexpr bool has(AdjustmentMove set, AdjustmentMove m) {
  return (static_cast<std::uint8_t>(set) & static_cast<std::uint8_t>(m)) != 0;
}
std::string to_string(AdjustmentMove m);

/// Sign rule on the mean projected offset from the image centres; Back when
/// the target is outside every frustum or already centred. Throws
/// PreconditionViolated when the target is already visible in two cameras.
AdjustmentMove propose_adjustment(const TargetAssociation& assoc,
                                  double gamma_max, double deadband_px = 20.0);

/// Base-frame displacement for a move, using the reference camera's axes
/// (Left is the camera's -x, Up its -y, Back its -z).
Vec3 adjustment_displacement(AdjustmentMove move, const CameraModel& reference,
                             double step);

}  // namespace robofruit::perception
