#pragma once

// Picking-head model: separator fingers, gripper fingers and a cutter driven
// by the gripper actuator, plus the red-pixel mask ratio used for cutting
// confirmation and picking validation.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "robofruit/geometry.hpp"
#include "robofruit/motion.hpp"
#include "robofruit/rng.hpp"
#include "robofruit/scene.hpp"
#include "robofruit/sensors.hpp"

namespace robofruit::head {

using geometry::BoundingBox;
using geometry::Vec3;

enum class Separators { Closed, Open };
enum class Gripper { Open, Gripping };
enum class Cutter { Idle, Fired };

struct EffectorState {
  Separators separators = Separators::Closed;
  Gripper gripper = Gripper::Open;
  Cutter cutter = Cutter::Idle;
  std::optional<int> held_berry;

  /// The cutter can only be fired while the gripper is closed.
  bool coupling_holds() const {
    return cutter == Cutter::Idle || gripper == Gripper::Gripping;
  }
};

struct CaptureWindow {
  double half_width = 0.012;   // m, base y
  double half_height = 0.012;  // m, base z
};

struct SeparatorConfig {
  double sweep_half_span = 0.05;       // m, lateral reach of the separators
  double engagement_distance = 0.06;   // m, effector to picking point
  double success_prob = 0.95;          // per displaced occluder
};

/// Displaces the target's occluders within the sweep span (each with
/// success_prob) and opens the separators. Returns the displaced ids.
/// Throws IllegalStateTransition when the separators are already open and
/// PreconditionViolated when the effector is too far from the target.
std::vector<int> open_separators(EffectorState& state, scene::Scene& scene,
                                 int target_id, const Vec3& effector_position,
                                 const SeparatorConfig& config, Rng& rng);

void close_separators(EffectorState& state);

enum class CutOutcome { Success, PartialCut, Missed };
std::string_view to_string(CutOutcome o);

struct GripCutConfig {
  CaptureWindow window;
  double blade_to_finger_mm = 8.0;
  /// Residual stems outside this band are flagged, not failed.
  double residual_min_mm = 5.0;
  double residual_max_mm = 20.0;
};

struct GripCutResult {
  CutOutcome outcome = CutOutcome::Missed;
  double required_cut_force = 0.0;  // N
  double residual_stem_mm = 0.0;
  bool residual_warning = false;
};

/// Peak cutting force for this berry: the variety peak scaled by
/// (stem diameter / variety mean diameter)^2.
double required_cut_force(const scene::Berry& berry);

/// Closes the gripper, which fires the cutter. Throws IllegalStateTransition
/// unless the gripper is open and the cutter idle.
GripCutResult grip_and_cut(EffectorState& state, const scene::Berry& target,
                           const Vec3& commanded_point,
                           const GripCutConfig& config,
                           const motion::ForceParams& force);

/// Opens the gripper (dropping anything held) and re-arms the cutter.
void release(EffectorState& state);

enum class Action { OpenSeparators, CloseSeparators, GripAndCut, Release };

/// State-only transition used for legality checks; throws
/// IllegalStateTransition for actions not allowed in `state`.
void apply_action(EffectorState& state, Action action);

struct Hsv {
  int h = 0;  // [0, 179]
  int s = 0;  // [0, 255]
  int v = 0;  // [0, 255]
  friend bool operator==(const Hsv&, const Hsv&) = default;
};

/// Hexcone HSV with hue halved, rounded half-up; hue 180 wraps to 0.
Hsv rgb_to_hsv(int r, int g, int b);

struct HsvRange {
  Hsv lower;
  Hsv upper;
  bool contains(const Hsv& c) const {
    return c.h >= lower.h && c.h <= upper.h && c.s >= lower.s && c.s <= upper.s &&
           c.v >= lower.v && c.v <= upper.v;
  }
};

/// Two red bands, either side of the hue wrap-around.
struct HsvRanges {
  HsvRange range1{{0, 100, 20}, {10, 255, 255}};
  HsvRange range2{{160, 100, 20}, {179, 255, 255}};

  bool is_red(const Hsv& c) const { return range1.contains(c) || range2.contains(c); }
  void validate() const;
};

/// Red pixels over total pixels inside `region` (patch coordinates, integer
/// corners, half-open). Throws RegionOutOfBounds or EmptyRegion.
double red_mask_ratio(const sensors::ColorPatch& patch, const BoundingBox& region,
                      const HsvRanges& ranges = {});

inline bool cutting_confirmed(double mask_ratio, double threshold_confirm) {
  return mask_ratio >= threshold_confirm;
}

inline bool picking_validated(double mask_ratio_after_retreat,
                              double threshold_validate) {
  return mask_ratio_after_retreat >= threshold_validate;
}

/// Central 30% x 40% of the image: the area between the gripper fingers.
BoundingBox inter_finger_window(const geometry::Intrinsics& k);

}  // namespace robofruit::head
