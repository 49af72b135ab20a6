#pragma once

// Way-point timing for straight-line (LIN) and free segments, and the
// gripping-force acceleration limit for carrying a detached berry.

#include <Eigen/Geometry>

#include <string_view>

#include "robofruit/geometry.hpp"
#include "robofruit/scene.hpp"

namespace robofruit::motion {

using geometry::Vec3;
using Quat = Eigen::Quaterniond;

enum class WaypointLabel { Home, PreGrasp, Pick, PostGrasp, PunnetSlot, Custom };
std::string_view to_string(WaypointLabel l);

struct Waypoint {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  WaypointLabel label = WaypointLabel::Custom;
};

enum class SegmentMode { Lin, Free };
enum class Profile { Trapezoid, Triangle, Zero };
std::string_view to_string(SegmentMode m);
std::string_view to_string(Profile p);

struct SegmentPlan {
  SegmentMode mode = SegmentMode::Lin;
  double length = 0.0;
  double v_max = 1.0;
  double a_max = 1.0;
  double duration = 0.0;
  Profile profile = Profile::Zero;
  Waypoint start;
  Waypoint goal;
};

/// Straight-line segment with a trapezoidal (or, when too short to reach
/// v_max, triangular) speed profile. Throws NonPositiveLimits.
SegmentPlan plan_lin(const Waypoint& start, const Waypoint& goal, double v_max,
                     double a_max);

/// Free-space segment; the sampled path is abstracted to the straight-line
/// distance with the same timing kernel.
SegmentPlan plan_free(const Waypoint& start, const Waypoint& goal, double v_max,
                      double a_max);

/// Distance travelled along the segment at time t (clamped to [0, duration]).
double distance_at(const SegmentPlan& plan, double t);

/// Pose at time t: linear in position, slerp in orientation.
Waypoint pose_at(const SegmentPlan& plan, double t);

struct ForceParams {
  double mass = 0.05;  // kg, design upper bound for one berry
  double g = 9.81;
  double mu = 0.3;
  double safety = 2.0;
  double grip_limit = 10.0;      // N
  double cut_capability = 15.0;  // N

  void validate() const;
};

/// F = m (g + a) S / mu. Throws InvalidAcceleration for a < -g.
double gripping_force_required(const ForceParams& p, double acceleration);

/// Inverse of gripping_force_required, floored at 0.
double max_safe_acceleration(const ForceParams& p, double available_force);

/// Pose of punnet slot k in the base frame (same orientation as the punnet).
/// Throws SlotOutOfRange or SlotOccupied.
Waypoint punnet_slot_pose(const scene::Punnet& punnet, int k);

/// Keeps way-points on the picking side of the table: normal . p <= offset.
struct HalfSpace {
  Vec3 normal = Vec3::UnitX();
  double offset = 0.55;

  bool contains(const Vec3& p) const { return normal.dot(p) <= offset; }
};

}  // namespace robofruit::motion
