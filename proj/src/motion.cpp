#include "robofruit/motion.hpp"

#include <cmath>
#include <string>

#include "robofruit/error.hpp"

namespace robofruit::motion {

std::string_view to_string(WaypointLabel l) {
  switch (l) {
    case WaypointLabel::Home: return "home";
    case WaypointLabel::PreGrasp: return "pre_grasp";
    case WaypointLabel::Pick: return "pick";
    case WaypointLabel::PostGrasp: return "post_grasp";
    case WaypointLabel::PunnetSlot: return "punnet_slot";
    case WaypointLabel::Custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(SegmentMode m) { return m == SegmentMode::Lin ? "lin" : "free"; }

std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::Trapezoid: return "trapezoid";
    case Profile::Triangle: return "triangle";
    case Profile::Zero: return "zero";
  }
  return "zero";
}

namespace {

SegmentPlan plan_segment(SegmentMode mode, const Waypoint& start,
                         const Waypoint& goal, double v_max, double a_max) {
  if (!(v_max > 0.0) || !(a_max > 0.0)) {
    throw Error(ErrorKind::NonPositiveLimits, "v_max and a_max must be positive");
  }
  SegmentPlan p;
  p.mode = mode;
  p.start = start;
  p.goal = goal;
  p.v_max = v_max;
  p.a_max = a_max;
  p.length = (goal.position - start.position).norm();
  if (p.length == 0.0) {
    p.profile = Profile::Zero;
    p.duration = 0.0;
  } else if (p.length >= v_max * v_max / a_max) {
    p.profile = Profile::Trapezoid;
    p.duration = v_max / a_max + p.length / v_max;
  } else {
    p.profile = Profile::Triangle;
    p.duration = 2.0 * std::sqrt(p.length / a_max);
  }
  return p;
}

}  // namespace

SegmentPlan plan_lin(const Waypoint& start, const Waypoint& goal, double v_max,
                     double a_max) {
  return plan_segment(SegmentMode::Lin, start, goal, v_max, a_max);
}

SegmentPlan plan_free(const Waypoint& start, const Waypoint& goal, double v_max,
                      double a_max) {
  return plan_segment(SegmentMode::Free, start, goal, v_max, a_max);
}

double distance_at(const SegmentPlan& plan, double t) {
  if (plan.profile == Profile::Zero || t <= 0.0) return 0.0;
  if (t >= plan.duration) return plan.length;
  const double a = plan.a_max;
  if (plan.profile == Profile::Triangle) {
    const double half = 0.5 * plan.duration;
    if (t <= half) return 0.5 * a * t * t;
    const double r = plan.duration - t;
    return plan.length - 0.5 * a * r * r;
  }
  const double t_acc = plan.v_max / a;
  if (t <= t_acc) return 0.5 * a * t * t;
  const double t_dec = plan.duration - t_acc;
  if (t <= t_dec) return 0.5 * a * t_acc * t_acc + plan.v_max * (t - t_acc);
  const double r = plan.duration - t;
  return plan.length - 0.5 * a * r * r;
}

Waypoint pose_at(const SegmentPlan& plan, double t) {
  const double s = plan.length > 0.0 ? distance_at(plan, t) / plan.length : 1.0;
  Waypoint w;
  w.position = plan.start.position + s * (plan.goal.position - plan.start.position);
  w.orientation = plan.start.orientation.slerp(s, plan.goal.orientation);
  w.label = s >= 1.0 ? plan.goal.label : WaypointLabel::Custom;
  return w;
}

void ForceParams::validate() const {
  if (!(mass > 0.0 && g > 0.0 && mu > 0.0 && safety > 0.0 && grip_limit > 0.0 &&
        cut_capability > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "force parameters must be positive");
  }
  if (mu > 1.5) throw Error(ErrorKind::InvalidConfig, "friction coefficient above 1.5");
}

double gripping_force_required(const ForceParams& p, double acceleration) {
  if (acceleration < -p.g) {
    throw Error(ErrorKind::InvalidAcceleration, "acceleration below -g");
  }
  return p.mass * (p.g + acceleration) * p.safety / p.mu;
}

double max_safe_acceleration(const ForceParams& p, double available_force) {
  return std::max(0.0, available_force * p.mu / (p.mass * p.safety) - p.g);
}

Waypoint punnet_slot_pose(const scene::Punnet& punnet, int k) {
  if (k < 0 || k >= scene::Punnet::kSlots) {
    throw Error(ErrorKind::SlotOutOfRange, "slot index " + std::to_string(k));
  }
  if (punnet.occupancy[static_cast<std::size_t>(k)]) {
    throw Error(ErrorKind::SlotOccupied, "slot " + std::to_string(k));
  }
  Waypoint w;
  w.position = punnet.pose.apply(punnet.slot_offset(k));
  w.orientation = Quat(punnet.pose.rotation());
  w.label = WaypointLabel::PunnetSlot;
  return w;
}

}  // namespace robofruit::motion
