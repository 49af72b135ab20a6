#include "robofruit/picking_head.hpp"

#include <algorithm>
#include <cmath>

#include "robofruit/error.hpp"

namespace robofruit::head {

std::vector<int> open_separators(EffectorState& state, scene::Scene& scene,
                                 int target_id, const Vec3& effector_position,
                                 const SeparatorConfig& config, Rng& rng) {
  if (state.separators != Separators::Closed) {
    throw Error(ErrorKind::IllegalStateTransition, "separators already open");
  }
  scene::Berry* target = scene.find(target_id);
  if (target == nullptr) {
    throw Error(ErrorKind::PreconditionViolated, "unknown target berry");
  }
  if ((effector_position - target->key_points.picking_point).norm() >
      config.engagement_distance) {
    throw Error(ErrorKind::PreconditionViolated,
                "effector outside separator engagement distance");
  }
  state.separators = Separators::Open;

  std::vector<int> displaced;
  const std::vector<int> occluders = target->occluder_ids;
  for (int id : occluders) {
    const scene::Berry* o = scene.find(id);
    if (o == nullptr) continue;
    const Vec3 d = o->flesh_center - target->flesh_center;
    const double lateral = std::hypot(d.y(), d.z());
    if (lateral > config.sweep_half_span) continue;
    if (!rng.bernoulli(config.success_prob)) continue;
    displaced.push_back(id);
  }
  for (int id : displaced) {
    std::erase(target->occluder_ids, id);
    if (scene::Berry* o = scene.find(id)) std::erase(o->occluder_ids, target_id);
  }
  return displaced;
}

void close_separators(EffectorState& state) {
  if (state.separators != Separators::Open) {
    throw Error(ErrorKind::IllegalStateTransition, "separators already closed");
  }
  state.separators = Separators::Closed;
}

std::string_view to_string(CutOutcome o) {
  switch (o) {
    case CutOutcome::Success: return "Success";
    case CutOutcome::PartialCut: return "PartialCut";
    case CutOutcome::Missed: return "Missed";
  }
  return "Missed";
}

double required_cut_force(const scene::Berry& berry) {
  const auto vp = scene::variety_params(berry.variety);
  const double ratio = berry.stem_diameter_mm / vp.stem_diameter_mean_mm;
  return vp.peak_cut_force_n * ratio * ratio;
}

GripCutResult grip_and_cut(EffectorState& state, const scene::Berry& target,
                           const Vec3& commanded_point,
                           const GripCutConfig& config,
                           const motion::ForceParams& force) {
  if (state.gripper != Gripper::Open || state.cutter != Cutter::Idle) {
    throw Error(ErrorKind::IllegalStateTransition,
                "grip requires an open gripper and an idle cutter");
  }
  // One actuator closes the fingers and drives the blade.
  state.gripper = Gripper::Gripping;
  state.cutter = Cutter::Fired;

  GripCutResult r;
  r.required_cut_force = required_cut_force(target);
  const Vec3 offset = commanded_point - target.key_points.picking_point;
  const bool captured = std::abs(offset.y()) <= config.window.half_width &&
                        std::abs(offset.z()) <= config.window.half_height;
  if (!captured || !target.occluder_ids.empty()) {
    r.outcome = CutOutcome::Missed;
    return r;
  }
  if (force.cut_capability < r.required_cut_force) {
    r.outcome = CutOutcome::PartialCut;
    return r;
  }
  r.outcome = CutOutcome::Success;
  state.held_berry = target.id;
  r.residual_stem_mm = std::abs(offset.x()) * 1000.0 + config.blade_to_finger_mm;
  r.residual_warning = r.residual_stem_mm < config.residual_min_mm ||
                       r.residual_stem_mm > config.residual_max_mm;
  return r;
}

void release(EffectorState& state) {
  if (state.gripper != Gripper::Gripping) {
    throw Error(ErrorKind::IllegalStateTransition, "gripper is not closed");
  }
  state.gripper = Gripper::Open;
  state.cutter = Cutter::Idle;
  state.held_berry.reset();
}

void apply_action(EffectorState& state, Action action) {
  switch (action) {
    case Action::OpenSeparators:
      if (state.separators != Separators::Closed) {
        throw Error(ErrorKind::IllegalStateTransition, "separators already open");
      }
      state.separators = Separators::Open;
      return;
    case Action::CloseSeparators:
      close_separators(state);
      return;
    case Action::GripAndCut:
      if (state.gripper != Gripper::Open || state.cutter != Cutter::Idle) {
        throw Error(ErrorKind::IllegalStateTransition,
                    "grip requires an open gripper and an idle cutter");
      }
      state.gripper = Gripper::Gripping;
      state.cutter = Cutter::Fired;
      return;
    case Action::Release:
      release(state);
      return;
  }
}

namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

}  // namespace

Hsv rgb_to_hsv(int r, int g, int b) {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx == 0 ? 0 : round_half_up(255.0 * delta / mx);
  if (delta == 0.0) {
    out.h = 0;
    return out;
  }
  double h;
  if (mx == r) {
    h = 60.0 * (g - b) / delta;
  } else if (mx == g) {
    h = 120.0 + 60.0 * (b - r) / delta;
  } else {
    h = 240.0 + 60.0 * (r - g) / delta;
  }
  if (h < 0.0) h += 360.0;
  out.h = round_half_up(h / 2.0);
  if (out.h >= 180) out.h -= 180;
  return out;
}

void HsvRanges::validate() const {
  for (const auto& r : {range1, range2}) {
    if (r.lower.h > r.upper.h || r.lower.s > r.upper.s || r.lower.v > r.upper.v) {
      throw Error(ErrorKind::InvalidConfig, "HSV range lower bound above upper");
    }
  }
}

double red_mask_ratio(const sensors::ColorPatch& patch, const BoundingBox& region,
                      const HsvRanges& ranges) {
  const int x0 = static_cast<int>(std::lround(region.xp1));
  const int y0 = static_cast<int>(std::lround(region.yp1));
  const int x1 = static_cast<int>(std::lround(region.xp2));
  const int y1 = static_cast<int>(std::lround(region.yp2));
  if (x0 < 0 || y0 < 0 || x1 > patch.width || y1 > patch.height || x1 < x0 ||
      y1 < y0) {
    throw Error(ErrorKind::RegionOutOfBounds, "mask region outside patch");
  }
  const long total = static_cast<long>(x1 - x0) * (y1 - y0);
  if (total < 1) throw Error(ErrorKind::EmptyRegion, "mask region has no pixels");
  long red = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const auto c = patch.at(x, y);
      if (ranges.is_red(rgb_to_hsv(c[0], c[1], c[2]))) ++red;
    }
  }
  return static_cast<double>(red) / static_cast<double>(total);
}

BoundingBox inter_finger_window(const geometry::Intrinsics& k) {
  const double w = std::round(0.30 * k.width);
  const double h = std::round(0.40 * k.height);
  const double x0 = std::round((k.width - w) / 2.0);
  const double y0 = std::round((k.height - h) / 2.0);
  return {x0, y0, x0 + w, y0 + h};
}

}  // namespace robofruit::head
