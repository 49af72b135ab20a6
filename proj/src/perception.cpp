#include "robofruit/perception.hpp"

#include <cmath>

#include "robofruit/error.hpp"

namespace robofruit::perception {

Vec3 localize_target(const Detection& det, const CameraModel& top_cam,
                     double near, double far) {
  const double depth = sensors::filter_and_average_depth(det.depth, near, far);
  return geometry::pixel_depth_to_base(top_cam, geometry::bbox_center(det.bbox),
                                       depth) +
         det.depth.per_axis_error;
}

int TargetAssociation::match_count() const {
  int n = 0;
  for (const auto& m : match_index) n += m.has_value() ? 1 : 0;
  return n;
}

TargetAssociation associate_bottom(
    const Vec3& target_base,
    const std::array<std::vector<BoundingBox>, kBottomCameras>& boxes,
    const BottomCameras& cams) {
  TargetAssociation assoc;
  for (std::size_t c = 0; c < kBottomCameras; ++c) {
    assoc.image_center[c] = cams[c].intrinsics.principal_point();
    assoc.gamma[c] = 0.0;
    const auto px = geometry::try_project(cams[c], target_base);
    assoc.projected[c] = px;
    if (!px) continue;
    assoc.in_frustum[c] = cams[c].intrinsics.contains(*px);
    for (std::size_t i = 0; i < boxes[c].size(); ++i) {
      const double g = geometry::pixel_distance(*px, geometry::bbox_center(boxes[c][i]));
      if (!assoc.match_index[c] || g < assoc.gamma[c]) {
        assoc.match_index[c] = i;
        assoc.matched[c] = boxes[c][i];
        assoc.gamma[c] = g;
      }
    }
  }
  return assoc;
}

bool visible_in_two(const TargetAssociation& assoc, double gamma_max) {
  int n = 0;
  for (std::size_t c = 0; c < kBottomCameras; ++c) {
    if (assoc.match_index[c] && assoc.gamma[c] <= gamma_max) ++n;
  }
  return n >= 2;
}

std::string to_string(AdjustmentMove m) {
  if (m == AdjustmentMove::None) return "None";
  std::string s;
  auto add = [&](AdjustmentMove bit, const char* name) {
    if (!has(m, bit)) return;
    if (!s.empty()) s += '+';
    s += name;
  };
  add(AdjustmentMove::Back, "Back");
  add(AdjustmentMove::Left, "Left");
  add(AdjustmentMove::Right, "Right");
  add(AdjustmentMove::Up, "Up");
  add(AdjustmentMove::Down, "Down");
  return s;
}

AdjustmentMove propose_adjustment(const TargetAssociation& assoc,
                                  double gamma_max, double deadband_px) {
  if (visible_in_two(assoc, gamma_max)) {
    throw Error(ErrorKind::PreconditionViolated,
                "target already visible in two bottom cameras");
  }
  double du = 0.0, dv = 0.0;
  int n = 0;
  bool any_in_frustum = false;
  for (std::size_t c = 0; c < kBottomCameras; ++c) {
    if (!assoc.projected[c]) continue;
    any_in_frustum = any_in_frustum || assoc.in_frustum[c];
    du += assoc.projected[c]->u - assoc.image_center[c].u;
    dv += assoc.projected[c]->v - assoc.image_center[c].v;
    ++n;
  }
  if (n == 0 || !any_in_frustum) return AdjustmentMove::Back;
  du /= n;
  dv /= n;
  AdjustmentMove move = AdjustmentMove::None;
  if (du < -deadband_px) move = move | AdjustmentMove::Left;
  if (du > deadband_px) move = move | AdjustmentMove::Right;
  if (dv < -deadband_px) move = move | AdjustmentMove::Up;
  if (dv > deadband_px) move = move | AdjustmentMove::Down;
  return move == AdjustmentMove::None ? AdjustmentMove::Back : move;
}

Vec3 adjustment_displacement(AdjustmentMove move, const CameraModel& reference,
                             double step) {
  const auto& r = reference.base_from_camera.rotation();
  Vec3 d = Vec3::Zero();
  if (has(move, AdjustmentMove::Back)) d -= r.col(2);
  if (has(move, AdjustmentMove::Left)) d -= r.col(0);
  if (has(move, AdjustmentMove::Right)) d += r.col(0);
  if (has(move, AdjustmentMove::Up)) d -= r.col(1);
  if (has(move, AdjustmentMove::Down)) d += r.col(1);
  return d.norm() > 0.0 ? Vec3(step * d.normalized()) : d;
}

}  // namespace robofruit::perception
