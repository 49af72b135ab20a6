#include "robofruit/geometry.hpp"

#include <cmath>

#include "robofruit/error.hpp"

namespace robofruit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::NoValidDepth: return "NoValidDepth";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::WindowOutOfBounds: return "WindowOutOfBounds";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NonPositiveLimits: return "NonPositiveLimits";
    case ErrorKind::InvalidAcceleration: return "InvalidAcceleration";
    case ErrorKind::SlotOutOfRange: return "SlotOutOfRange";
    case ErrorKind::SlotOccupied: return "SlotOccupied";
    case ErrorKind::IllegalStateTransition: return "IllegalStateTransition";
    case ErrorKind::RegionOutOfBounds: return "RegionOutOfBounds";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::PunnetFull: return "PunnetFull";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InconsistentTotals: return "InconsistentTotals";
  }
  return "Unknown";
}

}  // namespace robofruit

namespace robofruit::geometry {

double pixel_distance(const Pixel& a, const Pixel& b) {
  return std::hypot(a.u - b.u, a.v - b.v);
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::InvalidConfig, "sensor size must be at least 1x1");
  }
}

bool Intrinsics::contains(const Pixel& p) const {
  return p.u >= 0.0 && p.v >= 0.0 && p.u < width && p.v < height;
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation_)) {
    throw Error(ErrorKind::InvalidConfig,
                "rotation must be orthonormal with determinant +1");
  }
  if (!translation_.allFinite()) {
    throw Error(ErrorKind::InvalidConfig, "translation must be finite");
  }
}

RigidTransform RigidTransform::from_translation(const Vec3& t) {
  return RigidTransform(Mat3::Identity(), t);
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(inv.rotation_ * translation_);
  return inv;
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation_ = a.rotation_ * b.rotation_;
  out.translation_ = a.rotation_ * b.translation_ + a.translation_;
  return out;
}

Mat3 camera_rotation_looking_along(const Vec3& optical_axis,
                                   const Vec3& image_down_hint) {
  const Vec3 z = optical_axis.normalized();
  Vec3 y = image_down_hint - image_down_hint.dot(z) * z;
  if (y.norm() < 1e-12) {
    throw Error(ErrorKind::InvalidConfig, "down hint parallel to optical axis");
  }
  y.normalize();
  const Vec3 x = y.cross(z);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

void BoundingBox::validate() const {
  if (!(xp1 <= xp2) || !(yp1 <= yp2)) {
    throw Error(ErrorKind::InvalidConfig, "bounding box corners out of order");
  }
}

Pixel bbox_center(const BoundingBox& b) {
  return {0.5 * (b.xp1 + b.xp2), 0.5 * (b.yp1 + b.yp2)};
}

std::optional<Pixel> try_project(const CameraModel& cam,
                                 const Vec3& point_base) {
  const Vec3 pc = cam.to_camera(point_base);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const auto& k = cam.intrinsics;
  return Pixel{k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy};
}

Pixel project_to_pixel(const CameraModel& cam, const Vec3& point_base) {
  auto px = try_project(cam, point_base);
  if (!px) {
    throw Error(ErrorKind::NonPositiveDepth, "point at or behind camera plane");
  }
  return *px;
}

Vec3 pixel_depth_to_base(const CameraModel& cam, const Pixel& pixel,
                         double depth) {
  if (!(depth > 0.0)) {
    throw Error(ErrorKind::NonPositiveDepth, "depth must be positive");
  }
  const auto& k = cam.intrinsics;
  const Vec3 pc((pixel.u - k.cx) * depth / k.fx, (pixel.v - k.cy) * depth / k.fy,
                depth);
  return cam.base_from_camera.apply(pc);
}

double association_error(const CameraModel& cam, const Vec3& target_base,
                         const BoundingBox& observed) {
  return pixel_distance(project_to_pixel(cam, target_base),
                        bbox_center(observed));
}

}  // namespace robofruit::geometry
