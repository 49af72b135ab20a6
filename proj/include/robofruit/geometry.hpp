#pragma once

// Frames, rigid transforms and the pinhole camera model.
//
// Camera frame convention: z along the optical axis, x to the right and y
// down, so that pixel u grows with x and v grows with y. All world points are
// expressed in the robot base frame unless a name says otherwise.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>

namespace robofruit::geometry {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Pixel {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

double pixel_distance(const Pixel& a, const Pixel& b);

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws InvalidConfig when fx/fy are not positive or the sensor is empty.
  void validate() const;
  Pixel principal_point() const { return {cx, cy}; }
  bool contains(const Pixel& p) const;
};

/// Proper rigid motion x -> R x + t.
class RigidTransform {
 public:
  RigidTransform() = default;
  /// Throws InvalidConfig if rotation is not orthonormal with det +1 (1e-9).
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_rotation(const Vec3& v) const { return rotation_ * v; }
  RigidTransform inverse() const;

  /// (a * b).apply(p) == a.apply(b.apply(p)).
  friend RigidTransform operator*(const RigidTransform& a,
                                  const RigidTransform& b);

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Rotation whose columns are the camera x, y, z axes expressed in the base
/// frame, built from the optical axis and an approximate "down" direction.
Mat3 camera_rotation_looking_along(const Vec3& optical_axis,
                                   const Vec3& image_down_hint);

struct CameraModel {
  Intrinsics intrinsics;
  /// Pose of the camera in the robot base frame.
  RigidTransform base_from_camera;

  Vec3 to_camera(const Vec3& base_point) const {
    return base_from_camera.inverse().apply(base_point);
  }
  Vec3 optical_axis_in_base() const {
    return base_from_camera.rotation().col(2);
  }
  /// Same camera mounted on a moving body: new pose = body * base_from_camera.
  CameraModel moved_by(const RigidTransform& body) const {
    return {intrinsics, body * base_from_camera};
  }
};

struct BoundingBox {
  double xp1 = 0.0;
  double yp1 = 0.0;
  double xp2 = 0.0;
  double yp2 = 0.0;

  /// Throws InvalidConfig unless xp1 <= xp2 and yp1 <= yp2.
  void validate() const;
  double width() const { return xp2 - xp1; }
  double height() const { return yp2 - yp1; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

Pixel bbox_center(const BoundingBox& b);

/// Pinhole projection of a base-frame point. Throws NonPositiveDepth when the
/// point is at or behind the camera plane.
Pixel project_to_pixel(const CameraModel& cam, const Vec3& point_base);

/// Same as project_to_pixel but reports behind-camera points as nullopt.
std::optional<Pixel> try_project(const CameraModel& cam, const Vec3& point_base);

/// Inverse pinhole at a known optical-axis depth, mapped into the base frame
/// as base_from_camera ∘ unproject. Throws NonPositiveDepth for depth <= 0.
Vec3 pixel_depth_to_base(const CameraModel& cam, const Pixel& pixel,
                         double depth);

/// Pixel distance between the projected target and the observed box centre.
double association_error(const CameraModel& cam, const Vec3& target_base,
                         const BoundingBox& observed);

}  // namespace robofruit::geometry
