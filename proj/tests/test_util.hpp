#pragma once

#include <cmath>

#include "robofruit/geometry.hpp"
#include "robofruit/rng.hpp"

namespace robofruit::test_support {

inline geometry::Vec3 random_unit(Rng& rng) {
  for (;;) {
    geometry::Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double n = v.norm();
    if (n > 0.1 && n <= 1.0) return v / n;
  }
}

inline geometry::Mat3 random_rotation(Rng& rng) {
  const geometry::Vec3 axis = random_unit(rng);
  return Eigen::AngleAxisd(rng.uniform(-M_PI, M_PI), axis).toRotationMatrix();
}

inline geometry::CameraModel random_camera(Rng& rng) {
  geometry::CameraModel cam;
  cam.intrinsics.width = 160 + static_cast<int>(rng.below(1200));
  cam.intrinsics.height = 120 + static_cast<int>(rng.below(900));
  cam.intrinsics.fx = rng.uniform(100, 1500);
  cam.intrinsics.fy = cam.intrinsics.fx * rng.uniform(0.9, 1.1);
  cam.intrinsics.cx = rng.uniform(0.3, 0.7) * cam.intrinsics.width;
  cam.intrinsics.cy = rng.uniform(0.3, 0.7) * cam.intrinsics.height;
  cam.base_from_camera = geometry::RigidTransform(
      random_rotation(rng),
      geometry::Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
  return cam;
}

/// A point in front of `cam`, inside its image.
inline geometry::Vec3 random_visible_point(const geometry::CameraModel& cam, Rng& rng) {
  const auto& k = cam.intrinsics;
  const double u = rng.uniform(0, k.width), v = rng.uniform(0, k.height);
  const double z = rng.uniform(0.05, 3.0);
  const geometry::Vec3 pc((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
  return cam.base_from_camera.apply(pc);
}

}  // namespace robofruit::test_support
