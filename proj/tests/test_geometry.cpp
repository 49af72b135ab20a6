#include <gtest/gtest.h>

#include "robofruit/error.hpp"
#include "robofruit/geometry.hpp"
#include "test_util.hpp"

using namespace robofruit;
using namespace robofruit::geometry;

TEST(Geometry, ProjectUnprojectRoundTrip) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const CameraModel cam = test_support::random_camera(rng);
    const Vec3 p = test_support::random_visible_point(cam, rng);
    const Pixel px = project_to_pixel(cam, p);
    const double depth = cam.to_camera(p).z();
    const Vec3 back = pixel_depth_to_base(cam, px, depth);
    EXPECT_NEAR(pixel_distance(project_to_pixel(cam, back), px), 0.0, 1e-9);
    EXPECT_LT((back - p).norm(), 1e-9);
  }
}

TEST(Geometry, ProjectionMatchesHandComputedPinhole) {
  CameraModel cam;
  cam.intrinsics = {500, 400, 320, 240, 640, 480};
  const Pixel p = project_to_pixel(cam, Vec3(0.1, -0.05, 2.0));
  EXPECT_DOUBLE_EQ(p.u, 500 * 0.05 + 320);
  EXPECT_DOUBLE_EQ(p.v, 400 * -0.025 + 240);
}

TEST(Geometry, BehindCameraThrows) {
  CameraModel cam;
  cam.intrinsics = {500, 500, 320, 240, 640, 480};
  try {
    project_to_pixel(cam, Vec3(0, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveDepth);
  }
  EXPECT_FALSE(try_project(cam, Vec3(0, 0, -1)).has_value());
  EXPECT_THROW(pixel_depth_to_base(cam, {1, 1}, 0.0), Error);
}

TEST(Geometry, TransformCompositionAndInverse) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const RigidTransform a(test_support::random_rotation(rng), Vec3::Random());
    const RigidTransform b(test_support::random_rotation(rng), Vec3::Random());
    const Vec3 p = Vec3::Random();
    EXPECT_LT(((a * b).apply(p) - a.apply(b.apply(p))).norm(), 1e-12);
    EXPECT_LT((a.inverse().apply(a.apply(p)) - p).norm(), 1e-12);
  }
}

TEST(Geometry, RejectsNonRotation) {
  Mat3 r = Mat3::Identity();
  r(0, 0) = -1.0;  // reflection
  EXPECT_FALSE(is_rotation(r));
  EXPECT_THROW(RigidTransform(r, Vec3::Zero()), Error);
  EXPECT_THROW(RigidTransform(2.0 * Mat3::Identity(), Vec3::Zero()), Error);
}

TEST(Geometry, LookAlongBuildsCameraAxes) {
  const Mat3 r = camera_rotation_looking_along(Vec3(1, 0, 0), Vec3(0, 0, -1));
  EXPECT_TRUE(is_rotation(r));
  EXPECT_LT((r.col(2) - Vec3::UnitX()).norm(), 1e-12);
  EXPECT_LT((r.col(1) + Vec3::UnitZ()).norm(), 1e-12);
  // Right-handed: camera x is base -y when looking along +x with z up.
  EXPECT_LT((r.col(0) + Vec3::UnitY()).norm(), 1e-12);
}

TEST(Geometry, AssociationErrorIsZeroAtProjectedCentre) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const CameraModel cam = test_support::random_camera(rng);
    const Vec3 p = test_support::random_visible_point(cam, rng);
    const Pixel c = project_to_pixel(cam, p);
    const BoundingBox box{c.u - 7, c.v - 3, c.u + 7, c.v + 3};
    EXPECT_NEAR(association_error(cam, p, box), 0.0, 1e-9);
    const BoundingBox shifted{c.u - 4, c.v + 1, c.u + 10, c.v + 7};
    EXPECT_NEAR(association_error(cam, p, shifted), 5.0, 1e-9);
  }
}

TEST(Geometry, BoxValidation) {
  EXPECT_THROW((BoundingBox{2, 0, 1, 1}.validate()), Error);
  EXPECT_NO_THROW((BoundingBox{0, 0, 0, 0}.validate()));
  const Pixel c = bbox_center({0, 2, 4, 6});
  EXPECT_EQ(c, (Pixel{2, 4}));
}

TEST(Geometry, IntrinsicsValidation) {
  EXPECT_THROW((Intrinsics{0, 1, 0, 0, 10, 10}.validate()), Error);
  EXPECT_THROW((Intrinsics{1, 1, 0, 0, 0, 10}.validate()), Error);
  const Intrinsics k{1, 1, 0, 0, 10, 10};
  EXPECT_TRUE(k.contains({0, 0}));
  EXPECT_FALSE(k.contains({10, 5}));
}
