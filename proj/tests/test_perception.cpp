#include <gtest/gtest.h>

#include <limits>

#include "robofruit/error.hpp"
#include "robofruit/orchestrator.hpp"
#include "robofruit/perception.hpp"
#include "robofruit/scene.hpp"

using namespace robofruit;
using namespace robofruit::perception;

TEST(Perception, ZeroNoiseLocalisationIsExactAndGammaIsZero) {
  const auto rig = orchestrator::Rig::standard();
  sensors::BottomSensorConfig bottom;
  bottom.bbox_jitter_px = 0.0;
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto world = scene::generate_scene(scene::SceneConfig{}, seed);
    const auto dets = sensors::observe_top(world, rig.top_cam, sensors::SensorNoiseModel{},
                                           sensors::DetectorConfig::noise_free(), seed);
    for (const auto& d : dets) {
      const auto* truth = world.find(d.berry_id_truth);
      const Vec3 est = localize_target(d, rig.top_cam);
      EXPECT_LT((est - truth->flesh_center).norm(), 1e-9);
      const auto cams = rig.bottom_cams_at(truth->key_points.picking_point - 0.15 * Vec3::UnitX());
      const auto obs = sensors::observe_bottom(world, cams, bottom, seed);
      const auto assoc = associate_bottom(est, obs.boxes, cams);
      for (std::size_t c = 0; c < kBottomCameras; ++c) {
        for (std::size_t i = 0; i < obs.truth_ids[c].size(); ++i) {
          if (obs.truth_ids[c][i] != truth->id) continue;
          ASSERT_TRUE(assoc.match_index[c].has_value());
          EXPECT_EQ(*assoc.match_index[c], i);
          EXPECT_NEAR(assoc.gamma[c], 0.0, 1e-9);
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Perception, LocalisationAddsObservationError) {
  const auto rig = orchestrator::Rig::standard();
  scene::Scene s;
  scene::Berry b;
  b.flesh_center = Vec3(0.42, 0.01, -0.02);
  b.ripeness = 0.9;
  s.berries.push_back(b);
  auto dets = sensors::observe_top(s, rig.top_cam, sensors::SensorNoiseModel{},
                                   sensors::DetectorConfig::noise_free(), 1);
  ASSERT_EQ(dets.size(), 1u);
  dets[0].depth.per_axis_error = Vec3(0.05, -0.01, 0.02);
  EXPECT_LT((localize_target(dets[0], rig.top_cam) - b.flesh_center - Vec3(0.05, -0.01, 0.02)).norm(),
            1e-9);
  dets[0].depth.berry_mask_depths = {0.9};
  EXPECT_THROW(localize_target(dets[0], rig.top_cam), Error);
}

TEST(Perception, AssociationMatchesBruteForceArgmin) {
  Rng rng(17);
  const auto rig = orchestrator::Rig::standard();
  for (int trial = 0; trial < 300; ++trial) {
    const Vec3 target(rng.uniform(0.38, 0.48), rng.uniform(-0.05, 0.05), rng.uniform(-0.03, 0.05));
    const auto cams = rig.bottom_cams_at(target - Vec3(0.15, 0, 0));
    std::array<std::vector<geometry::BoundingBox>, kBottomCameras> boxes;
    for (auto& list : boxes) {
      const int n = static_cast<int>(rng.below(6));
      for (int i = 0; i < n; ++i) {
        const double u = static_cast<double>(rng.below(32)) * 10, v = static_cast<double>(rng.below(24)) * 10;
        list.push_back({u - 5, v - 5, u + 5, v + 5});
      }
      if (n > 1 && rng.bernoulli(0.3)) list.push_back(list.front());  // exact tie
    }
    const auto assoc = associate_bottom(target, boxes, cams);
    for (std::size_t c = 0; c < kBottomCameras; ++c) {
      const auto px = geometry::project_to_pixel(cams[c], target);
      double best = std::numeric_limits<double>::infinity();
      std::optional<std::size_t> arg;
      for (std::size_t i = 0; i < boxes[c].size(); ++i) {
        const auto ctr = geometry::bbox_center(boxes[c][i]);
        const double g = std::hypot(ctr.u - px.u, ctr.v - px.v);
        if (g < best) {
          best = g;
          arg = i;
        }
      }
      EXPECT_EQ(assoc.match_index[c], arg);
      if (arg) EXPECT_NEAR(assoc.gamma[c], best, 1e-9);
    }
  }
}

TEST(Perception, VisibleInTwoNeedsTwoMatchesUnderGate) {
  TargetAssociation a;
  a.match_index = {0u, 0u, std::nullopt};
  a.gamma = {10.0, 41.0, 0.0};
  EXPECT_FALSE(visible_in_two(a, 40.0));
  a.gamma[1] = 40.0;
  EXPECT_TRUE(visible_in_two(a, 40.0));
  EXPECT_EQ(a.match_count(), 2);
}

TEST(Perception, AdjustmentSignRule) {
  TargetAssociation a;
  for (std::size_t c = 0; c < kBottomCameras; ++c) {
    a.image_center[c] = {160, 120};
    a.in_frustum[c] = true;
  }
  auto set = [&](double u, double v) {
    for (auto& p : a.projected) p = geometry::Pixel{u, v};
  };
  set(100, 120);
  EXPECT_EQ(propose_adjustment(a, 40.0), AdjustmentMove::Left);
  set(220, 60);
  EXPECT_EQ(propose_adjustment(a, 40.0), AdjustmentMove::Right | AdjustmentMove::Up);
  set(165, 200);
  EXPECT_EQ(propose_adjustment(a, 40.0), AdjustmentMove::Down);
  set(165, 125);
  EXPECT_EQ(propose_adjustment(a, 40.0), AdjustmentMove::Back);
  for (auto& f : a.in_frustum) f = false;
  set(1000, 120);
  EXPECT_EQ(propose_adjustment(a, 40.0), AdjustmentMove::Back);
  a.match_index = {0u, 1u, std::nullopt};
  a.gamma = {1.0, 1.0, 0.0};
  EXPECT_THROW(propose_adjustment(a, 40.0), Error);
  EXPECT_EQ(to_string(AdjustmentMove::Left | AdjustmentMove::Down), "Left+Down");
}

TEST(Perception, AdjustmentMovesAlongCameraAxes) {
  const auto rig = orchestrator::Rig::standard();
  const auto cam = rig.bottom_cams_at(Vec3(0.3, 0, 0))[sensors::kMiddle];
  const double step = 0.03;
  const Vec3 left = adjustment_displacement(AdjustmentMove::Left, cam, step);
  EXPECT_NEAR(left.norm(), step, 1e-12);
  EXPECT_LT(cam.to_camera(cam.base_from_camera.translation() + left).x(), 0.0);
  const Vec3 back = adjustment_displacement(AdjustmentMove::Back, cam, step);
  EXPECT_LT(back.dot(cam.optical_axis_in_base()), 0.0);
  const Vec3 diag = adjustment_displacement(AdjustmentMove::Right | AdjustmentMove::Up, cam, step);
  EXPECT_NEAR(diag.norm(), step, 1e-12);
  EXPECT_EQ(adjustment_displacement(AdjustmentMove::None, cam, step), Vec3::Zero());
}

TEST(Perception, MovingTowardProposalReducesOffset) {
  // Following the proposed move shifts the projection toward the image centre.
  const auto rig = orchestrator::Rig::standard();
  const Vec3 target(0.43, 0.06, 0.0);
  Vec3 eff(0.28, 0.0, 0.0);
  const auto cams = rig.bottom_cams_at(eff);
  std::array<std::vector<geometry::BoundingBox>, kBottomCameras> none;
  auto assoc = associate_bottom(target, none, cams);
  const auto move = propose_adjustment(assoc, 40.0);
  ASSERT_TRUE(has(move, AdjustmentMove::Left));
  const double before = std::abs(assoc.projected[sensors::kMiddle]->u - 160);
  eff += adjustment_displacement(move, cams[sensors::kMiddle], 0.03);
  assoc = associate_bottom(target, none, rig.bottom_cams_at(eff));
  EXPECT_LT(std::abs(assoc.projected[sensors::kMiddle]->u - 160), before);
}
