#include <gtest/gtest.h>

#include <memory>

#include "robofruit/config.hpp"
#include "robofruit/error.hpp"
#include "robofruit/orchestrator.hpp"

using namespace robofruit;
using namespace robofruit::orchestrator;

namespace {

const TrialConfig& calibrated_with_model() {
  static const TrialConfig cfg = [] {
    auto sim = config::profile_defaults("calibrated");
    config::attach_gpr_model(sim);
    return sim.trial;
  }();
  return cfg;
}

}  // namespace

TEST(Orchestrator, GoldenPathHarvestsEverything) {
  const auto cfg = TrialConfig::golden();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto world = scene::generate_scene(scene::SceneConfig{}, seed);
    const auto log = run_trial(world, cfg, seed);
    EXPECT_TRUE(log.consistent());
    EXPECT_EQ(log.pluckable, log.detected_pluckable);
    EXPECT_EQ(log.successes, log.pluckable) << "seed " << seed;
    EXPECT_EQ(log.attempt_count(), log.pluckable);
    EXPECT_EQ(log.false_positive_attempts, 0);
    for (const auto& a : log.attempts) {
      EXPECT_EQ(a.outcome, Outcome::Success);
      EXPECT_EQ(a.attempt_index, 1);
      EXPECT_NEAR(a.duration, time_model(a, cfg.time), 1e-9);
      EXPECT_FALSE(a.residual_warning);
    }
  }
}

TEST(Orchestrator, GoldenPickTimes) {
  const auto cfg = TrialConfig::golden();
  double sum = 0.0;
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto log = run_trial(scene::generate_scene(scene::SceneConfig{}, seed), cfg, seed);
    for (const auto& a : log.attempts) {
      EXPECT_GE(a.duration, 21.0);
      EXPECT_LE(a.duration, 35.0);
      sum += a.duration;
      ++n;
    }
  }
  ASSERT_GT(n, 0);
  EXPECT_GE(sum / n, 25.0);
  EXPECT_LE(sum / n, 31.0);
}

TEST(Orchestrator, SameSeedSameLog) {
  const auto& cfg = calibrated_with_model();
  for (std::uint64_t seed : {3u, 17u}) {
    const auto world = scene::generate_scene(scene::SceneConfig{}, seed);
    const auto a = config::trial_log_to_json(run_trial(world, cfg, seed)).dump();
    const auto b = config::trial_log_to_json(run_trial(world, cfg, seed)).dump();
    EXPECT_EQ(a, b);
  }
}

TEST(Orchestrator, CalibratedLogsAreConsistent) {
  const auto& cfg = calibrated_with_model();
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto log = run_trial(scene::generate_scene(scene::SceneConfig{}, seed), cfg, seed);
    EXPECT_TRUE(log.consistent()) << "seed " << seed;
    failures += log.attempt_count() - log.successes;
    for (const auto& a : log.attempts) {
      if (a.outcome == Outcome::DetectionMiss) {
        EXPECT_EQ(a.attempt_index, 0);
        EXPECT_TRUE(a.segments.empty());
      } else {
        EXPECT_GE(a.attempt_index, 1);
        EXPECT_LE(a.attempt_index, cfg.retries + 1);
      }
    }
  }
  EXPECT_GT(failures, 0);
}

TEST(Orchestrator, CarryAccelerationRespectsGripLimit) {
  const auto& cfg = calibrated_with_model();
  const double cap = motion::max_safe_acceleration(cfg.force, cfg.force.grip_limit);
  int carried = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto log = run_trial(scene::generate_scene(scene::SceneConfig{}, seed), cfg, seed);
    for (const auto& a : log.attempts) {
      for (const auto& s : a.segments) {
        if (s.start.label == motion::WaypointLabel::Pick ||
            s.start.label == motion::WaypointLabel::PostGrasp) {
          EXPECT_LE(s.a_max, cap);
          ++carried;
        }
      }
    }
  }
  EXPECT_GT(carried, 0);
}

TEST(Orchestrator, InjectionRatesReproduceCounts) {
  const auto f = FailureInjection::from_attempt_counts(201, 17, 26, 9, 6);
  const double n = 201;
  EXPECT_NEAR(n * f.position, 17, 1e-9);
  EXPECT_NEAR(n * (1 - f.position) * f.cut_command, 26, 1e-9);
  EXPECT_NEAR(n * (1 - f.position) * (1 - f.cut_command) * f.grip_cut, 9, 1e-9);
  EXPECT_NEAR(n * (1 - f.position) * (1 - f.cut_command) * (1 - f.grip_cut) * f.validation, 6, 1e-9);
  EXPECT_THROW(FailureInjection::from_attempt_counts(0, 0, 0, 0, 0), Error);
}

TEST(Orchestrator, ForcedStageFailures) {
  const auto world = scene::generate_scene(scene::SceneConfig{}, 2);
  struct Case {
    double FailureInjection::*field;
    Outcome expect;
  };
  for (const Case c : {Case{&FailureInjection::position, Outcome::PositionFailure},
                       Case{&FailureInjection::cut_command, Outcome::CutCommandFailure},
                       Case{&FailureInjection::grip_cut, Outcome::GripCutFailure},
                       Case{&FailureInjection::validation, Outcome::ValidationFailure}}) {
    auto cfg = TrialConfig::golden();
    cfg.injection.*c.field = 1.0;
    const auto log = run_trial(world, cfg, 2);
    EXPECT_TRUE(log.consistent());
    EXPECT_EQ(log.successes, 0);
    EXPECT_GT(log.count(c.expect), 0);
    EXPECT_EQ(log.count(c.expect), log.attempt_count());
    // Validation failures drop the berry, so they are never retried.
    const int per_berry = c.expect == Outcome::ValidationFailure ? 1 : cfg.retries + 1;
    EXPECT_EQ(log.attempt_count(), per_berry * log.pluckable);
  }
}

TEST(Orchestrator, DetectionMissesAreRecorded) {
  auto cfg = TrialConfig::golden();
  cfg.detector.miss_prob = 1.0;
  const auto log = run_trial(scene::generate_scene(scene::SceneConfig{}, 5), cfg, 5);
  EXPECT_EQ(log.detected_pluckable, 0);
  EXPECT_EQ(log.count(Outcome::DetectionMiss), log.pluckable);
  EXPECT_EQ(log.attempt_count(), 0);
  EXPECT_TRUE(log.consistent());
}

TEST(Orchestrator, PoliciesHarvestTheSameBerries) {
  auto cfg = TrialConfig::golden();
  const auto world = scene::generate_scene(scene::SceneConfig{}, 6);
  const auto a = run_trial(world, cfg, 6);
  cfg.policy = scheduler::Policy::MinMax;
  const auto b = run_trial(world, cfg, 6);
  EXPECT_EQ(a.successes, b.successes);
  std::vector<int> ia, ib;
  for (const auto& r : a.attempts) ia.push_back(r.berry_id);
  for (const auto& r : b.attempts) ib.push_back(r.berry_id);
  std::sort(ia.begin(), ia.end());
  std::sort(ib.begin(), ib.end());
  EXPECT_EQ(ia, ib);
}

TEST(Orchestrator, FullPunnetIsReplacedOrEndsTrial) {
  scene::SceneConfig sc;
  sc.berry_count = 30;
  sc.ripe_fraction = 0.5;
  const auto world = scene::generate_scene(sc, 4);
  auto cfg = TrialConfig::golden();
  const auto swapped = run_trial(world, cfg, 4);
  EXPECT_EQ(swapped.successes, 15);
  EXPECT_EQ(swapped.punnet_swaps, 2);
  EXPECT_TRUE(swapped.ended_early.empty());
  cfg.replace_full_punnet = false;
  const auto stopped = run_trial(world, cfg, 4);
  EXPECT_EQ(stopped.successes, 6);
  EXPECT_EQ(stopped.ended_early, "PunnetFull");
  EXPECT_TRUE(stopped.consistent());
}

TEST(Orchestrator, TimeModelSumsComponents) {
  AttemptRecord r;
  motion::SegmentPlan s;
  s.duration = 1.5;
  r.segments = {s, s};
  r.events.detections = 1;
  r.events.grip_cuts = 1;
  TimeConstants t;
  EXPECT_DOUBLE_EQ(time_model(r, t), 3.0 + 2 * t.planning_s_per_segment + t.detection_s + t.grip_cut_s);
  EXPECT_DOUBLE_EQ(time_model(r, TimeConstants::zero()), 3.0);
}

TEST(Orchestrator, VerboseEventsAreJsonLines) {
  auto cfg = TrialConfig::golden();
  cfg.verbose = true;
  const auto log = run_trial(scene::generate_scene(scene::SceneConfig{}, 1), cfg, 1);
  ASSERT_FALSE(log.events.empty());
  for (const auto& e : log.events) EXPECT_TRUE(nlohmann::json::accept(e)) << e;
  cfg.verbose = false;
  EXPECT_TRUE(run_trial(scene::generate_scene(scene::SceneConfig{}, 1), cfg, 1).events.empty());
}

TEST(Orchestrator, ConfigValidation) {
  auto cfg = TrialConfig::golden();
  cfg.grip_force = 12.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrialConfig::golden();
  cfg.injection.position = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrialConfig::golden();
  cfg.gpr_model = std::make_shared<const gpr::GprModel>(
      gpr::GprModel::fit({{std::vector<double>(5, 1.0), Vec3::Zero()}}));
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_EQ(outcome_from_string(to_string(Outcome::GripCutFailure)), Outcome::GripCutFailure);
  EXPECT_THROW(outcome_from_string("Bruised"), Error);
}

TEST(Orchestrator, TeachSamplesCarryTheLocalisationError) {
  const auto cfg = TrialConfig::calibrated();
  const auto samples = collect_teach_samples(cfg, scene::SceneConfig{}, 50, 77);
  ASSERT_EQ(samples.size(), 50u);
  Vec3 mean = Vec3::Zero();
  for (const auto& s : samples) {
    EXPECT_EQ(s.features.size(), cfg.gpr_layout.dimension());
    mean += s.label / 50.0;
  }
  // The labels follow the injected field error.
  EXPECT_NEAR(mean.x(), 0.062, 0.01);
  EXPECT_NEAR(mean.z(), -0.019, 0.01);
  const auto again = collect_teach_samples(cfg, scene::SceneConfig{}, 50, 77);
  for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_EQ(samples[i].label, again[i].label);
}

TEST(Orchestrator, GprCorrectionHalvesHeldOutError) {
  const auto& cfg = calibrated_with_model();
  const auto test = collect_teach_samples(cfg, scene::SceneConfig{}, 300, 7000,
                                          TeachAssociation::Runtime);
  Vec3 pre = Vec3::Zero(), post = Vec3::Zero();
  for (const auto& s : test) {
    pre += s.label.cwiseAbs();
    post += (s.label - cfg.gpr_model->predict(s.features).mean).cwiseAbs();
  }
  for (int a = 0; a < 3; ++a) EXPECT_LT(post[a], 0.5 * pre[a]);
}
