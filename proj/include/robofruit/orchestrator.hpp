#pragma once

// One harvesting trial over a scene, as a deterministic sequential state
// machine:
//
//   detect -> schedule -> pre-grasp -> associate/adjust -> GPR-correct ->
//   pick pose -> confirm -> grip+cut -> retreat -> validate -> place -> home
//
// Every attempt ends in exactly one Outcome. Failures are classified into the
// field-trial columns (cut command, grip/cut, validation, position) and
// pluckable berries the detector never reported become DetectionMiss records.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robofruit/geometry.hpp"
#include "robofruit/gpr.hpp"
#include "robofruit/motion.hpp"
#include "robofruit/perception.hpp"
#include "robofruit/picking_head.hpp"
#include "robofruit/scene.hpp"
#include "robofruit/scheduler.hpp"
#include "robofruit/sensors.hpp"

namespace robofruit::orchestrator {

using geometry::CameraModel;
using geometry::Vec3;

/// Fixed latencies added to planned segment durations.
struct TimeConstants {
  double detection_s = 5.0;           // image capture, inference, scheduling
  double planning_s_per_segment = 1.6;
  double association_s = 0.6;         // per bottom-camera association pass
  double adjustment_s = 0.5;          // per adjustment move, besides motion
  double gpr_s = 0.3;
  double confirm_poll_s = 1.5;
  double separator_s = 1.2;
  double grip_cut_s = 2.0;
  double validation_s = 1.5;
  double release_s = 1.2;
  double punnet_swap_s = 20.0;        // per full punnet, trial time only

  static TimeConstants zero();
};

/// Stage-conditional failure probabilities layered on top of the physical
/// models. Zero by default.
struct FailureInjection {
  double position = 0.0;
  double cut_command = 0.0;
  double grip_cut = 0.0;
  double validation = 0.0;

  /// Conditional stage probabilities that reproduce the given unconditional
  /// per-attempt failure counts when stages run in pipeline order
  /// (position, cut command, grip/cut, validation).
  static FailureInjection from_attempt_counts(int attempts, int position,
                                              int cut_command, int grip_cut,
                                              int validation);
};

struct MotionLimits {
  double free_v = 1.0, free_a = 2.0;
  double lin_v = 0.2, lin_a = 0.5;
};

/// Robot and camera geometry.
struct Rig {
  CameraModel top_cam;
  geometry::Intrinsics bottom_intrinsics;
  /// Bottom camera poses relative to the effector point, in the order
  /// {right, middle, left}.
  std::array<geometry::RigidTransform, sensors::kBottomCameras> bottom_mounts;
  Vec3 home_position{0.20, 0.0, 0.10};
  motion::HalfSpace table_side;

  static Rig standard();
  sensors::BottomCameras bottom_cams_at(const Vec3& effector_position) const;
};

struct TrialConfig {
  Rig rig = Rig::standard();

  scheduler::Policy policy = scheduler::Policy::Coordinate;
  scheduler::SortDirection direction = scheduler::SortDirection::LeftToRight;

  sensors::SensorNoiseModel noise;
  sensors::DetectorConfig detector;
  sensors::BottomSensorConfig bottom;

  std::shared_ptr<const gpr::GprModel> gpr_model;
  gpr::FeatureLayout gpr_layout;
  gpr::GprOptions gpr_options{1.0, 1e-6, gpr::FeatureScaling::ZScore};

  double standoff = 0.15;  // pre-grasp distance d along the approach axis
  /// Picking point relative to the localised flesh centre.
  Vec3 nominal_pp_offset{0.0, 0.0, 0.030};
  double depth_near = 0.20, depth_far = 0.50;
  double gamma_max = 40.0;
  int max_adjustments = 3;
  double adjustment_step = 0.03;
  double adjustment_deadband_px = 20.0;

  int retries = 2;
  int confirm_attempts = 3;
  double retreat_distance = 0.10;
  double threshold_confirm = 0.10;
  double threshold_validate = 0.15;
  head::HsvRanges hsv;
  double glare_prob = 0.0;
  bool replace_full_punnet = true;

  head::SeparatorConfig separators;
  head::GripCutConfig grip_cut;
  motion::ForceParams force;
  double grip_force = 8.0;  // N applied, never above force.grip_limit

  MotionLimits limits;
  TimeConstants time;
  FailureInjection injection;
  bool verbose = false;

  void validate() const;

  /// Ideal sensing and a perfect detector.
  static TrialConfig golden();
  /// Field error model with stage failure rates and the detection miss rate
  /// set from the field-trial totals. Needs a GPR model to be attached.
  static TrialConfig calibrated();
};

enum class Outcome {
  Success,
  DetectionMiss,
  CutCommandFailure,
  GripCutFailure,
  ValidationFailure,
  PositionFailure,
};
std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);

/// Counts of latency-bearing events within one attempt.
struct AttemptEvents {
  int detections = 0;
  int associations = 0;
  int adjustments = 0;
  int gpr_queries = 0;
  int confirm_polls = 0;
  int separator_ops = 0;
  int grip_cuts = 0;
  int validations = 0;
  int releases = 0;
};

struct AttemptRecord {
  int berry_id = -1;
  Outcome outcome = Outcome::DetectionMiss;
  int attempt_index = 0;  // 1-based per berry; 0 for DetectionMiss
  bool target_pluckable = true;
  double duration = 0.0;
  std::vector<motion::SegmentPlan> segments;
  AttemptEvents events;
  std::optional<double> confirm_ratio;
  std::optional<double> validate_ratio;
  bool residual_warning = false;
};

struct TrialLog {
  std::uint64_t seed = 0;
  int total_fruit = 0;        // N_a
  int pluckable = 0;          // N_p, ground truth
  int detected_pluckable = 0; // N_d
  int successes = 0;          // N_s
  std::vector<AttemptRecord> attempts;
  double total_time = 0.0;
  int punnet_swaps = 0;
  int false_positive_attempts = 0;
  std::string ended_early;  // empty, or the reason (e.g. "PunnetFull")
  std::vector<std::string> events;  // JSON lines, only when verbose

  /// Attempts on ground-truth pluckable berries (excludes DetectionMiss).
  int attempt_count() const;
  int count(Outcome o) const;
  /// N_s <= N_d <= N_p <= N_a and Success + failures == attempts.
  bool consistent() const;
};

TrialLog run_trial(const scene::Scene& scene, const TrialConfig& config,
                   std::uint64_t seed);

/// Sum of planned segment durations plus event latencies.
double time_model(const AttemptRecord& attempt, const TimeConstants& constants);

/// How the target's bottom-camera boxes are identified while collecting
/// samples.
enum class TeachAssociation {
  Operator,  // the teacher points out the berry: true boxes
  Runtime,   // the pipeline's own gamma association
};

/// Simulated kinesthetic teaching: for detected pluckable berries seen in at
/// least two bottom cameras from the uncorrected pre-grasp pose, records the
/// bottom-box features and the localisation error (estimated minus true
/// picking point). Scenes are generated from consecutive seeds starting at
/// `seed` until `count` samples exist. Runtime association uses the attached
/// model's mean error, if any, as it does during a trial.
std::vector<gpr::GprSample> collect_teach_samples(
    const TrialConfig& config, const scene::SceneConfig& scene_config, std::size_t count,
    std::uint64_t seed, TeachAssociation association = TeachAssociation::Operator);

}  // namespace robofruit::orchestrator
