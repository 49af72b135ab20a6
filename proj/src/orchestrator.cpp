#include "robofruit/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "robofruit/error.hpp"
#include "robofruit/rng.hpp"

namespace robofruit::orchestrator {

using motion::SegmentPlan;
using motion::Waypoint;
using motion::WaypointLabel;
using perception::TargetAssociation;

TimeConstants TimeConstants::zero() {
  TimeConstants t;
  t.detection_s = t.planning_s_per_segment = t.association_s = t.adjustment_s = 0.0;
  t.gpr_s = t.confirm_poll_s = t.separator_s = t.grip_cut_s = 0.0;
  t.validation_s = t.release_s = t.punnet_swap_s = 0.0;
  return t;
}

FailureInjection FailureInjection::from_attempt_counts(int attempts, int position,
                                                       int cut_command,
                                                       int grip_cut,
                                                       int validation) {
  if (attempts <= 0) throw Error(ErrorKind::InvalidConfig, "attempts must be positive");
  FailureInjection f;
  double reaching = attempts;
  f.position = position / reaching;
  reaching -= position;
  f.cut_command = reaching > 0 ? cut_command / reaching : 0.0;
  reaching -= cut_command;
  f.grip_cut = reaching > 0 ? grip_cut / reaching : 0.0;
  reaching -= grip_cut;
  f.validation = reaching > 0 ? validation / reaching : 0.0;
  return f;
}

Rig Rig::standard() {
  Rig rig;
  rig.top_cam.intrinsics = {460.0, 460.0, 320.0, 240.0, 640, 480};
  rig.top_cam.base_from_camera = geometry::RigidTransform(
      geometry::camera_rotation_looking_along(Vec3(1.0, 0.0, -0.15), -Vec3::UnitZ()),
      Vec3(0.02, 0.0, 0.12));
  rig.bottom_intrinsics = {160.0, 160.0, 160.0, 120.0, 320, 240};
  const geometry::Mat3 forward =
      geometry::camera_rotation_looking_along(Vec3::UnitX(), -Vec3::UnitZ());
  // 25 mm horizontal spacing, behind and below the finger point.
  const std::array<double, sensors::kBottomCameras> ys{-0.025, 0.0, 0.025};
  for (std::size_t c = 0; c < sensors::kBottomCameras; ++c) {
    rig.bottom_mounts[c] = geometry::RigidTransform(forward, Vec3(-0.08, ys[c], -0.04));
  }
  rig.table_side = {Vec3::UnitX(), 0.55};
  return rig;
}

sensors::BottomCameras Rig::bottom_cams_at(const Vec3& effector_position) const {
  const auto body = geometry::RigidTransform::from_translation(effector_position);
  sensors::BottomCameras cams;
  for (std::size_t c = 0; c < sensors::kBottomCameras; ++c) {
    cams[c] = CameraModel{bottom_intrinsics, body * bottom_mounts[c]};
  }
  return cams;
}

void TrialConfig::validate() const {
  if (retries < 0) throw Error(ErrorKind::InvalidConfig, "retries must be >= 0");
  if (!(standoff > 0.0)) throw Error(ErrorKind::InvalidConfig, "standoff must be > 0");
  if (max_adjustments < 0 || confirm_attempts < 1) {
    throw Error(ErrorKind::InvalidConfig, "invalid adjustment/confirmation bounds");
  }
  if (!(gamma_max >= 0.0) || !(retreat_distance >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "negative gamma_max or retreat distance");
  }
  if (grip_force > force.grip_limit || !(grip_force > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "grip force must be in (0, grip_limit]");
  }
  for (double p : {injection.position, injection.cut_command, injection.grip_cut,
                   injection.validation, glare_prob, separators.success_prob,
                   detector.miss_prob, detector.class_error_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "probability outside [0,1]");
    }
  }
  force.validate();
  noise.validate();
  hsv.validate();
  rig.top_cam.intrinsics.validate();
  rig.bottom_intrinsics.validate();
  if (gpr_model && gpr_model->feature_dim() != gpr_layout.dimension()) {
    throw Error(ErrorKind::InvalidConfig,
                fmt::format("GPR model expects {} features, layout gives {}",
                            gpr_model->feature_dim(), gpr_layout.dimension()));
  }
}

TrialConfig TrialConfig::golden() {
  TrialConfig c;
  c.noise = sensors::SensorNoiseModel{};
  c.detector = sensors::DetectorConfig::noise_free();
  c.bottom.bbox_jitter_px = 0.0;
  c.separators.success_prob = 1.0;
  return c;
}

TrialConfig TrialConfig::calibrated() {
  // Field-trial totals: 201 attempts with 17 position, 26 cut command,
  // 9 grip/cut and 6 validation failures; 8 of 163 pluckable undetected.
  TrialConfig c;
  c.noise = sensors::SensorNoiseModel::field_model();
  c.detector.miss_prob = 8.0 / 163.0;
  c.detector.class_error_prob = 0.0;
  c.separators.success_prob = 1.0;
  c.retries = 1;
  c.injection = FailureInjection::from_attempt_counts(201, 17, 26, 9, 6);
  return c;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "Success";
    case Outcome::DetectionMiss: return "DetectionMiss";
    case Outcome::CutCommandFailure: return "CutCommandFailure";
    case Outcome::GripCutFailure: return "GripCutFailure";
    case Outcome::ValidationFailure: return "ValidationFailure";
    case Outcome::PositionFailure: return "PositionFailure";
  }
  return "DetectionMiss";
}

Outcome outcome_from_string(std::string_view s) {
  for (Outcome o : {Outcome::Success, Outcome::DetectionMiss, Outcome::CutCommandFailure,
                    Outcome::GripCutFailure, Outcome::ValidationFailure,
                    Outcome::PositionFailure}) {
    if (to_string(o) == s) return o;
  }
  throw Error(ErrorKind::ParseError, "unknown outcome '" + std::string(s) + "'");
}

int TrialLog::attempt_count() const {
  int n = 0;
  for (const auto& a : attempts) {
    if (a.outcome != Outcome::DetectionMiss && a.target_pluckable) ++n;
  }
  return n;
}

int TrialLog::count(Outcome o) const {
  int n = 0;
  for (const auto& a : attempts) {
    if (a.outcome == o && (a.target_pluckable || o == Outcome::DetectionMiss)) ++n;
  }
  return n;
}

bool TrialLog::consistent() const {
  if (!(successes <= detected_pluckable && detected_pluckable <= pluckable &&
        pluckable <= total_fruit && successes >= 0)) {
    return false;
  }
  if (successes != count(Outcome::Success)) return false;
  const int failures = count(Outcome::CutCommandFailure) + count(Outcome::GripCutFailure) +
                       count(Outcome::ValidationFailure) + count(Outcome::PositionFailure);
  if (failures + successes != attempt_count()) return false;
  return count(Outcome::DetectionMiss) == pluckable - detected_pluckable;
}

double time_model(const AttemptRecord& attempt, const TimeConstants& c) {
  double t = 0.0;
  for (const auto& s : attempt.segments) t += s.duration;
  const auto& e = attempt.events;
  t += c.planning_s_per_segment * static_cast<double>(attempt.segments.size());
  t += c.detection_s * e.detections + c.association_s * e.associations +
       c.adjustment_s * e.adjustments + c.gpr_s * e.gpr_queries +
       c.confirm_poll_s * e.confirm_polls + c.separator_s * e.separator_ops +
       c.grip_cut_s * e.grip_cuts + c.validation_s * e.validations +
       c.release_s * e.releases;
  return t;
}

namespace {

constexpr double kNominalFleshRadius = 0.015;

Waypoint waypoint(const Vec3& p, WaypointLabel label) {
  Waypoint w;
  w.position = p;
  w.label = label;
  return w;
}

struct PreGraspView {
  Vec3 effector = Vec3::Zero();
  sensors::BottomCameras cams;
  TargetAssociation assoc;
  int adjustments = 0;
  int associations = 0;
  bool visible = false;
  std::vector<SegmentPlan> segments;
};

/// Associates the target from the pre-grasp pose, making up to
/// max_adjustments corrective moves while it is not visible in two cameras.
/// `assoc_point` is the estimate with any known systematic error removed.
PreGraspView look_from_pregrasp(const scene::Scene& world, const TrialConfig& cfg,
                                const Vec3& assoc_point, const Vec3& pregrasp,
                                int max_adjustments, std::uint64_t seed,
                                std::vector<std::string>* events) {
  PreGraspView view;
  view.effector = pregrasp;
  for (int k = 0;; ++k) {
    view.cams = cfg.rig.bottom_cams_at(view.effector);
    const auto obs = sensors::observe_bottom(world, view.cams, cfg.bottom,
                                             derive_seed(seed, static_cast<std::uint64_t>(k)));
    view.assoc = perception::associate_bottom(assoc_point, obs.boxes, view.cams);
    ++view.associations;
    view.visible = perception::visible_in_two(view.assoc, cfg.gamma_max);
    if (events) {
      events->push_back(fmt::format(
          R"({{"event":"association","pass":{},"gamma":[{:.3f},{:.3f},{:.3f}],"matches":{},"visible_in_two":{}}})",
          k, view.assoc.gamma[0], view.assoc.gamma[1], view.assoc.gamma[2],
          view.assoc.match_count(), view.visible));
    }
    if (view.visible || k >= max_adjustments) break;
    const auto move = perception::propose_adjustment(view.assoc, cfg.gamma_max,
                                                     cfg.adjustment_deadband_px);
    const Vec3 next = view.effector +
                      perception::adjustment_displacement(
                          move, view.cams[sensors::kMiddle], cfg.adjustment_step);
    view.segments.push_back(motion::plan_lin(waypoint(view.effector, WaypointLabel::Custom),
                                             waypoint(next, WaypointLabel::PreGrasp),
                                             cfg.limits.lin_v, cfg.limits.lin_a));
    if (events) {
      events->push_back(fmt::format(R"({{"event":"adjustment","move":"{}"}})",
                                    perception::to_string(move)));
    }
    view.effector = next;
    ++view.adjustments;
  }
  return view;
}

using BoxSet = std::array<std::optional<geometry::BoundingBox>, sensors::kBottomCameras>;

BoxSet accepted_boxes(const TargetAssociation& assoc, double gamma_max) {
  BoxSet boxes;
  for (std::size_t c = 0; c < sensors::kBottomCameras; ++c) {
    if (assoc.matched[c] && assoc.gamma[c] <= gamma_max) boxes[c] = assoc.matched[c];
  }
  return boxes;
}

/// Missing cameras fall back to the box a nominal berry at the estimate
/// would produce.
std::vector<double> gpr_features(const TrialConfig& cfg, const BoxSet& boxes,
                                 const sensors::BottomCameras& cams, const Vec3& estimate,
                                 const Vec3& pregrasp_offset) {
  std::array<geometry::BoundingBox, 3> fallback;
  scene::Berry nominal;
  nominal.flesh_center = estimate;
  nominal.flesh_radius = kNominalFleshRadius;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto proj = sensors::project_flesh_box(cams[c], nominal);
    const auto pc = cams[c].intrinsics.principal_point();
    fallback[c] = proj.value_or(geometry::BoundingBox{pc.u, pc.v, pc.u, pc.v});
  }
  return gpr::assemble_features(boxes, fallback, cfg.gpr_layout, pregrasp_offset);
}

Vec3 systematic_error(const TrialConfig& cfg) {
  return cfg.gpr_model ? cfg.gpr_model->label_mean() : Vec3::Zero();
}

/// Red fraction between the fingers. Occlusion follows the proximity model:
/// the view holds the target and whichever of its occluders remain.
double inter_finger_ratio(const scene::Scene& world, const TrialConfig& cfg, int target_id,
                          const Vec3& effector, std::uint64_t seed) {
  scene::Scene view;
  if (const scene::Berry* target = world.find(target_id)) {
    view.berries.push_back(*target);
    for (int id : target->occluder_ids) {
      if (const scene::Berry* o = world.find(id)) view.berries.push_back(*o);
    }
  }
  const auto cams = cfg.rig.bottom_cams_at(effector);
  const auto& mid = cams[sensors::kMiddle];
  const auto window = head::inter_finger_window(mid.intrinsics);
  sensors::RenderOptions opts;
  opts.glare_prob = cfg.glare_prob;
  opts.ripeness_threshold = cfg.detector.ripeness_threshold;
  opts.seed = seed;
  const auto patch = sensors::render_bottom_patch(view, mid, window, opts);
  return head::red_mask_ratio(
      patch, geometry::BoundingBox{0, 0, static_cast<double>(patch.width),
                                   static_cast<double>(patch.height)},
      cfg.hsv);
}

struct Target {
  int berry_id;
  bool truth_pluckable;
  geometry::Pixel center_px;
  Vec3 estimate;  // localised flesh centre
};

class TrialRunner {
 public:
  TrialRunner(const scene::Scene& scene, const TrialConfig& cfg, std::uint64_t seed)
      : world_(scene), cfg_(cfg), seed_(seed), rng_(derive_seed(seed, 2)) {}

  TrialLog run() {
    cfg_.validate();
    log_.seed = seed_;
    log_.total_fruit = static_cast<int>(world_.berries.size());
    const double thr = cfg_.detector.ripeness_threshold;
    std::set<int> truth_pluckable;
    for (const auto& b : world_.berries) {
      if (scene::ground_truth_pluckable(b, thr)) truth_pluckable.insert(b.id);
    }
    log_.pluckable = static_cast<int>(truth_pluckable.size());

    const auto detections = sensors::observe_top(world_, cfg_.rig.top_cam, cfg_.noise,
                                                 cfg_.detector, derive_seed(seed_, 1));
    std::vector<Target> targets;
    std::set<int> detected;
    for (const auto& det : detections) {
      if (det.predicted_class != sensors::PredictedClass::Pluckable) continue;
      Vec3 estimate;
      try {
        estimate = perception::localize_target(det, cfg_.rig.top_cam, cfg_.depth_near,
                                               cfg_.depth_far);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoValidDepth) throw;
        continue;
      }
      const bool truth = truth_pluckable.contains(det.berry_id_truth);
      if (truth) detected.insert(det.berry_id_truth);
      targets.push_back({det.berry_id_truth, truth, geometry::bbox_center(det.bbox), estimate});
    }
    log_.detected_pluckable = static_cast<int>(detected.size());
    for (int id : truth_pluckable) {
      if (detected.contains(id)) continue;
      AttemptRecord miss;
      miss.berry_id = id;
      miss.outcome = Outcome::DetectionMiss;
      log_.attempts.push_back(miss);
    }

    std::vector<std::size_t> order;
    if (cfg_.policy == scheduler::Policy::Coordinate) {
      std::vector<geometry::Pixel> centers;
      for (const auto& t : targets) centers.push_back(t.center_px);
      order = scheduler::sort_by_coordinate(centers, cfg_.direction);
    }
    std::vector<bool> done(targets.size(), false);
    for (std::size_t step = 0; step < targets.size(); ++step) {
      std::size_t next;
      if (cfg_.policy == scheduler::Policy::Coordinate) {
        next = order[step];
      } else {
        std::vector<geometry::Pixel> centers;
        std::vector<std::size_t> remaining;
        for (std::size_t i = 0; i < targets.size(); ++i) {
          if (!done[i]) {
            centers.push_back(targets[i].center_px);
            remaining.push_back(i);
          }
        }
        next = remaining[scheduler::min_max_target(centers)];
      }
      done[next] = true;
      if (!harvest(targets[next])) break;
    }

    log_.successes = log_.count(Outcome::Success);
    for (const auto& a : log_.attempts) log_.total_time += a.duration;
    log_.total_time += log_.punnet_swaps * cfg_.time.punnet_swap_s;
    return std::move(log_);
  }

 private:
  /// Returns false when the trial has to stop.
  bool harvest(const Target& target) {
    for (int k = 1; k <= cfg_.retries + 1; ++k) {
      if (world_.punnet.full()) {
        if (!cfg_.replace_full_punnet) {
          log_.ended_early = std::string(to_string(ErrorKind::PunnetFull));
          note(R"({"event":"punnet_full"})");
          return false;
        }
        world_.punnet.occupancy = {};
        ++log_.punnet_swaps;
      }
      AttemptRecord rec = attempt(target, k);
      rec.duration = time_model(rec, cfg_.time);
      const Outcome o = rec.outcome;
      if (!target.truth_pluckable) ++log_.false_positive_attempts;
      log_.attempts.push_back(std::move(rec));
      // Detached berries are gone either way.
      if (o == Outcome::Success || o == Outcome::ValidationFailure) break;
    }
    return true;
  }

  void add_segment(AttemptRecord& rec, const SegmentPlan& seg) {
    rec.segments.push_back(seg);
    note(fmt::format(R"({{"event":"segment","mode":"{}","to":"{}","length":{:.4f},"duration":{:.4f}}})",
                     motion::to_string(seg.mode), motion::to_string(seg.goal.label),
                     seg.length, seg.duration));
  }

  void go_home(AttemptRecord& rec, const Vec3& from) {
    add_segment(rec, motion::plan_free(waypoint(from, WaypointLabel::Custom),
                                       waypoint(cfg_.rig.home_position, WaypointLabel::Home),
                                       cfg_.limits.free_v, cfg_.limits.free_a));
  }

  void note(std::string line) {
    if (cfg_.verbose) log_.events.push_back(std::move(line));
  }

  void fail(AttemptRecord& rec, Outcome o, head::EffectorState& state, const Vec3& at) {
    rec.outcome = o;
    if (state.gripper == head::Gripper::Gripping) {
      head::release(state);
      ++rec.events.releases;
    }
    if (state.separators == head::Separators::Open) head::close_separators(state);
    go_home(rec, at);
    note(fmt::format(R"({{"event":"outcome","berry":{},"outcome":"{}"}})", rec.berry_id,
                     to_string(o)));
  }

  AttemptRecord attempt(const Target& target, int attempt_index) {
    AttemptRecord rec;
    rec.berry_id = target.berry_id;
    rec.attempt_index = attempt_index;
    rec.target_pluckable = target.truth_pluckable;
    ++rec.events.detections;
    const std::uint64_t attempt_seed =
        derive_seed(seed_, 100 + static_cast<std::uint64_t>(log_.attempts.size()));
    head::EffectorState state;

    const Vec3 home = cfg_.rig.home_position;
    const Vec3& estimate = target.estimate;
    const Vec3 est_pp = estimate + cfg_.nominal_pp_offset;
    const Vec3 pregrasp = est_pp - cfg_.standoff * Vec3::UnitX();
    if (!cfg_.rig.table_side.contains(pregrasp)) {
      fail(rec, Outcome::PositionFailure, state, home);
      return rec;
    }
    add_segment(rec, motion::plan_free(waypoint(home, WaypointLabel::Home),
                                       waypoint(pregrasp, WaypointLabel::PreGrasp),
                                       cfg_.limits.free_v, cfg_.limits.free_a));

    auto view = look_from_pregrasp(world_, cfg_, estimate - systematic_error(cfg_), pregrasp,
                                   cfg_.max_adjustments, derive_seed(attempt_seed, 1),
                                   cfg_.verbose ? &log_.events : nullptr);
    rec.events.associations += view.associations;
    rec.events.adjustments += view.adjustments;
    for (const auto& s : view.segments) add_segment(rec, s);
    Vec3 effector = view.effector;
    if (!view.visible || rng_.bernoulli(cfg_.injection.position)) {
      fail(rec, Outcome::PositionFailure, state, effector);
      return rec;
    }

    Vec3 pick = est_pp;
    if (cfg_.gpr_model) {
      ++rec.events.gpr_queries;
      const auto features = gpr_features(cfg_, accepted_boxes(view.assoc, cfg_.gamma_max),
                                         view.cams, estimate, view.effector - pregrasp);
      pick = gpr::correct_picking_point(est_pp, *cfg_.gpr_model, features);
    }
    if (!cfg_.rig.table_side.contains(pick)) {
      fail(rec, Outcome::PositionFailure, state, effector);
      return rec;
    }
    add_segment(rec, motion::plan_lin(waypoint(effector, WaypointLabel::PreGrasp),
                                      waypoint(pick, WaypointLabel::Pick),
                                      cfg_.limits.lin_v, cfg_.limits.lin_a));
    effector = pick;

    scene::Berry* berry = world_.find(target.berry_id);
    if (berry == nullptr) {
      fail(rec, Outcome::PositionFailure, state, effector);
      return rec;
    }
    ++rec.events.separator_ops;
    if ((effector - berry->key_points.picking_point).norm() <=
        cfg_.separators.engagement_distance) {
      const auto displaced = head::open_separators(state, world_, berry->id, effector,
                                                   cfg_.separators, rng_);
      note(fmt::format(R"({{"event":"separators_open","displaced":{}}})", displaced.size()));
    }

    bool confirmed = false;
    const bool inject_cut_cmd = rng_.bernoulli(cfg_.injection.cut_command);
    for (int poll = 0; poll < cfg_.confirm_attempts && !confirmed; ++poll) {
      ++rec.events.confirm_polls;
      const double ratio = inter_finger_ratio(
          world_, cfg_, target.berry_id, effector, derive_seed(attempt_seed, 10 + static_cast<std::uint64_t>(poll)));
      rec.confirm_ratio = ratio;
      note(fmt::format(R"({{"event":"confirm_poll","ratio":{:.4f}}})", ratio));
      confirmed = !inject_cut_cmd && head::cutting_confirmed(ratio, cfg_.threshold_confirm);
    }
    if (!confirmed) {
      fail(rec, Outcome::CutCommandFailure, state, effector);
      return rec;
    }

    ++rec.events.grip_cuts;
    const auto cut = head::grip_and_cut(state, *berry, effector, cfg_.grip_cut, cfg_.force);
    note(fmt::format(R"({{"event":"grip_cut","outcome":"{}","required_force":{:.3f},"grip_force":{:.3f}}})",
                     head::to_string(cut.outcome), cut.required_cut_force, cfg_.grip_force));
    if (cut.outcome == head::CutOutcome::Missed) {
      fail(rec, Outcome::PositionFailure, state, effector);
      return rec;
    }
    if (cut.outcome == head::CutOutcome::PartialCut ||
        rng_.bernoulli(cfg_.injection.grip_cut)) {
      fail(rec, Outcome::GripCutFailure, state, effector);
      return rec;
    }
    rec.residual_warning = cut.residual_warning;

    // Detached: the berry now travels with the fingers.
    const Vec3 post = effector - cfg_.retreat_distance * Vec3::UnitX();
    add_segment(rec, motion::plan_lin(waypoint(effector, WaypointLabel::Pick),
                                      waypoint(post, WaypointLabel::PostGrasp),
                                      cfg_.limits.lin_v, cfg_.limits.lin_a));
    berry->translate(post - effector);
    for (auto& other : world_.berries) std::erase(other.occluder_ids, berry->id);
    berry->occluder_ids.clear();
    effector = post;

    ++rec.events.validations;
    const double after = inter_finger_ratio(world_, cfg_, target.berry_id, effector,
                                            derive_seed(attempt_seed, 50));
    rec.validate_ratio = after;
    if (!head::picking_validated(after, cfg_.threshold_validate) ||
        rng_.bernoulli(cfg_.injection.validation)) {
      world_.remove_berry(target.berry_id);
      fail(rec, Outcome::ValidationFailure, state, effector);
      return rec;
    }

    const int slot = *world_.punnet.next_free_slot();
    const Waypoint slot_pose = motion::punnet_slot_pose(world_.punnet, slot);
    const double carry_a =
        std::min(cfg_.limits.free_a,
                 motion::max_safe_acceleration(cfg_.force,
                                               std::min(cfg_.grip_force, cfg_.force.grip_limit)));
    add_segment(rec, motion::plan_free(waypoint(effector, WaypointLabel::PostGrasp), slot_pose,
                                       cfg_.limits.free_v, carry_a));
    effector = slot_pose.position;
    head::release(state);
    ++rec.events.releases;
    if (state.separators == head::Separators::Open) head::close_separators(state);
    world_.punnet.occupancy[static_cast<std::size_t>(slot)] = target.berry_id;
    world_.remove_berry(target.berry_id);
    go_home(rec, effector);
    rec.outcome = Outcome::Success;
    note(fmt::format(R"({{"event":"outcome","berry":{},"outcome":"Success","slot":{}}})",
                     rec.berry_id, slot));
    return rec;
  }

  scene::Scene world_;
  const TrialConfig& cfg_;
  std::uint64_t seed_;
  Rng rng_;
  TrialLog log_;
};

}  // namespace

TrialLog run_trial(const scene::Scene& scene, const TrialConfig& config,
                   std::uint64_t seed) {
  return TrialRunner(scene, config, seed).run();
}

std::vector<gpr::GprSample> collect_teach_samples(const TrialConfig& config,
                                                  const scene::SceneConfig& scene_config,
                                                  std::size_t count, std::uint64_t seed,
                                                  TeachAssociation association) {
  std::vector<gpr::GprSample> samples;
  const double thr = config.detector.ripeness_threshold;
  const Vec3 bias = systematic_error(config);
  for (std::uint64_t s = seed; samples.size() < count; ++s) {
    if (s - seed > 100000) {
      throw Error(ErrorKind::InvalidConfig, "teaching produced too few samples");
    }
    const auto world = scene::generate_scene(scene_config, s);
    const auto dets = sensors::observe_top(world, config.rig.top_cam, config.noise,
                                           config.detector, derive_seed(s, 1));
    for (const auto& det : dets) {
      if (samples.size() >= count) break;
      const scene::Berry* b = world.find(det.berry_id_truth);
      if (b == nullptr || !scene::ground_truth_pluckable(*b, thr)) continue;
      Vec3 estimate;
      try {
        estimate = perception::localize_target(det, config.rig.top_cam, config.depth_near,
                                               config.depth_far);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoValidDepth) throw;
        continue;
      }
      const Vec3 est_pp = estimate + config.nominal_pp_offset;
      const Vec3 pregrasp = est_pp - config.standoff * Vec3::UnitX();
      const auto cams = config.rig.bottom_cams_at(pregrasp);
      const std::uint64_t view_seed = derive_seed(s, 500 + static_cast<std::uint64_t>(b->id));
      BoxSet boxes;
      if (association == TeachAssociation::Operator) {
        const auto obs = sensors::observe_bottom(world, cams, config.bottom,
                                                 derive_seed(view_seed, 0));
        int seen = 0;
        for (std::size_t c = 0; c < sensors::kBottomCameras; ++c) {
          for (std::size_t i = 0; i < obs.truth_ids[c].size(); ++i) {
            if (obs.truth_ids[c][i] == b->id) {
              boxes[c] = obs.boxes[c][i];
              ++seen;
            }
          }
        }
        if (seen < 2) continue;
      } else {
        const auto view =
            look_from_pregrasp(world, config, estimate - bias, pregrasp, 0, view_seed, nullptr);
        if (!view.visible) continue;
        boxes = accepted_boxes(view.assoc, config.gamma_max);
      }
      gpr::GprSample sample;
      sample.features = gpr_features(config, boxes, cams, estimate, Vec3::Zero());
      sample.label = est_pp - b->key_points.picking_point;
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

}  // namespace robofruit::orchestrator
